#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpforge/content_space.hpp"
#include "cpforge/standardization.hpp"

namespace cpforge {

enum class Label { Reject = 0, Accept = 1 };

std::string_view label_name(Label label);
// "accept" / "reject"; throws Error{InvalidArgument} otherwise.
Label parse_label(std::string_view text);

struct TrainingHyper {
  double l2 = 0.01;
  double lr = 0.1;
  int epochs = 300;

  friend bool operator==(const TrainingHyper&, const TrainingHyper&) = default;
};

struct LabeledExample {
  ContentFeatures features;
  Label label = Label::Reject;
};

// L2-regularized logistic regression over standardized ContentFeatures.
struct QualityModel {
  std::array<double, kFeatureCount> weights{};
  double bias = 0.0;
  Standardization standardization = Standardization::identity(kFeatureCount);
  TrainingHyper hyper;

  static QualityModel zero() { return {}; }

  friend bool operator==(const QualityModel&, const QualityModel&) = default;
};

// Mean log-loss plus (l2 / 2) * ||w||^2 over standardized rows. The bias is
// not regularized. Parameter vector layout: 11 weights, then the bias.
class LogisticObjective {
 public:
  LogisticObjective(Points standardized, std::vector<double> targets, double l2);

  static constexpr std::size_t kParamCount = kFeatureCount + 1;

  double loss(std::span<const double> params) const;
  std::vector<double> gradient(std::span<const double> params) const;

 private:
  Points x_;
  std::vector<double> y_;
  double l2_;
};

// Full-batch gradient descent from zero weights on features standardized
// with statistics fitted to `examples`; the L2 shrinkage is applied as an
// implicit (proximal) step so any l2 >= 0 is stable. Deterministic. If `loss_history` is
// non-null it receives the objective before training and after every epoch.
// Throws Error{SingleClass} unless both labels are present.
QualityModel train(std::span<const LabeledExample> examples, const TrainingHyper& hyper = {},
                   std::vector<double>* loss_history = nullptr);

double sigmoid(double z);

// sigmoid(w . standardize(f) + b), kept strictly inside (0, 1).
double predict(const QualityModel& model, const ContentFeatures& f);

// 1 - 2|p - 0.5|.
double uncertainty_from_probability(double p);
double uncertainty(const QualityModel& model, const ContentFeatures& f);

// Line-oriented "key = value" text, terminated by an "end" line.
// Numbers use 17 significant digits so load(save(m)) == m exactly.
std::string model_to_text(const QualityModel& model);
// Throws Error{ParseError} for malformed or truncated text and
// Error{MissingField} when a required key is absent.
QualityModel model_from_text(const std::string& text);

void save_model(const QualityModel& model, const std::string& path);
QualityModel load_model(const std::string& path);

// FNV-1a of the serialized model.
std::string model_id(const QualityModel& model);

}  // namespace cpforge
