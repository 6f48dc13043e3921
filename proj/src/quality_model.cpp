#include "cpforge/quality_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cpforge/error.hpp"
#include "cpforge/io_util.hpp"

namespace cpforge {

std::string_view label_name(Label label) { return label == Label::Accept ? "accept" : "reject"; }

Label parse_label(std::string_view text) {
  if (text == "accept") return Label::Accept;
  if (text == "reject") return Label::Reject;
  throw Error(ErrorCode::InvalidArgument, "label must be accept or reject, got '" +
                                              std::string(text) + "'");
}

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double linear(std::span<const double> params, std::span<const double> row) {
  double z = params[kFeatureCount];
  for (std::size_t j = 0; j < kFeatureCount; ++j) z += params[j] * row[j];
  return z;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LogisticObjective::LogisticObjective(Points standardized, std::vector<double> targets, double l2)
    : x_(std::move(standardized)), y_(std::move(targets)), l2_(l2) {
  if (x_.dim() != kFeatureCount || x_.size() != y_.size())
    throw Error(ErrorCode::InvalidArgument, "objective shape mismatch");
}

double LogisticObjective::loss(std::span<const double> params) const {
  double total = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double z = linear(params, x_.row(i));
    total += softplus(z) - y_[i] * z;
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < kFeatureCount; ++j) reg += params[j] * params[j];
  return total / static_cast<double>(x_.size()) + 0.5 * l2_ * reg;
}

std::vector<double> LogisticObjective::gradient(std::span<const double> params) const {
  std::vector<double> g(kParamCount, 0.0);
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const auto row = x_.row(i);
    const double err = sigmoid(linear(params, row)) - y_[i];
    for (std::size_t j = 0; j < kFeatureCount; ++j) g[j] += err * row[j];
    g[kFeatureCount] += err;
  }
  const double n = static_cast<double>(x_.size());
  for (auto& v : g) v /= n;
  for (std::size_t j = 0; j < kFeatureCount; ++j) g[j] += l2_ * params[j];
  return g;
}

QualityModel train(std::span<const LabeledExample> examples, const TrainingHyper& hyper,
                   std::vector<double>* loss_history) {
  bool has_accept = false;
  bool has_reject = false;
  for (const auto& ex : examples) (ex.label == Label::Accept ? has_accept : has_reject) = true;
  if (!has_accept || !has_reject)
    throw Error(ErrorCode::SingleClass, "training set needs both accept and reject labels");
  if (hyper.l2 < 0 || hyper.epochs < 0 || !(hyper.lr > 0))
    throw Error(ErrorCode::InvalidArgument, "bad training hyperparameters");

  Points raw;
  std::vector<double> y;
  for (const auto& ex : examples) {
    const auto v = ex.features.to_vector();
    raw.push_back(v);
    y.push_back(ex.label == Label::Accept ? 1.0 : 0.0);
  }

  QualityModel model;
  model.hyper = hyper;
  model.standardization = Standardization::fit(raw);
  LogisticObjective objective(model.standardization.apply(raw), std::move(y), hyper.l2);

  std::vector<double> params(LogisticObjective::kParamCount, 0.0);
  if (loss_history) loss_history->push_back(objective.loss(params));
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    // The L2 part of the step is taken implicitly, which keeps descent stable
    // for any l2 (an explicit step diverges once lr * l2 > 2).
    const auto g = objective.gradient(params);
    const double shrink = 1.0 + hyper.lr * hyper.l2;
    for (std::size_t j = 0; j < kFeatureCount; ++j)
      params[j] = (params[j] - hyper.lr * (g[j] - hyper.l2 * params[j])) / shrink;
    params[kFeatureCount] -= hyper.lr * g[kFeatureCount];
    if (loss_history) loss_history->push_back(objective.loss(params));
  }
  std::copy_n(params.begin(), kFeatureCount, model.weights.begin());
  model.bias = params[kFeatureCount];
  return model;
}

double predict(const QualityModel& model, const ContentFeatures& f) {
  const auto raw = f.to_vector();
  std::array<double, kFeatureCount> z{};
  model.standardization.apply(raw, z);
  double s = model.bias;
  for (std::size_t j = 0; j < kFeatureCount; ++j) s += model.weights[j] * z[j];
  constexpr double kEdge = 0x1.0p-53;
  return std::clamp(sigmoid(s), kEdge, 1.0 - kEdge);
}

double uncertainty_from_probability(double p) { return 1.0 - 2.0 * std::abs(p - 0.5); }

double uncertainty(const QualityModel& model, const ContentFeatures& f) {
  return uncertainty_from_probability(predict(model, f));
}

namespace {

constexpr std::string_view kModelFormat = "cpforge-model";
constexpr int kModelVersion = 1;

}  // namespace

std::string model_to_text(const QualityModel& m) {
  std::ostringstream out;
  const auto& names = feature_names();
  out << "format = " << kModelFormat << "\n";
  out << "version = " << kModelVersion << "\n";
  out << "feature_count = " << kFeatureCount << "\n";
  out << "bias = " << format_double(m.bias) << "\n";
  for (std::size_t j = 0; j < kFeatureCount; ++j)
    out << "weight." << names[j] << " = " << format_double(m.weights[j]) << "\n";
  for (std::size_t j = 0; j < kFeatureCount; ++j)
    out << "mean." << names[j] << " = " << format_double(m.standardization.mean[j]) << "\n";
  for (std::size_t j = 0; j < kFeatureCount; ++j)
    out << "std." << names[j] << " = " << format_double(m.standardization.stddev[j]) << "\n";
  out << "l2 = " << format_double(m.hyper.l2) << "\n";
  out << "lr = " << format_double(m.hyper.lr) << "\n";
  out << "epochs = " << m.hyper.epochs << "\n";
  out << "end\n";
  return out.str();
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size())
    throw Error(ErrorCode::ParseError, "model: bad number for '" + key + "': '" + value + "'");
  return v;
}

}  // namespace

QualityModel model_from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  bool ended = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (ended) throw Error(ErrorCode::ParseError, "model: content after 'end'");
    if (t == "end") {
      ended = true;
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError, "model: line " + std::to_string(lineno) + " is not key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty() || value.empty())
      throw Error(ErrorCode::ParseError, "model: line " + std::to_string(lineno) + " is incomplete");
    if (!kv.emplace(key, value).second)
      throw Error(ErrorCode::ParseError, "model: duplicate key '" + key + "'");
  }
  if (!ended) throw Error(ErrorCode::ParseError, "model: truncated (missing 'end')");

  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::MissingField, "model: missing '" + key + "'");
    return it->second;
  };
  if (get("format") != kModelFormat) throw Error(ErrorCode::ParseError, "model: wrong format tag");
  if (get("version") != std::to_string(kModelVersion))
    throw Error(ErrorCode::ParseError, "model: unsupported version");
  if (get("feature_count") != std::to_string(kFeatureCount))
    throw Error(ErrorCode::ParseError, "model: feature_count must be 11");

  QualityModel m;
  const auto& names = feature_names();
  m.bias = to_double("bias", get("bias"));
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    const std::string name(names[j]);
    m.weights[j] = to_double("weight." + name, get("weight." + name));
    m.standardization.mean[j] = to_double("mean." + name, get("mean." + name));
    m.standardization.stddev[j] = to_double("std." + name, get("std." + name));
  }
  m.hyper.l2 = to_double("l2", get("l2"));
  m.hyper.lr = to_double("lr", get("lr"));
  const double epochs = to_double("epochs", get("epochs"));
  m.hyper.epochs = static_cast<int>(epochs);
  if (static_cast<double>(m.hyper.epochs) != epochs)
    throw Error(ErrorCode::ParseError, "model: epochs must be an integer");

  const std::size_t expected = 3 + 1 + 3 * kFeatureCount + 3;
  if (kv.size() != expected) throw Error(ErrorCode::ParseError, "model: unexpected keys present");
  return m;
}

void save_model(const QualityModel& model, const std::string& path) {
  write_file(path, model_to_text(model));
}

QualityModel load_model(const std::string& path) { return model_from_text(read_file(path)); }

std::string model_id(const QualityModel& model) { return fnv1a_hex(model_to_text(model)); }

}  // namespace cpforge
