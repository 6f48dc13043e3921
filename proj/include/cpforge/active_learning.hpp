#pragma once

// Pool-based active learning of the quality model with a golden oracle
// annotator for automated runs.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "cpforge/quality_model.hpp"
#include "cpforge/records.hpp"
#include "cpforge/sampler.hpp"

namespace cpforge {

// Golden labeling rules, version 1. ACCEPT iff none of these hold.
enum class OracleReason {
  MaxGap,          // max_gap_width > 4
  FloatingEnemy,   // an ENEMY without GROUND/PLATFORM beneath
  PipeIntegrity,   // broken or orphaned pipe
  Density,         // density outside [0.1, 0.6]
  Unplayable,      // column 15 unreachable from column 0 under the jump model
  BoundaryGround,  // column 0 or 15 holds no GROUND
};

inline constexpr int kOracleRulesVersion = 1;
inline constexpr double kOracleMinDensity = 0.1;
inline constexpr double kOracleMaxDensity = 0.6;

std::string_view oracle_reason_name(OracleReason reason);

struct OracleVerdict {
  Label label = Label::Accept;
  std::vector<OracleReason> reasons;
};

OracleVerdict oracle_label(const SegmentGrid& grid);

struct SessionOptions {
  int budget = 200;
  double holdout_frac = 0.2;
  std::uint64_t seed = 0;
  // Strict sessions refuse budgets smaller than the number of medoids.
  bool strict = false;
  TrainingHyper hyper;
};

struct CurvePoint {
  int queries = 0;
  double holdout_accuracy = 0.0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct LabelEvent {
  int id = 0;
  Label label = Label::Reject;

  friend bool operator==(const LabelEvent&, const LabelEvent&) = default;
};

// Single-writer annotation state machine.
//
// Ids are partitioned into labeled, unlabeled pool and holdout. The cluster
// medoids form the initial query set: next_query() returns them (in cluster
// order) before any uncertainty-driven query, and every label, medoid or
// not, counts against the budget. After each label the model is retrained
// from scratch on all labels (ascending id order); until both classes are
// present it stays the zero model.
class ALSession {
 public:
  // Throws Error{InvalidArgument} for bad options or medoid ids and
  // Error{BudgetTooSmall} in strict mode when budget < medoid count.
  ALSession(std::shared_ptr<const Dataset> dataset, std::span<const int> medoid_ids,
            const SessionOptions& options);

  // Throws Error{BudgetExhausted} or Error{PoolEmpty}. Does not mutate.
  int next_query() const;

  // Throws Error{UnknownId} (not a dataset id, or a holdout id),
  // Error{AlreadyLabeled} or Error{BudgetExhausted}.
  void submit_label(int id, Label label);

  // Labels the pending medoids with `annotator`, as far as the budget allows.
  void seed_with(const std::function<Label(const DatasetRecord&)>& annotator);

  const QualityModel& model() const { return model_; }
  int queries_made() const { return queries_made_; }
  int budget() const { return options_.budget; }
  const std::map<int, Label>& labeled() const { return labeled_; }
  const std::set<int>& pool() const { return pool_; }
  const std::vector<int>& holdout() const { return holdout_; }
  const std::vector<int>& pending_seeds() const { return seed_queue_; }
  const std::vector<LabelEvent>& history() const { return history_; }
  const Dataset& dataset() const { return *dataset_; }
  const DatasetRecord& record(int id) const;

  // Agreement of predict() >= 0.5 with the oracle over the holdout; empty
  // when the holdout is empty.
  std::optional<double> holdout_accuracy() const { return holdout_accuracy_; }

  std::vector<LabeledRecord> labeled_records(LabelSource source) const;

 private:
  void retrain();
  void refresh_metrics();

  std::shared_ptr<const Dataset> dataset_;
  SessionOptions options_;
  std::map<int, Label> labeled_;
  std::set<int> pool_;
  std::vector<int> holdout_;
  std::vector<Label> holdout_labels_;
  std::vector<int> seed_queue_;
  std::vector<LabelEvent> history_;
  QualityModel model_ = QualityModel::zero();
  int queries_made_ = 0;
  std::optional<double> holdout_accuracy_;
};

enum class QueryStrategy { Uncertainty, Random };

struct OracleRun {
  QualityModel model;
  std::vector<CurvePoint> curve;  // one point after seeding, then one per query
  std::vector<LabelEvent> labels;
  std::vector<LabeledRecord> labeled;
};

// init + medoid seeding + query/label loop to the budget, with oracle_label
// as the annotator. The Random strategy (baseline) picks uniformly from the
// pool with a generator seeded from `seed` instead of maximizing uncertainty.
OracleRun run_with_oracle(std::shared_ptr<const Dataset> dataset, std::span<const int> medoid_ids,
                          const SessionOptions& options,
                          QueryStrategy strategy = QueryStrategy::Uncertainty);

// Replays a fixed (id, label) sequence into a fresh session.
ALSession replay_labels(std::shared_ptr<const Dataset> dataset, std::span<const int> medoid_ids,
                        const SessionOptions& options, std::span<const LabelEvent> labels);

// CSV "queries,holdout_accuracy".
std::string curve_to_csv(std::span<const CurvePoint> curve);

}  // namespace cpforge
