#include "cpforge/active_learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cpforge/cp_pipeline.hpp"
#include "cpforge/error.hpp"
#include "cpforge/io_util.hpp"
#include "cpforge/reachability.hpp"

namespace cpforge {

std::string_view oracle_reason_name(OracleReason reason) {
  switch (reason) {
    case OracleReason::MaxGap: return "MAX_GAP";
    case OracleReason::FloatingEnemy: return "FLOATING_ENEMY";
    case OracleReason::PipeIntegrity: return "PIPE_INTEGRITY";
    case OracleReason::Density: return "DENSITY";
    case OracleReason::Unplayable: return "UNPLAYABLE";
    case OracleReason::BoundaryGround: return "BOUNDARY_GROUND";
  }
  return "?";
}

OracleVerdict oracle_label(const SegmentGrid& grid) {
  const ContentFeatures f = extract_features(grid);
  OracleVerdict v;
  auto flag = [&](bool violated, OracleReason reason) {
    if (violated) v.reasons.push_back(reason);
  };
  flag(f.max_gap_width > kMaxGapWidth, OracleReason::MaxGap);
  flag(has_floating_enemy(grid), OracleReason::FloatingEnemy);
  flag(!pipes_intact(grid), OracleReason::PipeIntegrity);
  flag(f.density < kOracleMinDensity || f.density > kOracleMaxDensity, OracleReason::Density);
  flag(!reachable_left_to_right(grid), OracleReason::Unplayable);
  flag(f.elev_start == 0 || f.elev_end == 0, OracleReason::BoundaryGround);
  v.label = v.reasons.empty() ? Label::Accept : Label::Reject;
  return v;
}

ALSession::ALSession(std::shared_ptr<const Dataset> dataset, std::span<const int> medoid_ids,
                     const SessionOptions& options)
    : dataset_(std::move(dataset)), options_(options) {
  if (!dataset_ || dataset_->empty()) throw Error(ErrorCode::InvalidArgument, "empty dataset");
  if (options_.budget < 0) throw Error(ErrorCode::InvalidArgument, "budget must be >= 0");
  if (!(options_.holdout_frac >= 0.0 && options_.holdout_frac < 1.0))
    throw Error(ErrorCode::InvalidArgument, "holdout_frac must lie in [0,1)");
  for (std::size_t i = 0; i < dataset_->size(); ++i)
    if ((*dataset_)[i].id != static_cast<int>(i))
      throw Error(ErrorCode::InvalidArgument, "dataset ids must be sequential from 0");

  const int n = static_cast<int>(dataset_->size());
  std::set<int> medoids;
  for (int id : medoid_ids) {
    if (id < 0 || id >= n) throw Error(ErrorCode::InvalidArgument, "medoid id out of range");
    if (!medoids.insert(id).second) throw Error(ErrorCode::InvalidArgument, "duplicate medoid id");
  }
  if (options_.strict && options_.budget < static_cast<int>(medoid_ids.size()))
    throw Error(ErrorCode::BudgetTooSmall, "budget " + std::to_string(options_.budget) +
                                               " is below the " + std::to_string(medoid_ids.size()) +
                                               " medoids");

  std::vector<int> candidates;
  for (int id = 0; id < n; ++id)
    if (!medoids.count(id)) candidates.push_back(id);
  const auto holdout_size = std::min<std::size_t>(
      candidates.size(), static_cast<std::size_t>(std::llround(options_.holdout_frac * n)));
  Rng rng(derive_seed(options_.seed, 0x686f6c646f7574ULL));
  for (std::size_t i = 0; i < holdout_size; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }
  holdout_.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(holdout_size));
  std::sort(holdout_.begin(), holdout_.end());
  for (int id : holdout_) holdout_labels_.push_back(oracle_label(record(id).grid).label);

  const std::set<int> held(holdout_.begin(), holdout_.end());
  for (int id = 0; id < n; ++id)
    if (!held.count(id)) pool_.insert(id);

  const auto seeds = std::min<std::size_t>(medoid_ids.size(), static_cast<std::size_t>(options_.budget));
  seed_queue_.assign(medoid_ids.begin(), medoid_ids.begin() + static_cast<std::ptrdiff_t>(seeds));
  model_.hyper = options_.hyper;
  refresh_metrics();
}

const DatasetRecord& ALSession::record(int id) const {
  if (id < 0 || id >= static_cast<int>(dataset_->size()))
    throw Error(ErrorCode::UnknownId, "no segment with id " + std::to_string(id));
  return (*dataset_)[static_cast<std::size_t>(id)];
}

int ALSession::next_query() const {
  if (queries_made_ >= options_.budget)
    throw Error(ErrorCode::BudgetExhausted, "budget of " + std::to_string(options_.budget) + " used");
  if (!seed_queue_.empty()) return seed_queue_.front();
  if (pool_.empty()) throw Error(ErrorCode::PoolEmpty, "no unlabeled segments left");
  int best = -1;
  double best_u = -std::numeric_limits<double>::infinity();
  for (int id : pool_) {
    const double u = uncertainty(model_, (*dataset_)[static_cast<std::size_t>(id)].features);
    if (u > best_u) {
      best_u = u;
      best = id;
    }
  }
  return best;
}

void ALSession::submit_label(int id, Label label) {
  record(id);
  if (labeled_.count(id))
    throw Error(ErrorCode::AlreadyLabeled, "segment " + std::to_string(id) + " is already labeled");
  if (!pool_.count(id))
    throw Error(ErrorCode::UnknownId, "segment " + std::to_string(id) + " is in the holdout");
  if (queries_made_ >= options_.budget)
    throw Error(ErrorCode::BudgetExhausted, "budget of " + std::to_string(options_.budget) + " used");

  pool_.erase(id);
  labeled_.emplace(id, label);
  std::erase(seed_queue_, id);
  history_.push_back({id, label});
  ++queries_made_;
  retrain();
  refresh_metrics();
}

void ALSession::seed_with(const std::function<Label(const DatasetRecord&)>& annotator) {
  while (!seed_queue_.empty() && queries_made_ < options_.budget) {
    const int id = seed_queue_.front();
    submit_label(id, annotator(record(id)));
  }
}

void ALSession::retrain() {
  std::vector<LabeledExample> examples;
  examples.reserve(labeled_.size());
  for (const auto& [id, label] : labeled_)
    examples.push_back({(*dataset_)[static_cast<std::size_t>(id)].features, label});
  const bool both = std::any_of(examples.begin(), examples.end(),
                                [](const auto& e) { return e.label == Label::Accept; }) &&
                    std::any_of(examples.begin(), examples.end(),
                                [](const auto& e) { return e.label == Label::Reject; });
  if (both) {
    model_ = train(examples, options_.hyper);
  } else {
    model_ = QualityModel::zero();
    model_.hyper = options_.hyper;
  }
}

void ALSession::refresh_metrics() {
  if (holdout_.empty()) {
    holdout_accuracy_.reset();
    return;
  }
  int agree = 0;
  for (std::size_t i = 0; i < holdout_.size(); ++i) {
    const bool accept = predict(model_, record(holdout_[i]).features) >= 0.5;
    agree += accept == (holdout_labels_[i] == Label::Accept);
  }
  holdout_accuracy_ = static_cast<double>(agree) / static_cast<double>(holdout_.size());
}

std::vector<LabeledRecord> ALSession::labeled_records(LabelSource source) const {
  std::vector<LabeledRecord> out;
  for (const auto& [id, label] : labeled_) out.push_back({record(id), label, source});
  return out;
}

namespace {

Label oracle_annotator(const DatasetRecord& rec) { return oracle_label(rec.grid).label; }

CurvePoint curve_point(const ALSession& s) {
  return {s.queries_made(), s.holdout_accuracy().value_or(std::numeric_limits<double>::quiet_NaN())};
}

}  // namespace

OracleRun run_with_oracle(std::shared_ptr<const Dataset> dataset, std::span<const int> medoid_ids,
                          const SessionOptions& options, QueryStrategy strategy) {
  ALSession session(std::move(dataset), medoid_ids, options);
  session.seed_with(oracle_annotator);
  OracleRun run;
  run.curve.push_back(curve_point(session));
  Rng rng(derive_seed(options.seed, 0x72616e646f6dULL));
  while (session.queries_made() < session.budget() && !session.pool().empty()) {
    int id = 0;
    if (strategy == QueryStrategy::Uncertainty) {
      id = session.next_query();
    } else {
      auto it = session.pool().begin();
      std::advance(it, static_cast<std::ptrdiff_t>(rng.below(session.pool().size())));
      id = *it;
    }
    session.submit_label(id, oracle_annotator(session.record(id)));
    run.curve.push_back(curve_point(session));
  }
  run.model = session.model();
  run.labels = session.history();
  run.labeled = session.labeled_records(LabelSource::Oracle);
  return run;
}

ALSession replay_labels(std::shared_ptr<const Dataset> dataset, std::span<const int> medoid_ids,
                        const SessionOptions& options, std::span<const LabelEvent> labels) {
  ALSession session(std::move(dataset), medoid_ids, options);
  for (const auto& ev : labels) session.submit_label(ev.id, ev.label);
  return session;
}

std::string curve_to_csv(std::span<const CurvePoint> curve) {
  std::string out = "queries,holdout_accuracy\n";
  for (const auto& p : curve) out += std::to_string(p.queries) + "," + format_double(p.holdout_accuracy) + "\n";
  return out;
}

}  // namespace cpforge
