#include "cpforge/adaptive_dda.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

#include "cpforge/error.hpp"
#include "cpforge/io_util.hpp"
#include "json.hpp"

namespace cpforge {

double success_probability(const PlayerSim& player, double difficulty) {
  return 1.0 / (1.0 + std::exp(-player.steepness * (player.skill - difficulty)));
}

PerformanceRecord simulate_play(const PlayerSim& player, double difficulty, Rng& rng) {
  const double p = success_probability(player, difficulty);
  PerformanceRecord rec;
  const int limit = std::max(1, player.persistence);
  for (int attempt = 1; attempt <= limit; ++attempt) {
    rec.attempts = attempt;
    if (rng.bernoulli(p)) {
      rec.success = true;
      rec.perf = 1.0 / attempt;
      return rec;
    }
  }
  return rec;
}

double reward(double perf, double target) {
  return 1.0 - std::abs(perf - target) / std::max(target, 1.0 - target);
}

int perf_bucket(std::span<const double> recent) {
  if (recent.empty()) return 1;
  const double mean = std::accumulate(recent.begin(), recent.end(), 0.0) / static_cast<double>(recent.size());
  return std::clamp(static_cast<int>(std::floor(mean * kPerfBuckets)), 0, kPerfBuckets - 1);
}

int apply_action(int bin, DdaAction action) {
  return std::clamp(bin + static_cast<int>(action) - 1, 0, kDifficultyBins - 1);
}

QPolicy::QPolicy(const QPolicyParams& params) : params_(params), epsilon_(params.epsilon_start) {
  // Bucket 0 prefers Down, bucket 1 Stay and bucket 2 Up, so the preferred
  // action index equals the bucket.
  for (std::size_t i = 0; i < table_.size(); ++i) {
    const auto bucket = (i / kActionCount) % kPerfBuckets;
    const auto action = i % kActionCount;
    table_[i] = params.initial_q + (action == bucket ? params.bucket_bias : 0.0);
  }
}

double QPolicy::max_q(DdaState s) const {
  double best = q(s, DdaAction::Down);
  for (int a = 1; a < kActionCount; ++a) best = std::max(best, q(s, static_cast<DdaAction>(a)));
  return best;
}

DdaAction QPolicy::greedy(DdaState s) const {
  int best = 0;
  for (int a = 1; a < kActionCount; ++a)
    if (q(s, static_cast<DdaAction>(a)) > q(s, static_cast<DdaAction>(best))) best = a;
  return static_cast<DdaAction>(best);
}

void QPolicy::update(DdaState s, DdaAction a, double r, DdaState next) {
  double& cell = table_[idx(s, a)];
  cell += params_.alpha * (r + params_.gamma * max_q(next) - cell);
}

void QPolicy::decay_epsilon() {
  epsilon_ = std::max(params_.epsilon_floor, epsilon_ * params_.epsilon_decay);
}

bool QPolicy::finite() const {
  return std::all_of(table_.begin(), table_.end(), [](double v) { return std::isfinite(v); });
}

DdaAction dda_step(const QPolicy& policy, DdaState state, Rng& rng) {
  if (rng.bernoulli(policy.epsilon()))
    return static_cast<DdaAction>(rng.below(kActionCount));
  return policy.greedy(state);
}

EpisodeTrace run_adaptive(const CPSet& cps, const PlayerSim& player, int episodes, std::uint64_t seed,
                          std::span<const SkillChange> schedule, QPolicy* policy_out,
                          const QPolicyParams& params) {
  if (episodes < 1) throw Error(ErrorCode::InvalidArgument, "episodes must be >= 1");
  const auto bins = cps.bins();
  for (int b = 0; b < kDifficultyBins; ++b)
    if (bins[static_cast<std::size_t>(b)].empty())
      throw Error(ErrorCode::BinEmpty, "difficulty bin " + std::to_string(b) + " has no CPs");

  Rng serve_rng(derive_seed(seed, 1));
  Rng play_rng(derive_seed(seed, 2));
  Rng policy_rng(derive_seed(seed, 3));
  QPolicy policy(params);
  PlayerSim current = player;
  std::deque<double> recent;

  EpisodeTrace trace;
  trace.reserve(static_cast<std::size_t>(episodes));
  int bin = kStartBin;
  DdaState prev_state{};
  DdaAction prev_action = DdaAction::Stay;
  bool have_prev = false;

  for (int ep = 0; ep < episodes; ++ep) {
    for (const auto& change : schedule)
      if (change.at_episode == ep) current.skill = change.skill;

    const auto& members = bins[static_cast<std::size_t>(bin)];
    const auto& cp = cps.cps[members[static_cast<std::size_t>(serve_rng.below(members.size()))]];
    const PerformanceRecord rec = simulate_play(current, cp.d, play_rng);
    const double r = reward(rec.perf);

    recent.push_back(rec.perf);
    if (recent.size() > static_cast<std::size_t>(kPerfWindow)) recent.pop_front();
    const std::vector<double> window(recent.begin(), recent.end());
    const DdaState state{bin, perf_bucket(window)};

    if (have_prev) policy.update(prev_state, prev_action, r, state);

    trace.push_back({ep, bin, cp.d, rec.perf, r, policy.epsilon()});

    const DdaAction action = dda_step(policy, state, policy_rng);
    prev_state = state;
    prev_action = action;
    have_prev = true;
    bin = apply_action(bin, action);
    policy.decay_epsilon();
  }
  if (policy_out) *policy_out = policy;
  return trace;
}

namespace {

void require_tail(const EpisodeTrace& trace, int tail) {
  if (tail < 1) throw Error(ErrorCode::InvalidArgument, "tail must be >= 1");
  if (static_cast<int>(trace.size()) < tail)
    throw Error(ErrorCode::TraceTooShort, "trace has " + std::to_string(trace.size()) +
                                              " rows, tail needs " + std::to_string(tail));
}

template <typename Fn>
double tail_mean(const EpisodeTrace& trace, int tail, Fn&& field) {
  require_tail(trace, tail);
  double s = 0.0;
  for (auto it = trace.end() - tail; it != trace.end(); ++it) s += field(*it);
  return s / tail;
}

}  // namespace

double converged_difficulty(const EpisodeTrace& trace, int tail) {
  return tail_mean(trace, tail, [](const TraceRow& r) { return r.difficulty; });
}

double tail_mean_perf(const EpisodeTrace& trace, int tail) {
  return tail_mean(trace, tail, [](const TraceRow& r) { return r.perf; });
}

double tail_mean_bin(const EpisodeTrace& trace, int tail) {
  return tail_mean(trace, tail, [](const TraceRow& r) { return static_cast<double>(r.bin); });
}

std::string trace_to_csv(const EpisodeTrace& trace) {
  std::string out = "episode,bin,difficulty,perf,reward,epsilon\n";
  for (const auto& r : trace) {
    out += std::to_string(r.episode) + "," + std::to_string(r.bin) + "," + format_double(r.difficulty) +
           "," + format_double(r.perf) + "," + format_double(r.reward) + "," + format_double(r.epsilon) +
           "\n";
  }
  return out;
}

EpisodeTrace trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "episode,bin,difficulty,perf,reward,epsilon")
    throw Error(ErrorCode::ParseError, "trace: missing CSV header");
  EpisodeTrace trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6)
      throw Error(ErrorCode::ParseError, "trace line " + std::to_string(lineno) + ": expected 6 columns");
    try {
      trace.push_back({std::stoi(cells[0]), std::stoi(cells[1]), std::stod(cells[2]), std::stod(cells[3]),
                       std::stod(cells[4]), std::stod(cells[5])});
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "trace line " + std::to_string(lineno) + ": bad number");
    }
  }
  return trace;
}

void write_trace(const EpisodeTrace& trace, const std::string& path) { write_file(path, trace_to_csv(trace)); }

EpisodeTrace read_trace(const std::string& path) { return trace_from_csv(read_file(path)); }

std::string trace_summary_json(const EpisodeTrace& trace, int tail) {
  const int t = std::min<int>(tail, static_cast<int>(trace.size()));
  nlohmann::json j;
  j["episodes"] = trace.size();
  j["tail"] = t;
  j["mean_difficulty"] = converged_difficulty(trace, t);
  j["mean_perf"] = tail_mean_perf(trace, t);
  j["mean_bin"] = tail_mean_bin(trace, t);
  j["mean_reward"] = tail_mean(trace, t, [](const TraceRow& r) { return r.reward; });
  return j.dump() + "\n";
}

}  // namespace cpforge
