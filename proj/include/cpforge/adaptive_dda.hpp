#pragma once

// Real-time difficulty adjustment: tabular Q-learning over difficulty bins,
// trained against parametric simulated players.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpforge/cp_pipeline.hpp"
#include "cpforge/rng.hpp"

namespace cpforge {

// Per-attempt success probability is sigmoid(steepness * (skill - d)).
struct PlayerSim {
  double skill = 0.5;
  double steepness = 5.0;
  int persistence = 3;  // attempts before giving up
};

struct PerformanceRecord {
  bool success = false;
  int attempts = 0;
  double perf = 0.0;  // 1/attempts on success, else 0
};

double success_probability(const PlayerSim& player, double difficulty);
PerformanceRecord simulate_play(const PlayerSim& player, double difficulty, Rng& rng);

inline constexpr double kTargetChallenge = 0.6;

// 1 - |perf - tau| / max(tau, 1 - tau).
double reward(double perf, double target = kTargetChallenge);

enum class DdaAction { Down = 0, Stay = 1, Up = 2 };
inline constexpr int kActionCount = 3;
inline constexpr int kPerfBuckets = 3;
inline constexpr int kStartBin = 2;
inline constexpr int kPerfWindow = 3;

struct DdaState {
  int bin = kStartBin;
  int bucket = 1;

  int index() const { return bin * kPerfBuckets + bucket; }
};

// floor(mean(recent) * 3) clamped to [0, 2]; an empty history maps to the
// middle bucket.
int perf_bucket(std::span<const double> recent);

int apply_action(int bin, DdaAction action);

struct QPolicyParams {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon_start = 0.2;
  double epsilon_decay = 0.995;
  double epsilon_floor = 0.01;
  // Q starts at the discounted value of serving a perfectly matched segment
  // forever: the best expected reward over per-attempt success rates (0.4534
  // at 3 retries) over 1 - gamma. Values below that lock onto the first action
  // tried, values far above it never settle within a few hundred episodes.
  double initial_q = 4.534;
  // Extra initial value on the action that steers recent performance towards
  // the target: Down in the low bucket, Stay in the middle, Up in the high one.
  double bucket_bias = 1.0;
};

class QPolicy {
 public:
  static constexpr int kStates = kDifficultyBins * kPerfBuckets;

  explicit QPolicy(const QPolicyParams& params = {});

  double q(DdaState s, DdaAction a) const { return table_[idx(s, a)]; }
  void set_q(DdaState s, DdaAction a, double v) { table_[idx(s, a)] = v; }
  double max_q(DdaState s) const;
  DdaAction greedy(DdaState s) const;  // ties -> Down < Stay < Up

  // Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))
  void update(DdaState s, DdaAction a, double r, DdaState next);

  double epsilon() const { return epsilon_; }
  void set_epsilon(double e) { epsilon_ = e; }
  void decay_epsilon();

  const QPolicyParams& params() const { return params_; }
  bool finite() const;

 private:
  static std::size_t idx(DdaState s, DdaAction a) {
    return static_cast<std::size_t>(s.index() * kActionCount + static_cast<int>(a));
  }

  QPolicyParams params_;
  double epsilon_;
  std::array<double, kStates * kActionCount> table_{};
};

// Epsilon-greedy action choice.
DdaAction dda_step(const QPolicy& policy, DdaState state, Rng& rng);

struct TraceRow {
  int episode = 0;
  int bin = 0;
  double difficulty = 0.0;
  double perf = 0.0;
  double reward = 0.0;
  double epsilon = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

using EpisodeTrace = std::vector<TraceRow>;

// Changes the simulated player's skill from episode `at_episode` on.
struct SkillChange {
  int at_episode = 0;
  double skill = 0.5;
};

// One segment per episode: serve a uniform CP from the current bin, simulate
// play, reward, Q-update of the previous (state, action), then choose and
// apply the next action. Starts in bin 2. Throws Error{BinEmpty} if any
// difficulty bin of the CP set has no members.
EpisodeTrace run_adaptive(const CPSet& cps, const PlayerSim& player, int episodes, std::uint64_t seed,
                          std::span<const SkillChange> schedule = {}, QPolicy* policy_out = nullptr,
                          const QPolicyParams& params = {});

// Mean served difficulty over the last `tail` rows; Error{TraceTooShort}.
double converged_difficulty(const EpisodeTrace& trace, int tail = 100);
double tail_mean_perf(const EpisodeTrace& trace, int tail = 100);
double tail_mean_bin(const EpisodeTrace& trace, int tail = 100);

// CSV with header "episode,bin,difficulty,perf,reward,epsilon".
std::string trace_to_csv(const EpisodeTrace& trace);
EpisodeTrace trace_from_csv(const std::string& text);
void write_trace(const EpisodeTrace& trace, const std::string& path);
EpisodeTrace read_trace(const std::string& path);

// {"episodes","tail","mean_difficulty","mean_perf","mean_bin","mean_reward"}
std::string trace_summary_json(const EpisodeTrace& trace, int tail = 100);

}  // namespace cpforge
