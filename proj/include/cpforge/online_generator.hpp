#pragma once

// Assembles complete levels from constructive primitives under control
// parameters, keeping adjacent segment boundaries compatible.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cpforge/cp_pipeline.hpp"

namespace cpforge {

inline constexpr int kMaxBoundaryStep = 2;
inline constexpr int kMaxBacktrack = 3;
inline constexpr int kMaxAssemblyAttempts = 1000;

// Every present band must contain its quantity: enemy_count / 16,
// gap_count, difficulty_score(f).
bool matches_control(const ContentFeatures& f, const ControlParams& control);

// |elev_end(a) - elev_start(b)| <= 2.
bool compatible(const SegmentGrid& a, const SegmentGrid& b);

struct LevelMetadata {
  std::uint64_t seed = 0;
  ControlParams control;
  std::string model_id;
  double theta = kDefaultTheta;
  std::vector<double> difficulty;      // per segment
  std::map<std::string, double> mean_features;

  friend bool operator==(const LevelMetadata&, const LevelMetadata&) = default;
};

struct Level {
  std::vector<SegmentGrid> segments;
  LevelMetadata meta;

  friend bool operator==(const Level&, const Level&) = default;
};

// Greedy left-to-right assembly over the control-matching CPs. Each segment
// is drawn uniformly from the candidates compatible with its predecessor.
// A dead end backtracks up to 3 positions; past that the assembly restarts
// from a fresh first segment. Throws Error{InsufficientCPs} when no CP
// matches the control and Error{AssemblyFailed} after 1000 segment picks.
Level generate_level(const CPSet& cps, int length, const ControlParams& control, std::uint64_t seed);

// Steers the sampler towards the control bands (enemy and gap rates).
SamplerParams sampler_for_control(const SamplerParams& base, const ControlParams& control);

// On-the-fly variant: generate-and-test a CP pool with the model, then
// assemble. The pool is doubled (up to 4 times) when assembly fails.
Level generate_level(const QualityModel& model, const SamplerParams& params, double theta,
                     int length, const ControlParams& control, std::uint64_t seed);

// Header "#cpforge-level 1", one JSON metadata line, then each segment as a
// "%% segment i" delimiter line followed by its 14 rows.
std::string level_to_text(const Level& level);
// Lenient: only the format is checked, not the level invariants.
Level level_from_text(const std::string& text);
void write_level(const Level& level, const std::string& path);
Level read_level(const std::string& path);

struct LevelIssue {
  int segment = 0;  // -1 for level-wide issues
  std::string what;
};

// Re-derives rule verdicts, boundary compatibility, metadata consistency and,
// when a model is given, CP membership (p >= theta and matching model id).
std::vector<LevelIssue> validate_level(const Level& level, const QualityModel* model = nullptr);

}  // namespace cpforge
