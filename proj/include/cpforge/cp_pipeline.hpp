#pragma once

// Rule filter -> learned classifier -> constructive primitives (CPs) binned
// by difficulty.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cpforge/error.hpp"
#include "cpforge/quality_model.hpp"
#include "cpforge/sampler.hpp"

namespace cpforge {

enum class RuleId {
  R1_MAX_GAP,
  R2_FLOATING_ENEMY,
  R3_PIPE_INTEGRITY,
  R4_BOUNDARY_GROUND,
  R5_UNREACHABLE,
  R6_EMBEDDED_ITEM,
};

std::string_view rule_name(RuleId id);

struct RuleVerdict {
  bool pass = true;
  std::vector<RuleId> violations;  // ascending rule order, no duplicates
};

inline constexpr int kMaxGapWidth = 4;

bool has_floating_enemy(const SegmentGrid& grid);
bool pipes_intact(const SegmentGrid& grid);
bool has_embedded_coin(const SegmentGrid& grid);

// Evaluates every rule (no short-circuit):
//   R1 max_gap_width <= 4
//   R2 every ENEMY rests on GROUND or PLATFORM
//   R3 every PIPE_TOP has PIPE_BODY down to GROUND; every PIPE_BODY hangs
//      from a PIPE_TOP or PIPE_BODY
//   R4 columns 0 and 15 contain GROUND
//   R5 left-to-right reachability under the jump model
//   R6 no COIN below the topmost GROUND tile of its column
RuleVerdict rule_filter(const SegmentGrid& grid);

inline constexpr double kDefaultTheta = 0.5;

bool is_cp(const QualityModel& model, const SegmentGrid& grid, double theta = kDefaultTheta);

struct ConstructivePrimitive {
  SegmentGrid grid;
  ContentFeatures features;
  double p = 0.0;  // classifier probability
  double d = 0.0;  // difficulty_score
  int bin = 0;     // difficulty_bin(d)

  friend bool operator==(const ConstructivePrimitive&, const ConstructivePrimitive&) = default;
};

inline constexpr int kCpSetVersion = 1;

struct CPSet {
  std::vector<ConstructivePrimitive> cps;
  std::string model_id;
  double theta = kDefaultTheta;
  std::uint64_t seed = 0;

  // Indices into cps, grouped by bin 0..4.
  std::vector<std::vector<std::size_t>> bins() const;

  friend bool operator==(const CPSet&, const CPSet&) = default;
};

ConstructivePrimitive make_cp(const QualityModel& model, const SegmentGrid& grid);

struct GenerateStats {
  int attempts = 0;
  int rule_evaluations = 0;
  int rule_rejections = 0;
  int classifier_evaluations = 0;
  int classifier_rejections = 0;
  int duplicates = 0;
  int kept = 0;

  double acceptance_rate() const { return attempts == 0 ? 0.0 : double(kept) / attempts; }
};

struct CPGeneration {
  CPSet set;
  GenerateStats stats;
};

// Raised by generate_cps when max_attempts runs out first; carries the
// partial result.
class YieldTooLowError : public Error {
 public:
  YieldTooLowError(CPGeneration partial, int target);
  const CPGeneration& partial() const { return partial_; }

 private:
  CPGeneration partial_;
};

// Generate-and-test. Attempt i samples sample_segment_at(params, i); the
// classifier only runs on segments that pass the rules. Exact duplicate grids
// are kept once.
CPGeneration generate_cps(const QualityModel& model, int target_count, const SamplerParams& params,
                          double theta, int max_attempts);

// Header line + one record per CP:
//   {"format":"cpforge-cpset","version":1,"model_id":..,"theta":..,"seed":..,"count":..}
//   {"grid":[..],"features":{..},"p":..,"d":..,"bin":..}
std::string cpset_to_text(const CPSet& set);
CPSet cpset_from_text(const std::string& text);
void write_cpset(const CPSet& set, const std::string& path);
CPSet read_cpset(const std::string& path);

}  // namespace cpforge
