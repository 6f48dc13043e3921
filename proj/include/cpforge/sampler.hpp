#pragma once

#include <cstdint>
#include <vector>

#include "cpforge/content_space.hpp"
#include "cpforge/rng.hpp"

namespace cpforge {

// Parameters of the randomized constructive segment generator.
struct SamplerParams {
  double gap_prob = 0.08;       // per-column chance to open a gap run
  int max_gap = 5;              // gap run length is uniform in [1, max_gap]
  double enemy_rate = 1.5;      // Poisson mean enemies per segment
  double coin_rate = 2.0;       // Poisson mean coins per segment
  double pipe_prob = 0.3;       // chance of one pipe per segment
  double platform_prob = 0.35;  // chance of one floating platform run
  double elev_step_prob = 0.25; // per-column chance of a +-1 elevation step
  int base_elev = 4;            // elevation of column 0
  std::uint64_t seed = 0;

  // Throws Error{InvalidArgument}.
  void validate() const;
};

// Chance that a placed enemy is deliberately misplaced over a pit.
inline constexpr double kFloatingEnemyProb = 0.1;
inline constexpr int kMinWalkElev = 1;
inline constexpr int kMaxWalkElev = 8;

// Builds one segment: ground elevation random walk, gap runs, an optional
// pipe and platform, then enemies and coins. The result is syntactically
// valid but is not guaranteed to be a good segment.
SegmentGrid sample_segment(const SamplerParams& params, Rng& rng);

struct DatasetRecord {
  int id = 0;
  SegmentGrid grid;
  ContentFeatures features;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

using Dataset = std::vector<DatasetRecord>;

// Record i is sampled from Rng(derive_seed(params.seed, i)), so any record can
// be regenerated independently of the others.
Dataset sample_dataset(int count, const SamplerParams& params);

SegmentGrid sample_segment_at(const SamplerParams& params, std::uint64_t stream);

}  // namespace cpforge
