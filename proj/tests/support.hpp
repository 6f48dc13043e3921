#pragma once

// Fixture builders and a cached default pipeline shared by the test suites.

#include <filesystem>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "cpforge/active_learning.hpp"
#include "cpforge/clustering.hpp"
#include "cpforge/content_space.hpp"
#include "cpforge/cp_pipeline.hpp"
#include "cpforge/quality_model.hpp"
#include "cpforge/rng.hpp"

namespace cpforge::test {

// Builds a grid from 14 literal rows.
inline SegmentGrid grid_of(std::initializer_list<const char*> rows) {
  std::vector<std::string> lines(rows.begin(), rows.end());
  return decode_rows(lines);
}

// Clears every tile in columns [c0, c1] (a pit).
inline void dig(SegmentGrid& g, int c0, int c1) {
  for (int c = c0; c <= c1; ++c)
    for (int r = 0; r < kRows; ++r) g.set(r, c, Tile::Air);
}

// Fills column c with ground up to `elev` tiles.
inline void raise(SegmentGrid& g, int c, int elev) {
  for (int r = 0; r < kRows; ++r) g.set(r, c, r >= kRows - elev ? Tile::Ground : Tile::Air);
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// The default run: 5,000 segments with seed 7, clusters over k in [4, 12],
// a 200-label oracle session with seed 7, and 1,000 CPs from that model.
struct DefaultPipeline {
  std::shared_ptr<const Dataset> dataset;
  ClusterResult clusters;
  OracleRun run;
  CPSet cps;
  GenerateStats cp_stats;
};

const DefaultPipeline& default_pipeline();

// Hand-built segments with the exact rule violations each must produce.
struct RuleFixture {
  std::string name;
  SegmentGrid grid;
  std::vector<RuleId> expected;
};
std::vector<RuleFixture> rule_fixtures();

// Left-to-right reachability by transitive closure over standable cells, with
// its own reading of the jump model.
bool reachable_by_closure(const SegmentGrid& g);

// Classifier fixtures: a separable rule (enemy_count >= 3), a noisy linear
// rule, and oracle labels on sampled segments.
ContentFeatures random_features(Rng& rng);
std::vector<LabeledExample> enemy_fixture(std::uint64_t seed);
std::vector<LabeledExample> noisy_fixture(std::uint64_t seed);
std::vector<LabeledExample> sampled_fixture();
LogisticObjective objective_for(const std::vector<LabeledExample>& examples, double l2);

// Worst relative error of the analytic gradient against central differences
// (h = 1e-5) at `points` random parameter vectors.
double worst_gradient_error(const LogisticObjective& objective, int points, std::uint64_t seed);

// Number of epochs whose loss exceeds the previous one.
int loss_increases(const std::vector<LabeledExample>& examples);

}  // namespace cpforge::test
