#include "support.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>

namespace cpforge::test {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("cpforge-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

const DefaultPipeline& default_pipeline() {
  static const DefaultPipeline pipeline = [] {
    DefaultPipeline p;
    SamplerParams params;
    params.seed = 7;
    p.dataset = std::make_shared<const Dataset>(sample_dataset(5000, params));
    p.clusters = cluster_dataset(*p.dataset, 4, 12, 7);
    SessionOptions options;
    options.budget = 200;
    options.seed = 7;
    p.run = run_with_oracle(p.dataset, p.clusters.medoid_ids, options);
    SamplerParams cp_params;
    cp_params.seed = 8;
    const CPGeneration gen = generate_cps(p.run.model, 1000, cp_params, kDefaultTheta, 50000);
    p.cps = gen.set;
    p.cp_stats = gen.stats;
    return p;
  }();
  return pipeline;
}

namespace {

const char* const kPitRows[] = {
    "----------------", "----------------", "----------------", "----------------",
    "----------------", "----------------", "----------------", "----------------",
    "----------------", "----------------", "----------------", "-E---------E----",
    "XXXXX---XXXXXXXX", "XXXXX---XXXXXXXX",
};

SegmentGrid pit_with_enemies() { return decode_rows(std::vector<std::string>(std::begin(kPitRows), std::end(kPitRows))); }

}  // namespace

std::vector<RuleFixture> rule_fixtures() {
  using R = RuleId;
  std::vector<RuleFixture> out;
  auto add = [&](std::string name, SegmentGrid g, std::vector<RuleId> expected) {
    out.push_back({std::move(name), g, std::move(expected)});
  };
  const SegmentGrid flat = SegmentGrid::flat(2);

  add("flat", flat, {});
  add("pit with grounded enemies", pit_with_enemies(), {});
  SegmentGrid g = flat;
  g.set(10, 6, Tile::PipeTop);
  g.set(11, 6, Tile::PipeBody);
  add("intact pipe", g, {});
  g = flat;
  dig(g, 6, 9);
  add("4-wide gap", g, {});
  g = flat;
  raise(g, 8, 6);
  add("climbable wall", g, {});
  g = flat;
  g.set(11, 9, Tile::Coin);
  add("coin on the surface", g, {});

  g = flat;
  dig(g, 5, 9);
  g.set(10, 7, Tile::Platform);  // stepping stone keeps it playable
  add("5-wide gap with a stepping stone", g, {R::R1_MAX_GAP});
  g = flat;
  dig(g, 3, 8);
  add("6-wide gap", g, {R::R1_MAX_GAP, R::R5_UNREACHABLE});

  g = pit_with_enemies();
  g.set(11, 1, Tile::Air);
  g.set(11, 11, Tile::Air);
  g.set(10, 6, Tile::Enemy);
  add("enemy over a pit", g, {R::R2_FLOATING_ENEMY});
  g = flat;
  g.set(5, 9, Tile::Enemy);
  add("enemy in mid-air", g, {R::R2_FLOATING_ENEMY});

  g = flat;
  g.set(9, 4, Tile::PipeTop);
  add("pipe top without body", g, {R::R3_PIPE_INTEGRITY});
  g = flat;
  g.set(11, 6, Tile::PipeBody);
  add("orphan pipe body", g, {R::R3_PIPE_INTEGRITY});

  g = flat;
  dig(g, 0, 0);
  add("no ground in column 0", g, {R::R4_BOUNDARY_GROUND, R::R5_UNREACHABLE});
  g = flat;
  g.set(12, 15, Tile::Platform);
  g.set(13, 15, Tile::Air);
  add("platform instead of ground in column 15", g, {R::R4_BOUNDARY_GROUND});

  g = flat;
  raise(g, 8, 7);
  add("wall five tiles high", g, {R::R5_UNREACHABLE});
  g = flat;
  for (int c = 8; c < kCols; ++c) raise(g, c, 7);
  add("cliff five tiles high", g, {R::R5_UNREACHABLE});

  g = SegmentGrid::flat(3);
  g.set(13, 4, Tile::Coin);
  add("coin under two ground tiles", g, {R::R6_EMBEDDED_ITEM});
  g = flat;
  g.set(13, 9, Tile::Coin);
  add("coin under one ground tile", g, {R::R6_EMBEDDED_ITEM});
  return out;
}

namespace {

bool solid_at(const std::vector<std::string>& rows, int r, int c) {
  const char ch = rows[r][c];
  return ch == 'X' || ch == '#' || ch == 'T' || ch == '|';
}

}  // namespace

bool reachable_by_closure(const SegmentGrid& g) {
  const auto rows = segment_rows(g);
  std::vector<std::pair<int, int>> cells;
  for (int r = 0; r + 1 < kRows; ++r)
    for (int c = 0; c < kCols; ++c)
      if (!solid_at(rows, r, c) && solid_at(rows, r + 1, c)) cells.push_back({r, c});
  const std::size_t n = cells.size();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto [r, c] = cells[i];
      const auto [r2, c2] = cells[j];
      const int dc = std::abs(c2 - c);
      if (dc < 1 || dc > 5 || r - r2 > 4) continue;
      const int apex = std::min(r, r2);
      bool clear = true;
      for (int k = std::min(c, c2) + 1; k < std::max(c, c2); ++k) clear = clear && !solid_at(rows, apex, k);
      reach[i][j] = clear;
    }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n; ++j) reach[i][j] |= reach[k][j];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (cells[i].second == 0 && cells[j].second == kCols - 1 && reach[i][j]) return true;
  return false;
}

ContentFeatures random_features(Rng& rng) {
  ContentFeatures f;
  f.gap_count = rng.range(0, 4);
  f.max_gap_width = f.gap_count ? rng.range(1, 8) : 0;
  f.enemy_count = rng.range(0, 6);
  f.coin_count = rng.range(0, 6);
  f.platform_count = rng.range(0, 4);
  f.pipe_count = rng.range(0, 1);
  f.elev_start = rng.range(0, 8);
  f.elev_end = rng.range(0, 8);
  f.max_elev_step = rng.range(0, 3);
  f.density = rng.uniform() * 0.7;
  f.floating_count = rng.range(0, 5);
  return f;
}

std::vector<LabeledExample> enemy_fixture(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledExample> out;
  for (int i = 0; i < 200; ++i) {
    const ContentFeatures f = random_features(rng);
    out.push_back({f, f.enemy_count >= 3 ? Label::Accept : Label::Reject});
  }
  return out;
}

std::vector<LabeledExample> noisy_fixture(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledExample> out;
  for (int i = 0; i < 300; ++i) {
    const ContentFeatures f = random_features(rng);
    const double score = 0.8 * f.max_gap_width - 0.5 * f.coin_count + rng.uniform() * 4.0;
    out.push_back({f, score < 3.0 ? Label::Accept : Label::Reject});
  }
  return out;
}

std::vector<LabeledExample> sampled_fixture() {
  SamplerParams p;
  p.seed = 21;
  std::vector<LabeledExample> out;
  for (const auto& rec : sample_dataset(400, p)) out.push_back({rec.features, oracle_label(rec.grid).label});
  return out;
}

LogisticObjective objective_for(const std::vector<LabeledExample>& examples, double l2) {
  Points raw(0, kFeatureCount);
  std::vector<double> y;
  for (const auto& e : examples) {
    raw.push_back(e.features.to_vector());
    y.push_back(e.label == Label::Accept ? 1.0 : 0.0);
  }
  return LogisticObjective(Standardization::fit(raw).apply(raw), y, l2);
}

double worst_gradient_error(const LogisticObjective& objective, int points, std::uint64_t seed) {
  Rng rng(seed);
  constexpr double h = 1e-5;
  double worst = 0;
  for (int point = 0; point < points; ++point) {
    std::vector<double> w(LogisticObjective::kParamCount);
    for (auto& v : w) v = (rng.uniform() - 0.5) * 4.0;
    const auto g = objective.gradient(w);
    for (std::size_t j = 0; j < w.size(); ++j) {
      auto up = w, down = w;
      up[j] += h;
      down[j] -= h;
      const double numeric = (objective.loss(up) - objective.loss(down)) / (2 * h);
      const double diff = std::abs(numeric - g[j]);
      if (diff < 1e-9) continue;  // both effectively zero
      worst = std::max(worst, diff / std::max(std::abs(numeric), std::abs(g[j])));
    }
  }
  return worst;
}

int loss_increases(const std::vector<LabeledExample>& examples) {
  std::vector<double> history;
  train(examples, {}, &history);
  int increases = 0;
  for (std::size_t i = 1; i < history.size(); ++i) increases += history[i] > history[i - 1];
  return increases;
}

}  // namespace cpforge::test
