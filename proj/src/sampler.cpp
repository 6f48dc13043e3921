#include "cpforge/sampler.hpp"

#include <algorithm>
#include <array>
#include <vector>

#include "cpforge/error.hpp"

namespace cpforge {

void SamplerParams::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(ErrorCode::InvalidArgument, std::string(name) + " must lie in [0,1]");
  };
  prob(gap_prob, "gap_prob");
  prob(pipe_prob, "pipe_prob");
  prob(platform_prob, "platform_prob");
  prob(elev_step_prob, "elev_step_prob");
  if (max_gap < 1 || max_gap > 8) throw Error(ErrorCode::InvalidArgument, "max_gap must lie in [1,8]");
  if (base_elev < 1 || base_elev > 6)
    throw Error(ErrorCode::InvalidArgument, "base_elev must lie in [1,6]");
  if (!(enemy_rate >= 0.0) || !(coin_rate >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "enemy_rate and coin_rate must be >= 0");
}

namespace {

// Row of the first AIR cell above the ground surface of a column with the
// given elevation. For a gap column this is the bottom row.
int surface_row(int elev) { return kRows - 1 - elev; }

}  // namespace

SegmentGrid sample_segment(const SamplerParams& p, Rng& rng) {
  std::array<int, kCols> elev{};
  elev[0] = p.base_elev;
  for (int c = 1; c < kCols; ++c) {
    int e = elev[c - 1];
    if (rng.bernoulli(p.elev_step_prob)) e += rng.bernoulli(0.5) ? 1 : -1;
    elev[c] = std::clamp(e, kMinWalkElev, kMaxWalkElev);
  }

  // Gap runs stay inside the boundary columns so segments always join.
  std::array<bool, kCols> gap{};
  for (int c = 1; c < kCols - 1; ++c) {
    if (!rng.bernoulli(p.gap_prob)) continue;
    const int len = rng.range(1, p.max_gap);
    for (int k = 0; k < len && c + k < kCols - 1; ++k) gap[c + k] = true;
  }

  SegmentGrid g;
  for (int c = 0; c < kCols; ++c) {
    if (gap[c]) {
      elev[c] = 0;
      continue;
    }
    for (int r = kRows - elev[c]; r < kRows; ++r) g.set(r, c, Tile::Ground);
  }

  std::array<bool, kCols> pipe_col{};
  if (rng.bernoulli(p.pipe_prob)) {
    const int c = rng.range(1, kCols - 2);
    if (!gap[c]) {
      const int height = rng.range(1, 3);
      const int top = kRows - elev[c] - height;
      g.set(top, c, Tile::PipeTop);
      for (int r = top + 1; r < kRows - elev[c]; ++r) g.set(r, c, Tile::PipeBody);
      pipe_col[c] = true;
    }
  }

  if (rng.bernoulli(p.platform_prob)) {
    const int len = rng.range(2, 4);
    const int c0 = rng.range(0, kCols - len);
    const int lift = rng.range(1, 3);
    const int row = std::max(1, surface_row(std::max(elev[c0], 1)) - lift);
    for (int c = c0; c < c0 + len; ++c)
      if (g.at(row, c) == Tile::Air) g.set(row, c, Tile::Platform);
  }

  std::vector<int> pit;
  for (int c = 0; c < kCols; ++c)
    if (gap[c]) pit.push_back(c);

  // A defective enemy hangs over a pit, 1-3 rows above the bottom. Without a
  // pit there is nowhere to misplace it and it lands on the ground as usual.
  const int enemies = rng.poisson(p.enemy_rate);
  for (int i = 0; i < enemies; ++i) {
    const bool floating = rng.bernoulli(kFloatingEnemyProb);
    int c = rng.range(0, kCols - 1);
    if (floating && !pit.empty()) {
      c = pit[static_cast<std::size_t>(rng.below(pit.size()))];
      const int row = surface_row(1) - rng.range(0, 2);
      if (g.at(row, c) == Tile::Air) g.set(row, c, Tile::Enemy);
      continue;
    }
    if (gap[c] || pipe_col[c]) continue;
    const int row = surface_row(elev[c]);
    if (g.at(row, c) == Tile::Air) g.set(row, c, Tile::Enemy);
  }

  const int coins = rng.poisson(p.coin_rate);
  for (int i = 0; i < coins; ++i) {
    const int c = rng.range(0, kCols - 1);
    const int row = surface_row(std::max(elev[c], 1)) - rng.range(0, 3);
    if (row >= 0 && g.at(row, c) == Tile::Air) g.set(row, c, Tile::Coin);
  }
  return g;
}

SegmentGrid sample_segment_at(const SamplerParams& params, std::uint64_t stream) {
  Rng rng(derive_seed(params.seed, stream));
  return sample_segment(params, rng);
}

Dataset sample_dataset(int count, const SamplerParams& params) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
  params.validate();
  Dataset out;
  out.reserve(static_cast<std::size_t>(count));
  for (int id = 0; id < count; ++id) {
    SegmentGrid g = sample_segment_at(params, static_cast<std::uint64_t>(id));
    out.push_back({id, g, extract_features(g)});
  }
  return out;
}

}  // namespace cpforge
