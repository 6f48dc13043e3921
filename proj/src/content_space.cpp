#include "cpforge/content_space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "cpforge/error.hpp"

namespace cpforge {

std::optional<Tile> tile_from_char(char c) {
  switch (c) {
    case '-': return Tile::Air;
    case 'X': return Tile::Ground;
    case '#': return Tile::Platform;
    case 'o': return Tile::Coin;
    case 'E': return Tile::Enemy;
    case 'T': return Tile::PipeTop;
    case '|': return Tile::PipeBody;
    default: return std::nullopt;
  }
}

SegmentGrid SegmentGrid::flat(int elevation) {
  SegmentGrid g;
  for (int r = kRows - elevation; r < kRows; ++r)
    for (int c = 0; c < kCols; ++c) g.set(r, c, Tile::Ground);
  return g;
}

std::vector<std::string> segment_rows(const SegmentGrid& grid) {
  std::vector<std::string> rows(kRows, std::string(kCols, '-'));
  for (int r = 0; r < kRows; ++r)
    for (int c = 0; c < kCols; ++c) rows[r][c] = to_char(grid.at(r, c));
  return rows;
}

std::string encode_segment(const SegmentGrid& grid) {
  std::string out;
  out.reserve(static_cast<std::size_t>(kRows * (kCols + 1)));
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c < kCols; ++c) out.push_back(to_char(grid.at(r, c)));
    out.push_back('\n');
  }
  return out;
}

SegmentGrid decode_rows(std::span<const std::string> rows) {
  if (rows.size() != static_cast<std::size_t>(kRows))
    throw Error(ErrorCode::WrongDimensions,
                "expected " + std::to_string(kRows) + " rows, got " + std::to_string(rows.size()));
  SegmentGrid g;
  for (int r = 0; r < kRows; ++r) {
    const std::string& line = rows[r];
    if (line.size() != static_cast<std::size_t>(kCols))
      throw Error(ErrorCode::WrongDimensions, "row " + std::to_string(r) + " has " +
                                                  std::to_string(line.size()) + " columns, expected " +
                                                  std::to_string(kCols));
    for (int c = 0; c < kCols; ++c) {
      auto t = tile_from_char(line[c]);
      if (!t)
        throw Error(ErrorCode::UnknownSymbol, "unknown symbol '" + std::string(1, line[c]) +
                                                  "' at (" + std::to_string(r) + "," +
                                                  std::to_string(c) + ")");
      g.set(r, c, *t);
    }
  }
  return g;
}

SegmentGrid decode_segment(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return decode_rows(lines);
}

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      "gap_count",  "max_gap_width", "enemy_count",   "coin_count", "platform_count", "pipe_count",
      "elev_start", "elev_end",      "max_elev_step", "density",    "floating_count"};
  return names;
}

std::array<double, kFeatureCount> ContentFeatures::to_vector() const {
  return {double(gap_count),    double(max_gap_width), double(enemy_count),
          double(coin_count),   double(platform_count), double(pipe_count),
          double(elev_start),   double(elev_end),      double(max_elev_step),
          density,              double(floating_count)};
}

ContentFeatures ContentFeatures::from_vector(std::span<const double> v) {
  if (v.size() != kFeatureCount)
    throw Error(ErrorCode::InvalidArgument, "feature vector must have 11 entries");
  auto i = [&](std::size_t k) { return static_cast<int>(std::lround(v[k])); };
  ContentFeatures f;
  f.gap_count = i(0);
  f.max_gap_width = i(1);
  f.enemy_count = i(2);
  f.coin_count = i(3);
  f.platform_count = i(4);
  f.pipe_count = i(5);
  f.elev_start = i(6);
  f.elev_end = i(7);
  f.max_elev_step = i(8);
  f.density = v[9];
  f.floating_count = i(10);
  return f;
}

int column_elevation(const SegmentGrid& grid, int col) {
  for (int r = 0; r < kRows; ++r)
    if (grid.at(r, col) == Tile::Ground) return kRows - r;
  return 0;
}

ContentFeatures extract_features(const SegmentGrid& grid) {
  ContentFeatures f;
  std::array<int, kCols> elev{};
  for (int c = 0; c < kCols; ++c) elev[c] = column_elevation(grid, c);

  int run = 0;
  for (int c = 0; c <= kCols; ++c) {
    if (c < kCols && elev[c] == 0) {
      ++run;
      continue;
    }
    if (run > 0) {
      ++f.gap_count;
      f.max_gap_width = std::max(f.max_gap_width, run);
      run = 0;
    }
  }

  f.elev_start = elev[0];
  f.elev_end = elev[kCols - 1];
  for (int c = 0; c + 1 < kCols; ++c)
    if (elev[c] > 0 && elev[c + 1] > 0)
      f.max_elev_step = std::max(f.max_elev_step, std::abs(elev[c + 1] - elev[c]));

  int filled = 0;
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c < kCols; ++c) {
      const Tile t = grid.at(r, c);
      if (t != Tile::Air) ++filled;
      switch (t) {
        case Tile::Enemy: ++f.enemy_count; break;
        case Tile::Coin: ++f.coin_count; break;
        case Tile::Platform: ++f.platform_count; break;
        case Tile::PipeTop: ++f.pipe_count; break;
        default: break;
      }
      if ((t == Tile::Platform || t == Tile::Coin) && r + 1 < kRows &&
          grid.at(r + 1, c) == Tile::Air)
        ++f.floating_count;
    }
  }
  f.density = static_cast<double>(filled) / kCells;
  return f;
}

double difficulty_score(const ContentFeatures& f, const DifficultyWeights& w) {
  const double raw = w.gap_count * f.gap_count + w.max_gap_width * f.max_gap_width +
                     w.enemy_count * f.enemy_count + w.max_elev_step * f.max_elev_step;
  return std::clamp(raw / w.normalizer, 0.0, 1.0);
}

int difficulty_bin(double d) {
  const int bin = static_cast<int>(std::floor(d * kDifficultyBins));
  return std::clamp(bin, 0, kDifficultyBins - 1);
}

namespace {

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorCode::InvalidArgument, "bad number '" + std::string(text) + "' in " +
                                                std::string(what));
  return v;
}

}  // namespace

Band parse_band(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorCode::InvalidArgument, "band must be lo:hi, got '" + std::string(text) + "'");
  Band b{parse_double(text.substr(0, colon), text), parse_double(text.substr(colon + 1), text)};
  if (!(b.lo <= b.hi))
    throw Error(ErrorCode::InvalidArgument, "band lo > hi in '" + std::string(text) + "'");
  return b;
}

std::string format_band(const Band& band) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g:%.17g", band.lo, band.hi);
  return buf;
}

void ControlParams::validate() const {
  for (const auto* b : {&enemy_density, &gap_frequency, &difficulty})
    if (*b && !((*b)->lo <= (*b)->hi))
      throw Error(ErrorCode::InvalidArgument, "control band has lo > hi");
}

}  // namespace cpforge
