#pragma once

// Tile-grid segment representation, its text encoding, content features and
// the scalar difficulty score.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cpforge {

inline constexpr int kRows = 14;
inline constexpr int kCols = 16;
inline constexpr int kCells = kRows * kCols;

enum class Tile : char {
  Air = '-',
  Ground = 'X',
  Platform = '#',
  Coin = 'o',
  Enemy = 'E',
  PipeTop = 'T',
  PipeBody = '|',
};

std::optional<Tile> tile_from_char(char c);
inline char to_char(Tile t) { return static_cast<char>(t); }

// Tiles the player can stand on or collide with.
inline bool is_solid(Tile t) {
  return t == Tile::Ground || t == Tile::Platform || t == Tile::PipeTop || t == Tile::PipeBody;
}

// One fixed-size game segment. Row 0 is the top row.
class SegmentGrid {
 public:
  SegmentGrid() { cells_.fill(Tile::Air); }

  Tile at(int row, int col) const { return cells_[index(row, col)]; }
  void set(int row, int col, Tile t) { cells_[index(row, col)] = t; }

  static bool in_bounds(int row, int col) {
    return row >= 0 && row < kRows && col >= 0 && col < kCols;
  }

  // Flat ground `elevation` tiles high across all columns.
  static SegmentGrid flat(int elevation = 2);

  friend bool operator==(const SegmentGrid&, const SegmentGrid&) = default;

 private:
  static std::size_t index(int row, int col) {
    return static_cast<std::size_t>(row * kCols + col);
  }

  std::array<Tile, kCells> cells_;
};

// 14 lines of 16 symbols, each LF-terminated.
std::string encode_segment(const SegmentGrid& grid);
std::vector<std::string> segment_rows(const SegmentGrid& grid);

// Accepts exactly 14 lines of 16 symbols; a trailing LF after the last line
// is optional. Throws Error{WrongDimensions} or Error{UnknownSymbol}.
SegmentGrid decode_segment(std::string_view text);
SegmentGrid decode_rows(std::span<const std::string> rows);

inline constexpr std::size_t kFeatureCount = 11;

struct ContentFeatures {
  int gap_count = 0;
  int max_gap_width = 0;
  int enemy_count = 0;
  int coin_count = 0;
  int platform_count = 0;
  int pipe_count = 0;
  int elev_start = 0;
  int elev_end = 0;
  int max_elev_step = 0;
  double density = 0.0;
  int floating_count = 0;

  // Fixed order matching feature_names().
  std::array<double, kFeatureCount> to_vector() const;
  static ContentFeatures from_vector(std::span<const double> v);

  friend bool operator==(const ContentFeatures&, const ContentFeatures&) = default;
};

const std::array<std::string_view, kFeatureCount>& feature_names();

// Height of the topmost GROUND tile measured from the bottom (1 = bottom row),
// 0 when the column holds no GROUND.
int column_elevation(const SegmentGrid& grid, int col);

// Gap column: no GROUND anywhere in it. Floating structure: a PLATFORM or
// COIN tile with AIR directly beneath it (bottom-row tiles never float).
ContentFeatures extract_features(const SegmentGrid& grid);

struct DifficultyWeights {
  double gap_count = 1.0;
  double max_gap_width = 0.5;
  double enemy_count = 0.8;
  double max_elev_step = 0.3;
  // Rescaled from 12 so the default sampler fills all five bins.
  double normalizer = 7.0;
};

// clamp01(weighted sum / normalizer).
double difficulty_score(const ContentFeatures& f, const DifficultyWeights& w = {});

inline constexpr int kDifficultyBins = 5;

// floor(d * 5) clamped to [0, 4].
int difficulty_bin(double d);

struct Band {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  friend bool operator==(const Band&, const Band&) = default;
};

// Parses "lo:hi". Throws Error{InvalidArgument} on malformed text or lo > hi.
Band parse_band(std::string_view text);
std::string format_band(const Band& band);

// Optional per-feature target bands; an absent band leaves the quantity
// unconstrained.
struct ControlParams {
  std::optional<Band> enemy_density;  // enemies per column
  std::optional<Band> gap_frequency;  // gaps per segment
  std::optional<Band> difficulty;     // difficulty_score

  void validate() const;
  bool empty() const { return !enemy_density && !gap_frequency && !difficulty; }

  friend bool operator==(const ControlParams&, const ControlParams&) = default;
};

}  // namespace cpforge
