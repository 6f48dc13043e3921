#include "cpforge/reachability.hpp"

#include <array>
#include <cstdlib>
#include <deque>

namespace cpforge {

bool is_standable(const SegmentGrid& grid, int row, int col) {
  if (!SegmentGrid::in_bounds(row, col) || row + 1 >= kRows) return false;
  return !is_solid(grid.at(row, col)) && is_solid(grid.at(row + 1, col));
}

bool can_move(const SegmentGrid& grid, int from_row, int from_col, int to_row, int to_col,
              const JumpModel& model) {
  const int span = std::abs(to_col - from_col);
  if (span < 1 || span > model.max_gap_cleared + 1) return false;
  if (from_row - to_row > model.max_rise) return false;
  if (!is_standable(grid, from_row, from_col) || !is_standable(grid, to_row, to_col)) return false;
  const int apex = std::min(from_row, to_row);
  const int step = to_col > from_col ? 1 : -1;
  for (int c = from_col + step; c != to_col; c += step)
    if (is_solid(grid.at(apex, c))) return false;
  return true;
}

bool reachable_left_to_right(const SegmentGrid& grid, const JumpModel& model) {
  std::array<bool, kCells> seen{};
  std::deque<int> frontier;
  for (int r = 0; r < kRows; ++r) {
    if (is_standable(grid, r, 0)) {
      seen[r * kCols] = true;
      frontier.push_back(r * kCols);
    }
  }
  const int reach = model.max_gap_cleared + 1;
  while (!frontier.empty()) {
    const int cell = frontier.front();
    frontier.pop_front();
    const int r = cell / kCols;
    const int c = cell % kCols;
    if (c == kCols - 1) return true;
    for (int nc = std::max(0, c - reach); nc <= std::min(kCols - 1, c + reach); ++nc) {
      for (int nr = std::max(0, r - model.max_rise); nr < kRows; ++nr) {
        const int next = nr * kCols + nc;
        if (seen[next] || !can_move(grid, r, c, nr, nc, model)) continue;
        seen[next] = true;
        frontier.push_back(next);
      }
    }
  }
  return false;
}

}  // namespace cpforge
