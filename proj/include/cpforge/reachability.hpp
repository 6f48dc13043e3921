#pragma once

#include "cpforge/content_space.hpp"

namespace cpforge {

// Platformer jump model shared by the rule filter and the golden oracle.
//
// A standable cell (r, c) is a non-solid cell with a solid tile directly
// beneath it. From a standable cell the player may move to any other
// standable cell (r', c') with
//   1 <= |c' - c| <= max_gap_cleared + 1   (a jump clears up to 4 columns),
//   r - r' <= max_rise                     (climb at most 4 tiles; drops are free),
// provided every column strictly between c and c' is non-solid at the
// jump's apex row min(r, r').
struct JumpModel {
  int max_gap_cleared = 4;
  int max_rise = 4;
};

bool is_standable(const SegmentGrid& grid, int row, int col);

bool can_move(const SegmentGrid& grid, int from_row, int from_col, int to_row, int to_col,
              const JumpModel& model = {});

// True iff some standable cell in column 15 is reachable from some standable
// cell in column 0 (breadth-first search over the jump graph).
bool reachable_left_to_right(const SegmentGrid& grid, const JumpModel& model = {});

}  // namespace cpforge
