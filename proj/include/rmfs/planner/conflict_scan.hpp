#pragma once

#include <string>
#include <vector>

#include "rmfs/planner/timed_path.hpp"
#include "rmfs/world/layout.hpp"

namespace rmfs {

struct ScanReport {
  long samples = 0;
  int vertex_conflicts = 0;
  int swap_conflicts = 0;
  int speed_violations = 0;
  int adjacency_violations = 0;
  std::vector<std::string> details;  // first few findings

  bool clean() const {
    return vertex_conflicts == 0 && swap_conflicts == 0 && speed_violations == 0 && adjacency_violations == 0;
  }
};

// Samples every robot's position at a fixed resolution up to `until` and
// reports robots sharing a waypoint or traversing one edge in opposite
// directions at the same instant. A robot's later path takes over at its
// start time; before its first path it sits on that path's start, after its
// last one on the final waypoint. Also checks adjacency and that no edge is crossed faster
// than v_max.
ScanReport scan_conflicts(const Layout& layout, const std::vector<TimedPath>& paths, double v_max, double until,
                          double resolution = 0.1);

}  // namespace rmfs
