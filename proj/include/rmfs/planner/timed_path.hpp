#pragma once

#include <limits>
#include <string>
#include <vector>

#include "rmfs/core/ids.hpp"

namespace rmfs {

inline constexpr double kForever = std::numeric_limits<double>::infinity();

struct PathStep {
  WaypointId waypoint = -1;
  double arrival = 0.0;
  double departure = 0.0;   // == arrival on the last step
  double turn_start = 0.0;  // rotation before departure runs over [turn_start, departure]
  int heading_after = 0;    // heading once any rotation at this node is done
};

// Timed trip along adjacent waypoints. Waiting happens at nodes between
// arrival and turn_start.
struct TimedPath {
  RobotId robot;
  double start_time = 0.0;
  int start_heading = 0;
  std::vector<PathStep> steps;  // steps.front() is the start waypoint

  bool empty() const { return steps.size() <= 1; }
  std::size_t moves() const { return steps.empty() ? 0 : steps.size() - 1; }
  double end_time() const { return steps.empty() ? start_time : steps.back().arrival; }
  double total_duration() const { return end_time() - start_time; }
  WaypointId start() const { return steps.front().waypoint; }
  WaypointId goal() const { return steps.back().waypoint; }
};

// Signed quarter turns needed to go from `from` to `to` heading, in
// [-1, 2]; positive is counter-clockwise.
int quarter_turns_between(int from, int to);
// Turn message convention: positive degrees turn right (clockwise).
int turn_degrees(int from, int to);

// One CSV row per step: robot,waypoint,arrival,departure.
std::string to_csv(const std::vector<TimedPath>& paths);

}  // namespace rmfs
