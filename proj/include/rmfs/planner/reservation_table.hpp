#pragma once

#include <compare>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rmfs/planner/timed_path.hpp"

namespace rmfs {

struct Interval {
  double begin = 0.0;
  double end = kForever;  // half-open [begin, end)
  RobotId owner;
  bool operator==(const Interval&) const = default;
};

// Occupancy of one resource by one robot, used to expose and compare table
// contents. Edge resources use `edge_to >= 0`.
struct Occupancy {
  RobotId robot;
  WaypointId node = -1;
  WaypointId edge_to = -1;
  Interval interval;
  std::partial_ordering operator<=>(const Occupancy& o) const {
    if (auto c = robot <=> o.robot; c != 0) return c;
    if (auto c = node <=> o.node; c != 0) return c;
    if (auto c = edge_to <=> o.edge_to; c != 0) return c;
    if (auto c = interval.begin <=> o.interval.begin; c != 0) return c;
    return interval.end <=> o.interval.end;
  }
  bool operator==(const Occupancy& o) const { return (*this <=> o) == 0; }
};

// Node intervals a robot holds while executing `path`: it keeps a node from
// the moment it starts moving towards it until it reaches the next node, and
// the goal from its final departure onward.
std::vector<Occupancy> path_occupancy(const TimedPath& path);

// Per-waypoint disjoint occupied intervals and per-directed-edge traversal
// intervals. Intervals closer than kEps do not count as overlapping.
class ReservationTable {
 public:
  static constexpr double kEps = 1e-6;

  explicit ReservationTable(int cell_count) : nodes_(cell_count) {}

  // Rejects (returns false, table unchanged) when the path overlaps another
  // robot's interval. On success the robot's previous intervals are cut at
  // path.start_time and replaced by the path's occupancy.
  bool reserve(const TimedPath& path);

  // Drops everything `robot` holds from `now` on and pins it at `node`
  // indefinitely.
  void release(RobotId robot, WaypointId node, double now);

  // Removes a robot completely (disconnected hardware is handled by release).
  void erase(RobotId robot);

  std::vector<Occupancy> conflicts(const TimedPath& path) const;

  // Free gaps at `node` for `robot`, ignoring its own intervals, that end
  // after `from`. Sorted by begin.
  std::vector<Interval> safe_intervals(WaypointId node, RobotId robot, double from) const;

  // True when some other robot holds `node` at some point in [from, forever).
  bool held_by_other_forever(WaypointId node, RobotId robot) const;
  std::optional<RobotId> pinned_at(WaypointId node) const;

  // Drops intervals that ended before `t`.
  void prune(double t);

  std::vector<Occupancy> contents() const;
  const std::vector<Interval>& node_intervals(WaypointId node) const { return nodes_.at(node); }

 private:
  static bool overlaps(const Interval& a, const Interval& b) {
    return a.begin < b.end - kEps && b.begin < a.end - kEps;
  }
  void cut(RobotId robot, double at);
  void insert(const Occupancy& occ);

  std::vector<std::vector<Interval>> nodes_;
  std::unordered_map<long long, std::vector<Interval>> edges_;
  int cells() const { return static_cast<int>(nodes_.size()); }
  long long edge_key(WaypointId from, WaypointId to) const { return static_cast<long long>(from) * cells() + to; }
};

}  // namespace rmfs
