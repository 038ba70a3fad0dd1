#include "rmfs/planner/reservation_table.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace rmfs {

int quarter_turns_between(int from, int to) {
  const int d = ((to - from) % 4 + 4) % 4;
  return d == 3 ? -1 : d;
}

int turn_degrees(int from, int to) {
  const int q = quarter_turns_between(from, to);
  return q == 2 ? 180 : -90 * q;
}

std::string to_csv(const std::vector<TimedPath>& paths) {
  std::string out = "robot,waypoint,arrival,departure\n";
  for (const TimedPath& p : paths) {
    for (const PathStep& s : p.steps) {
      out += fmt::format("{},{},{:.6f},{:.6f}\n", p.robot.value, s.waypoint, s.arrival, s.departure);
    }
  }
  return out;
}

std::vector<Occupancy> path_occupancy(const TimedPath& path) {
  std::vector<Occupancy> out;
  const auto& steps = path.steps;
  if (steps.empty()) return out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double begin = i == 0 ? path.start_time : steps[i - 1].departure;
    const double end = i + 1 < steps.size() ? steps[i + 1].arrival : kForever;
    out.push_back(Occupancy{path.robot, steps[i].waypoint, -1, Interval{begin, end, path.robot}});
    if (i + 1 < steps.size()) {
      out.push_back(Occupancy{path.robot, steps[i].waypoint, steps[i + 1].waypoint,
                              Interval{steps[i].departure, steps[i + 1].arrival, path.robot}});
    }
  }
  return out;
}

std::vector<Occupancy> ReservationTable::conflicts(const TimedPath& path) const {
  std::vector<Occupancy> found;
  for (const Occupancy& occ : path_occupancy(path)) {
    if (occ.edge_to < 0) {
      for (const Interval& held : nodes_.at(occ.node)) {
        if (held.owner != path.robot && overlaps(held, occ.interval)) {
          found.push_back(Occupancy{held.owner, occ.node, -1, held});
        }
      }
      continue;
    }
    // Same-direction followers and head-on swaps on one edge.
    for (const auto& [from, to] : {std::pair{occ.node, occ.edge_to}, std::pair{occ.edge_to, occ.node}}) {
      auto it = edges_.find(edge_key(from, to));
      if (it == edges_.end()) continue;
      for (const Interval& held : it->second) {
        if (held.owner != path.robot && overlaps(held, occ.interval)) {
          found.push_back(Occupancy{held.owner, from, to, held});
        }
      }
    }
  }
  return found;
}

bool ReservationTable::reserve(const TimedPath& path) {
  if (path.steps.empty() || !conflicts(path).empty()) return false;
  cut(path.robot, path.start_time);
  for (const Occupancy& occ : path_occupancy(path)) insert(occ);
  return true;
}

void ReservationTable::release(RobotId robot, WaypointId node, double now) {
  cut(robot, now);
  insert(Occupancy{robot, node, -1, Interval{now, kForever, robot}});
}

void ReservationTable::erase(RobotId robot) {
  auto drop = [robot](std::vector<Interval>& v) {
    v.erase(std::remove_if(v.begin(), v.end(), [robot](const Interval& i) { return i.owner == robot; }), v.end());
  };
  for (auto& v : nodes_) drop(v);
  for (auto& [_, v] : edges_) drop(v);
}

void ReservationTable::cut(RobotId robot, double at) {
  auto trim = [robot, at](std::vector<Interval>& v) {
    std::vector<Interval> kept;
    kept.reserve(v.size());
    for (Interval i : v) {
      if (i.owner != robot) {
        kept.push_back(i);
      } else if (i.begin < at) {
        i.end = std::min(i.end, at);
        kept.push_back(i);
      }
    }
    v = std::move(kept);
  };
  for (auto& v : nodes_) trim(v);
  for (auto& [_, v] : edges_) trim(v);
}

void ReservationTable::insert(const Occupancy& occ) {
  std::vector<Interval>& v = occ.edge_to < 0 ? nodes_.at(occ.node) : edges_[edge_key(occ.node, occ.edge_to)];
  auto pos = std::upper_bound(v.begin(), v.end(), occ.interval.begin,
                              [](double b, const Interval& i) { return b < i.begin; });
  v.insert(pos, occ.interval);
}

std::vector<Interval> ReservationTable::safe_intervals(WaypointId node, RobotId robot, double from) const {
  std::vector<Interval> out;
  double cursor = -kForever;
  for (const Interval& held : nodes_.at(node)) {
    if (held.owner == robot) continue;
    if (held.begin > cursor && held.begin > from) out.push_back(Interval{cursor, held.begin, robot});
    cursor = std::max(cursor, held.end);
  }
  if (cursor < kForever) out.push_back(Interval{cursor, kForever, robot});
  return out;
}

bool ReservationTable::held_by_other_forever(WaypointId node, RobotId robot) const {
  for (const Interval& held : nodes_.at(node)) {
    if (held.owner != robot && held.end == kForever) return true;
  }
  return false;
}

std::optional<RobotId> ReservationTable::pinned_at(WaypointId node) const {
  for (const Interval& held : nodes_.at(node)) {
    if (held.end == kForever) return held.owner;
  }
  return std::nullopt;
}

void ReservationTable::prune(double t) {
  auto drop = [t](std::vector<Interval>& v) {
    v.erase(std::remove_if(v.begin(), v.end(), [t](const Interval& i) { return i.end < t; }), v.end());
  };
  for (auto& v : nodes_) drop(v);
  for (auto it = edges_.begin(); it != edges_.end();) {
    drop(it->second);
    it = it->second.empty() ? edges_.erase(it) : std::next(it);
  }
}

std::vector<Occupancy> ReservationTable::contents() const {
  std::vector<Occupancy> out;
  for (int n = 0; n < cells(); ++n) {
    for (const Interval& i : nodes_[n]) out.push_back(Occupancy{i.owner, n, -1, i});
  }
  for (const auto& [key, v] : edges_) {
    for (const Interval& i : v) {
      out.push_back(Occupancy{i.owner, static_cast<WaypointId>(key / cells()), static_cast<WaypointId>(key % cells()), i});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rmfs
