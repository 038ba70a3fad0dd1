#include "rmfs/planner/planner.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <tuple>

namespace rmfs {
namespace {

struct SearchNode {
  WaypointId waypoint;
  int heading;
  double arrival;
  double interval_end;
  int parent;
  double parent_turn_start;  // when the parent started rotating towards us
  double parent_departure;
};

struct OpenEntry {
  double f;
  double g;
  long order;
  int node;
  bool operator>(const OpenEntry& o) const { return std::tie(f, g, order) > std::tie(o.f, o.g, o.order); }
};

}  // namespace

std::optional<TimedPath> plan_path(const Layout& layout, const Kinematics& kinematics, const ReservationTable& table,
                                   const PlanRequest& request, const PlannerOptions& options) {
  constexpr double eps = ReservationTable::kEps;
  const double edge_time = kinematics.edge_time(layout.spacing_m());

  if (!layout.is_waypoint(request.start) || !layout.is_waypoint(request.goal)) return std::nullopt;
  if (layout.distance(request.start, request.goal) == Layout::kUnreachable) return std::nullopt;
  // A goal another robot occupies indefinitely can never be the final node.
  if (table.held_by_other_forever(request.goal, request.robot)) return std::nullopt;

  std::map<WaypointId, std::vector<Interval>> interval_cache;
  auto intervals_at = [&](WaypointId w) -> const std::vector<Interval>& {
    auto it = interval_cache.find(w);
    if (it == interval_cache.end()) {
      it = interval_cache.emplace(w, table.safe_intervals(w, request.robot, request.start_time)).first;
    }
    return it->second;
  };

  const auto& start_intervals = intervals_at(request.start);
  auto start_it = std::find_if(start_intervals.begin(), start_intervals.end(), [&](const Interval& i) {
    return i.begin <= request.start_time + eps && i.end > request.start_time + eps;
  });
  if (start_it == start_intervals.end()) return std::nullopt;

  std::vector<SearchNode> nodes;
  std::map<std::tuple<WaypointId, int, double>, double> best;  // (waypoint, heading, interval begin) -> arrival
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
  long order = 0;

  auto heuristic = [&](WaypointId w) { return layout.distance(w, request.goal) * edge_time; };
  auto push = [&](SearchNode n, double interval_begin) {
    const auto key = std::make_tuple(n.waypoint, n.heading, interval_begin);
    auto it = best.find(key);
    if (it != best.end() && it->second <= n.arrival) return;
    best[key] = n.arrival;
    nodes.push_back(n);
    open.push(OpenEntry{n.arrival + heuristic(n.waypoint), n.arrival, order++, static_cast<int>(nodes.size()) - 1});
  };

  push(SearchNode{request.start, request.heading, request.start_time, start_it->end, -1, 0.0, 0.0}, start_it->begin);

  std::size_t expansions = 0;
  int found = -1;
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const SearchNode cur = nodes[top.node];
    if (cur.waypoint == request.goal && cur.interval_end == kForever) {
      found = top.node;
      break;
    }
    if (++expansions > options.max_expansions) break;

    for (WaypointId next : layout.neighbors(cur.waypoint)) {
      const int heading = heading_between(layout, cur.waypoint, next);
      const double rotation = kinematics.turn_time(quarter_turns_between(cur.heading, heading));
      for (const Interval& free : intervals_at(next)) {
        if (free.end <= cur.arrival) continue;
        // Wait, then rotate so the departure lands inside the free interval.
        const double turn_start = std::max(cur.arrival, free.begin - rotation);
        const double departure = turn_start + rotation;
        const double arrival = departure + edge_time;
        if (arrival > cur.interval_end + eps) break;  // our current node is needed by someone else
        if (arrival >= free.end - eps) continue;
        if (arrival - request.start_time > options.horizon_s) continue;
        push(SearchNode{next, heading, arrival, free.end, top.node, turn_start, departure}, free.begin);
      }
    }
  }
  if (found < 0) return std::nullopt;

  std::vector<int> chain;
  for (int i = found; i >= 0; i = nodes[i].parent) chain.push_back(i);
  std::reverse(chain.begin(), chain.end());

  TimedPath path;
  path.robot = request.robot;
  path.start_time = request.start_time;
  path.start_heading = request.heading;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const SearchNode& n = nodes[chain[k]];
    PathStep step;
    step.waypoint = n.waypoint;
    step.arrival = n.arrival;
    if (k + 1 < chain.size()) {
      const SearchNode& child = nodes[chain[k + 1]];
      step.departure = child.parent_departure;
      step.turn_start = child.parent_turn_start;
      step.heading_after = child.heading;
    } else {
      step.departure = n.arrival;
      step.turn_start = n.arrival;
      step.heading_after = n.heading;
    }
    path.steps.push_back(step);
  }
  return path;
}

double lift_dwell(const Kinematics& kinematics, LiftKind kind) {
  return kind == LiftKind::Pickup ? kinematics.t_pickup : kinematics.t_setdown;
}

}  // namespace rmfs
