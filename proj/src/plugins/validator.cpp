#include "rmfs/plugins/validator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

namespace rmfs {

std::optional<std::string> check_station_assignment(StationKind expected, const StationLoad* station,
                                                    int already_assigned_this_pass) {
  if (!station) return "unknown station";
  if (station->kind != expected) return fmt::format("station {} has the wrong kind", station->id.value);
  if (station->assigned + already_assigned_this_pass >= station->slots) {
    return fmt::format("station {} has no free slot", station->id.value);
  }
  return std::nullopt;
}

std::optional<std::string> check_placements(const ReplenishmentBundle& bundle, const std::vector<Pod>& pods,
                                            const std::vector<Placement>& placements, bool allow_split) {
  if (placements.empty()) return "no placement";
  if (!allow_split && placements.size() > 1) return "bundle split across compartments";
  std::map<PodId, Pod> scratch;
  for (const Pod& p : pods) scratch.emplace(p.id, p);
  int total = 0;
  for (const Placement& pl : placements) {
    auto it = scratch.find(pl.pod);
    if (it == scratch.end()) return fmt::format("pod {} is not a candidate", pl.pod.value);
    Pod& pod = it->second;
    if (pl.compartment < 0 || pl.compartment >= static_cast<int>(pod.compartments.size())) {
      return fmt::format("pod {} has no compartment {}", pl.pod.value, pl.compartment);
    }
    Compartment& c = pod.compartments[pl.compartment];
    if (c.sku && *c.sku != bundle.sku) {
      return fmt::format("pod {} compartment {} holds {}", pl.pod.value, pl.compartment, *c.sku);
    }
    if (pl.quantity < 1 || c.count + pl.quantity > c.capacity) {
      return fmt::format("pod {} compartment {} cannot take {}", pl.pod.value, pl.compartment, pl.quantity);
    }
    c.sku = bundle.sku;
    c.count += pl.quantity;
    total += pl.quantity;
  }
  if (total != bundle.quantity) return fmt::format("placements hold {} of {}", total, bundle.quantity);
  return std::nullopt;
}

std::optional<std::string> check_pps_task(const PpsTask& task, const std::vector<PpsRequest>& queue,
                                          const std::vector<PpsPod>& pods) {
  auto pod = std::find_if(pods.begin(), pods.end(), [&](const PpsPod& p) { return p.id == task.pod; });
  if (pod == pods.end()) return fmt::format("pod {} is not available", task.pod.value);
  if (task.requests.empty()) return fmt::format("pod {} covers no request", task.pod.value);
  std::set<RequestId> seen;
  for (RequestId id : task.requests) {
    if (!seen.insert(id).second) return fmt::format("request {} listed twice", id.value);
    auto req = std::find_if(queue.begin(), queue.end(), [&](const PpsRequest& r) { return r.id == id; });
    if (req == queue.end()) return fmt::format("request {} is not queued", id.value);
    auto it = pod->available.find(req->sku);
    if (it == pod->available.end() || it->second <= 0) {
      return fmt::format("pod {} holds no {}", task.pod.value, req->sku);
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_storage_choice(const Layout& layout, WaypointId choice,
                                                const std::vector<WaypointId>& free_places) {
  if (!layout.is_waypoint(choice) || layout.kind(choice) != WaypointKind::Storage) {
    return fmt::format("{} is not a storage place", choice);
  }
  if (std::find(free_places.begin(), free_places.end(), choice) == free_places.end()) {
    return fmt::format("{} is not free", layout.describe(choice));
  }
  return std::nullopt;
}

std::optional<std::string> check_allocation(const TaAllocation& allocation, const std::vector<TaOpenTask>& tasks,
                                            const std::vector<TaRobot>& robots,
                                            const std::vector<WaypointId>& free_dwelling) {
  std::set<RobotId> used;
  std::set<TaskId> assigned;
  auto known_robot = [&](RobotId r) {
    return std::any_of(robots.begin(), robots.end(), [&](const TaRobot& x) { return x.id == r; });
  };
  for (const auto& [task, robot] : allocation.assignments) {
    if (!std::any_of(tasks.begin(), tasks.end(), [&](const TaOpenTask& t) { return t.id == task; })) {
      return fmt::format("task {} is not open", task.value);
    }
    if (!known_robot(robot)) return fmt::format("robot {} is not idle", robot.value);
    if (!used.insert(robot).second) return fmt::format("robot {} assigned twice", robot.value);
    if (!assigned.insert(task).second) return fmt::format("task {} assigned twice", task.value);
  }
  std::set<WaypointId> targets;
  for (const auto& [robot, target] : allocation.rests) {
    if (!known_robot(robot)) return fmt::format("robot {} is not idle", robot.value);
    if (!used.insert(robot).second) return fmt::format("robot {} has two tasks", robot.value);
    if (std::find(free_dwelling.begin(), free_dwelling.end(), target) == free_dwelling.end()) {
      return fmt::format("{} is not a free dwelling point", target);
    }
    if (!targets.insert(target).second) return fmt::format("dwelling point {} used twice", target);
  }
  return std::nullopt;
}

std::optional<std::string> check_path(const Layout& layout, const Kinematics& kinematics,
                                      const ReservationTable& table, const PlanRequest& request,
                                      const TimedPath& path) {
  constexpr double eps = 1e-9;
  if (path.steps.empty()) return "empty path";
  if (path.robot != request.robot) return "path for another robot";
  if (path.start() != request.start) return "path does not start at the robot";
  if (path.goal() != request.goal) return "path does not end at the goal";
  const double edge = kinematics.edge_time(layout.spacing_m());
  int heading = request.heading;
  double t = request.start_time;
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const PathStep& s = path.steps[i];
    if (s.arrival < t - eps || s.turn_start < s.arrival - eps || s.departure < s.turn_start - eps) {
      return fmt::format("times decrease at step {}", i);
    }
    if (i + 1 < path.steps.size()) {
      const PathStep& n = path.steps[i + 1];
      if (!layout.adjacent(s.waypoint, n.waypoint)) return fmt::format("step {} jumps", i);
      const int h = heading_between(layout, s.waypoint, n.waypoint);
      if (s.heading_after != h) return fmt::format("step {} leaves with the wrong heading", i);
      const double rot = kinematics.turn_time(quarter_turns_between(heading, h));
      if (s.departure - s.turn_start < rot - eps) return fmt::format("step {} turns too fast", i);
      if (n.arrival - s.departure < edge - eps) return fmt::format("edge after step {} exceeds v_max", i);
      heading = h;
    }
    t = s.departure;
  }
  if (!table.conflicts(path).empty()) return "path conflicts with reservations";
  return std::nullopt;
}

}  // namespace rmfs
