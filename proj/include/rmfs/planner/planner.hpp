#pragma once

#include <cstddef>
#include <optional>

#include "rmfs/planner/reservation_table.hpp"
#include "rmfs/planner/timed_path.hpp"
#include "rmfs/world/layout.hpp"
#include "rmfs/world/world.hpp"

namespace rmfs {

struct PlanRequest {
  RobotId robot;
  WaypointId start = -1;
  int heading = 0;
  double start_time = 0.0;
  WaypointId goal = -1;
};

struct PlannerOptions {
  double horizon_s = 4.0 * 3600.0;   // latest arrival relative to start_time
  std::size_t max_expansions = 200000;
};

enum class LiftKind { Pickup, Setdown };

// Time-interval A* (safe-interval search) for one robot against the current
// reservations. Edges take spacing_m / v_max; rotating by theta costs
// t_full_turn * theta / 2pi at the node before departure; waiting is allowed
// anywhere inside a free interval. The goal must be free from arrival on.
// Returns nullopt when no such path exists within the search limits.
std::optional<TimedPath> plan_path(const Layout& layout, const Kinematics& kinematics, const ReservationTable& table,
                                   const PlanRequest& request, const PlannerOptions& options = {});

// Seconds the robot holds its node to lift or lower a pod.
double lift_dwell(const Kinematics& kinematics, LiftKind kind);

}  // namespace rmfs
