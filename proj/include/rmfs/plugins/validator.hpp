#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rmfs/plugins/plugins.hpp"

namespace rmfs {

// Independent feasibility checks run after every decision. Each returns a
// description of the first violation, or nullopt.

std::optional<std::string> check_station_assignment(StationKind expected, const StationLoad* station,
                                                    int already_assigned_this_pass);

std::optional<std::string> check_placements(const ReplenishmentBundle& bundle, const std::vector<Pod>& pods,
                                            const std::vector<Placement>& placements, bool allow_split);

std::optional<std::string> check_pps_task(const PpsTask& task, const std::vector<PpsRequest>& queue,
                                          const std::vector<PpsPod>& pods);

std::optional<std::string> check_storage_choice(const Layout& layout, WaypointId choice,
                                                const std::vector<WaypointId>& free_places);

std::optional<std::string> check_allocation(const TaAllocation& allocation, const std::vector<TaOpenTask>& tasks,
                                            const std::vector<TaRobot>& robots,
                                            const std::vector<WaypointId>& free_dwelling);

std::optional<std::string> check_path(const Layout& layout, const Kinematics& kinematics,
                                      const ReservationTable& table, const PlanRequest& request,
                                      const TimedPath& path);

}  // namespace rmfs
