#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmfs/core/ids.hpp"
#include "rmfs/core/rng.hpp"
#include "rmfs/planner/planner.hpp"
#include "rmfs/world/layout.hpp"
#include "rmfs/world/world.hpp"

namespace rmfs {

// What a decision sees of a station.
struct StationLoad {
  StationId id;
  StationKind kind = StationKind::Pick;
  WaypointId waypoint = -1;
  int assigned = 0;  // orders (pick) or bundles (replenish) currently bound
  int slots = 4;     // maximum of `assigned`
  std::vector<SkuId> queued_skus;
  int free_slots() const { return slots - assigned; }
};

// ROA: bundles to replenishment stations.
class ReplenishmentAssigner {
 public:
  virtual ~ReplenishmentAssigner() = default;
  virtual std::vector<std::pair<BundleId, StationId>> assign(const std::vector<ReplenishmentBundle>& backlog,
                                                             std::vector<StationLoad> stations) = 0;
};

// POA: pick orders to pick stations.
class OrderAssigner {
 public:
  virtual ~OrderAssigner() = default;
  virtual std::vector<std::pair<OrderId, StationId>> assign(const std::vector<PickOrder>& backlog,
                                                            std::vector<StationLoad> stations) = 0;
};

struct Placement {
  PodId pod;
  int compartment = 0;
  int quantity = 0;
  bool operator==(const Placement&) const = default;
};

// RPS: pods (and compartments) to store a bundle in. `pods` already account
// for units promised to pending insertions. Empty result: no feasible pod.
class ReplenishPodSelector {
 public:
  virtual ~ReplenishPodSelector() = default;
  virtual std::vector<Placement> select(const ReplenishmentBundle& bundle, const std::vector<Pod>& pods,
                                        bool allow_split) = 0;
};

struct PpsRequest {
  RequestId id;
  SkuId sku;
  int quantity = 0;
};
struct PpsPod {
  PodId id;
  WaypointId place = -1;
  std::map<SkuId, int> available;  // units not promised to other requests
};
struct PpsTask {
  PodId pod;
  std::vector<RequestId> requests;
  bool operator==(const PpsTask&) const = default;
};

// PPS: pods to bring to one pick station for its queued extract requests.
class PodPicker {
 public:
  virtual ~PodPicker() = default;
  virtual std::vector<PpsTask> build(const Layout& layout, WaypointId station_waypoint,
                                     const std::vector<PpsRequest>& queue, const std::vector<PpsPod>& pods,
                                     int max_tasks) = 0;
};

// PR: storage place for a pod leaving a station. nullopt defers.
class StoragePolicy {
 public:
  virtual ~StoragePolicy() = default;
  virtual std::optional<WaypointId> choose(const Layout& layout, const Pod& pod, WaypointId station_waypoint,
                                           const std::vector<WaypointId>& free_places) = 0;
};

struct TaOpenTask {
  TaskId id;
  WaypointId start = -1;
};
struct TaRobot {
  RobotId id;
  WaypointId at = -1;
};
struct TaAllocation {
  std::vector<std::pair<TaskId, RobotId>> assignments;
  std::vector<std::pair<RobotId, WaypointId>> rests;
};

// TA: open tasks to idle robots; robots left without work go to dwelling
// points. Robots already on a dwelling point stay put.
class TaskAllocator {
 public:
  virtual ~TaskAllocator() = default;
  virtual TaAllocation allocate(const Layout& layout, const std::vector<TaOpenTask>& tasks,
                                const std::vector<TaRobot>& robots, const std::vector<WaypointId>& free_dwelling) = 0;
};

// PP: one robot's timed path against the reservations.
class PathPlanner {
 public:
  virtual ~PathPlanner() = default;
  virtual std::optional<TimedPath> plan(const Layout& layout, const Kinematics& kinematics,
                                        const ReservationTable& table, const PlanRequest& request) = 0;
};

struct PluginBinding {
  std::string roa = "fcfs-least-loaded";
  std::string poa = "fcfs";
  std::string rps = "max-capacity";
  std::string pps = "greedy-pile-on";
  std::string pr = "nearest";
  std::string ta = "nearest";
  std::string pp = "interval-astar";
  bool split_bundles = false;
  int order_slots = 4;
};

struct PluginSet {
  std::unique_ptr<ReplenishmentAssigner> roa;
  std::unique_ptr<OrderAssigner> poa;
  std::unique_ptr<ReplenishPodSelector> rps;
  std::unique_ptr<PodPicker> pps;
  std::unique_ptr<StoragePolicy> pr;
  std::unique_ptr<TaskAllocator> ta;
  std::unique_ptr<PathPlanner> pp;
};

// Registered policy names per slot, in registration order.
std::map<std::string, std::vector<std::string>> registered_policies();

// Throws ConfigError naming the slot and listing the registered names when
// a binding is unknown. Randomized policies draw from `streams`.
PluginSet make_plugins(const PluginBinding& binding, const RngStreams& streams);

// Reference policies, exposed for direct use in tests.
std::unique_ptr<ReplenishmentAssigner> make_fcfs_least_loaded_roa();
std::unique_ptr<OrderAssigner> make_fcfs_poa();
std::unique_ptr<OrderAssigner> make_common_lines_poa();
std::unique_ptr<ReplenishPodSelector> make_max_capacity_rps();
std::unique_ptr<PodPicker> make_greedy_pile_on_pps();
std::unique_ptr<StoragePolicy> make_random_pr(Rng rng);
std::unique_ptr<StoragePolicy> make_nearest_pr();
std::unique_ptr<StoragePolicy> make_fixed_pr();
std::unique_ptr<TaskAllocator> make_nearest_ta();
std::unique_ptr<PathPlanner> make_interval_astar_pp(PlannerOptions options = {});

// Room for `sku` in the best compartment of `pod`: the largest free space
// over compartments holding the sku or unassigned, 0 when none has room.
// Ties go to the lowest index. `compartment` receives the index, -1 if none.
int free_capacity_for(const Pod& pod, const SkuId& sku, int* compartment = nullptr);

}  // namespace rmfs
