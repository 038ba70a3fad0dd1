#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rmfs/core/ids.hpp"
#include "rmfs/world/layout.hpp"

namespace rmfs {

struct Compartment {
  int row = 0;
  int col = 0;
  std::optional<SkuId> sku;  // absent => count == 0
  int count = 0;
  int capacity = 10;

  int free() const { return capacity - count; }
  bool operator==(const Compartment&) const = default;
};

struct InStorage {
  WaypointId place = -1;
  bool operator==(const InStorage&) const = default;
};
struct CarriedBy {
  RobotId robot;
  bool operator==(const CarriedBy&) const = default;
};
struct AtStation {
  StationId station;
  bool operator==(const AtStation&) const = default;
};
using PodLocation = std::variant<InStorage, CarriedBy, AtStation>;

std::string describe(const PodLocation& location);

struct Pod {
  PodId id;
  int face_rows = 2;
  int face_cols = 3;
  std::vector<Compartment> compartments;  // row-major over the face
  PodLocation location;
  WaypointId home = -1;  // slot used by the `fixed` repositioning policy

  int total_units() const;
  int units_of(const SkuId& sku) const;
  int compartment_index(int row, int col) const { return row * face_cols + col; }
  bool operator==(const Pod&) const = default;
};

// Returns a copy of `pod` with compartment `index` changed by `delta`.
// Throws InventoryError (leaving the input untouched) on underflow, overflow
// or when adding to a compartment without a SKU.
Pod apply_inventory_delta(const Pod& pod, int index, int delta);

// Default pod face: 2x3 compartments of capacity 10.
Pod make_pod(PodId id, WaypointId place, int face_rows = 2, int face_cols = 3, int capacity = 10);

struct Kinematics {
  double v_max = 0.05;        // m/s
  double t_full_turn = 3.0;   // s for 360 degrees
  double t_pickup = 3.0;      // s
  double t_setdown = 3.0;     // s

  double edge_time(double spacing_m) const { return spacing_m / v_max; }
  double turn_time_degrees(double degrees) const;
  double turn_time(int quarter_turns) const { return turn_time_degrees(90.0 * quarter_turns); }
};

enum class RobotState { Idle, Moving, Turning, PickingUp, SettingDown, AtStation };
std::string_view to_string(RobotState state);

struct Robot {
  RobotId id;
  WaypointId waypoint = -1;
  int heading = 0;  // quarter turns, see heading_radians()
  std::optional<PodId> carrying;
  RobotState state = RobotState::Idle;
  bool available = true;  // false once a remote robot disconnected

  double orientation() const { return heading_radians(heading); }
};

struct OrderLine {
  SkuId sku;
  int quantity = 1;
  bool operator==(const OrderLine&) const = default;
};

struct PickOrder {
  OrderId id;
  std::vector<OrderLine> lines;
  bool operator==(const PickOrder&) const = default;
};

struct ReplenishmentBundle {
  BundleId id;
  SkuId sku;
  int quantity = 1;
  bool operator==(const ReplenishmentBundle&) const = default;
};

// Mutable warehouse state. Owned by the engine; plugins only ever see const
// references.
class World {
 public:
  World(Layout layout, Kinematics kinematics) : layout_(std::move(layout)), kinematics_(kinematics) {}

  const Layout& layout() const { return layout_; }
  const Kinematics& kinematics() const { return kinematics_; }

  void add_pod(Pod pod);
  void add_robot(Robot robot);

  const std::vector<Pod>& pods() const { return pods_; }
  const std::vector<Robot>& robots() const { return robots_; }
  Pod& pod(PodId id);
  const Pod& pod(PodId id) const;
  Robot& robot(RobotId id);
  const Robot& robot(RobotId id) const;

  std::optional<PodId> pod_stored_at(WaypointId place) const;

  // Applies a delta and books the units against the customer (negative) or
  // replenishment (positive) counters.
  void pick_units(PodId pod, int compartment, int quantity);
  void replenish_units(PodId pod, int compartment, int quantity);

  long picked_total(const SkuId& sku) const;
  long replenished_total(const SkuId& sku) const;
  long stock(const SkuId& sku) const;
  std::vector<SkuId> skus() const;

  // Conservation baseline: units in pods + picked - replenished per sku.
  std::map<SkuId, long> conservation_snapshot() const;
  // Empty when every structural invariant holds, else one line per violation.
  std::vector<std::string> check_invariants() const;

 private:
  Layout layout_;
  Kinematics kinematics_;
  std::vector<Pod> pods_;
  std::vector<Robot> robots_;
  std::map<SkuId, long> picked_;
  std::map<SkuId, long> replenished_;
};

}  // namespace rmfs
