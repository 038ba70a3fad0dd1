#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rmfs/core/ids.hpp"
#include "rmfs/world/world.hpp"

namespace rmfs::wire {

// Task messages, engine -> robot.
struct Go {
  std::vector<WaypointId> waypoints;
  bool operator==(const Go&) const = default;
};
struct Turn {
  int degrees = 0;  // positive turns right
  bool operator==(const Turn&) const = default;
};
struct Rest {
  bool operator==(const Rest&) const = default;
};
struct Pickup {
  bool operator==(const Pickup&) const = default;
};
struct Setdown {
  bool operator==(const Setdown&) const = default;
};
struct GetItem {
  RequestId request;
  bool operator==(const GetItem&) const = default;
};
struct PutItem {
  BundleId bundle;
  bool operator==(const PutItem&) const = default;
};
using TaskPayload = std::variant<Go, Turn, Rest, Pickup, Setdown, GetItem, PutItem>;

struct TaskMessage {
  RobotId robot;
  long msg_id = 0;
  TaskPayload payload;
  std::optional<double> time;  // virtual clock at which the command is issued
  bool operator==(const TaskMessage&) const = default;
};

// Status messages, robot -> engine.
struct Error {
  std::string text;
  bool operator==(const Error&) const = default;
};
struct WaypointTag {
  WaypointId waypoint = -1;
  bool operator==(const WaypointTag&) const = default;
};
struct Orientation {
  double radians = 0.0;
  bool operator==(const Orientation&) const = default;
};
struct PickupSuccess {
  bool ok = true;
  bool operator==(const PickupSuccess&) const = default;
};
struct SetdownSuccess {
  bool ok = true;
  bool operator==(const SetdownSuccess&) const = default;
};
using StatusPayload = std::variant<Error, WaypointTag, Orientation, PickupSuccess, SetdownSuccess>;

struct StatusMessage {
  RobotId robot;
  long msg_id = 0;
  StatusPayload payload;
  std::optional<double> time;  // virtual clock at which the status became true
  bool operator==(const StatusMessage&) const = default;
};

// Station information, engine -> station app.
struct CompartmentRef {
  int row = 0;
  int col = 0;
  bool operator==(const CompartmentRef&) const = default;
};
struct CompartmentInfo {
  int row = 0;
  int col = 0;
  std::string item;  // empty for an unassigned compartment
  int count = 0;
  bool operator==(const CompartmentInfo&) const = default;
};
struct StockLevels {
  int optimum = 0;
  int maximum = 0;
  int minimum = 0;
  bool operator==(const StockLevels&) const = default;
};
struct ReplenishTarget {
  CompartmentRef best;
  std::vector<CompartmentRef> alternatives;
  bool operator==(const ReplenishTarget&) const = default;
};

enum class InfoKind { Picking, Replenish };

struct StationInfo {
  InfoKind kind = InfoKind::Picking;
  StationId station;
  long msg_id = 0;
  std::optional<OrderId> order;    // Picking
  std::optional<BundleId> bundle;  // Replenish
  RequestId request;
  std::string item;
  std::string name;
  int quantity = 0;
  PodId pod;
  int pod_rows = 0;
  int pod_cols = 0;
  StockLevels stock;
  std::vector<CompartmentInfo> compartments;
  std::optional<CompartmentRef> to_pick;
  std::optional<ReplenishTarget> to_replenish;
  std::optional<double> time;
  bool operator==(const StationInfo&) const = default;
};

struct StationReply {
  StationId station;
  long msg_id = 0;  // echoes the info message
  bool ok = true;
  std::string error;  // verdict text when !ok
  std::optional<OrderId> order;
  std::optional<BundleId> bundle;
  std::string item;
  std::optional<double> time;
  bool operator==(const StationReply&) const = default;
};

// Connection control.
enum class Role { Robot, Station, Feed };
std::string_view to_string(Role role);

struct Register {
  Role role = Role::Robot;
  int id = 0;
  long msg_id = 0;
  bool operator==(const Register&) const = default;
};
// Error frame addressed to a station or feed connection (robots use StatusMessage).
struct PeerError {
  Role role = Role::Station;
  int id = 0;
  long msg_id = 0;
  std::string text;
  bool operator==(const PeerError&) const = default;
};
struct Ping {
  long msg_id = 0;
  bool operator==(const Ping&) const = default;
};
struct Pong {
  long msg_id = 0;
  bool operator==(const Pong&) const = default;
};

// Order feed.
struct NewOrder {
  long msg_id = 0;
  PickOrder order;
  bool operator==(const NewOrder&) const = default;
};
struct Receipt {
  long msg_id = 0;
  std::vector<ReplenishmentBundle> bundles;
  bool operator==(const Receipt&) const = default;
};
struct MoveState {
  std::string item;
  int quantity = 0;
  int done = 0;
  bool operator==(const MoveState&) const = default;
};
struct TransferState {
  long msg_id = 0;
  TransferId transfer;
  std::string kind;   // OutgoingPlanned | InternalReplenish
  std::string state;  // Planned | Done
  std::vector<MoveState> moves;
  bool operator==(const TransferState&) const = default;
};

using Message = std::variant<TaskMessage, StatusMessage, StationInfo, StationReply, Register, PeerError, Ping, Pong,
                             NewOrder, Receipt, TransferState>;

// Value of the "type" discriminator.
std::string type_name(const Message& m);

}  // namespace rmfs::wire
