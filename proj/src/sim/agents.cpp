#include "rmfs/sim/agents.hpp"

#include <fmt/format.h>

#include "rmfs/core/error.hpp"

namespace rmfs {

int expected_replies(const wire::TaskPayload& payload) {
  if (const auto* go = std::get_if<wire::Go>(&payload)) return static_cast<int>(go->waypoints.size());
  if (std::holds_alternative<wire::Turn>(payload) || std::holds_alternative<wire::Pickup>(payload) ||
      std::holds_alternative<wire::Setdown>(payload)) {
    return 1;
  }
  return 0;
}

std::uint64_t robot_fault_seed(std::uint64_t run_seed, RobotId robot) {
  return RngStreams(run_seed).stream(fmt::format("robot.{}.faults", robot.value))();
}

RobotEmulator::RobotEmulator(RobotId id, RobotProfile profile)
    : id_(id), profile_(profile), heading_(profile.heading), faults_(profile.fault_seed) {}

std::vector<wire::StatusMessage> RobotEmulator::handle(const wire::TaskMessage& command) {
  if (command.robot != id_) {
    return {wire::StatusMessage{id_, command.msg_id,
                                wire::Error{fmt::format("message for robot {}", command.robot.value)}, command.time}};
  }
  double t = command.time.value_or(clock_);
  std::vector<wire::StatusMessage> out;
  auto emit = [&](wire::StatusPayload p) { out.push_back(wire::StatusMessage{id_, command.msg_id, std::move(p), t}); };
  if (const auto* go = std::get_if<wire::Go>(&command.payload)) {
    const double edge = profile_.kinematics.edge_time(profile_.spacing_m);
    for (WaypointId w : go->waypoints) {
      t = t + edge;
      emit(wire::WaypointTag{w});
    }
  } else if (const auto* turn = std::get_if<wire::Turn>(&command.payload)) {
    if (turn->degrees % 90 != 0) {
      emit(wire::Error{fmt::format("turn of {} degrees is not a multiple of 90", turn->degrees)});
      return out;
    }
    t = t + profile_.kinematics.turn_time_degrees(turn->degrees);
    heading_ = ((heading_ - turn->degrees / 90) % 4 + 4) % 4;
    emit(wire::Orientation{heading_radians(heading_)});
  } else if (std::holds_alternative<wire::Pickup>(command.payload)) {
    t = t + profile_.kinematics.t_pickup;
    bool ok = true;
    if (profile_.pickup_fault_rate > 0.0) {
      ok = std::uniform_real_distribution<double>(0.0, 1.0)(faults_) >= profile_.pickup_fault_rate;
    }
    emit(wire::PickupSuccess{ok});
  } else if (std::holds_alternative<wire::Setdown>(command.payload)) {
    t = t + profile_.kinematics.t_setdown;
    emit(wire::SetdownSuccess{true});
  }
  clock_ = t;
  return out;
}

StationEmulator::StationEmulator(StationId id, double t_pick_line, std::vector<std::string> script)
    : id_(id), t_pick_line_(t_pick_line), script_(script.begin(), script.end()) {
  for (const std::string& s : script_) {
    if (s != "ok" && s.rfind("error:", 0) != 0) {
      throw ConfigError(fmt::format("station {} script: verdict '{}' is neither ok nor error:<text>", id.value, s));
    }
  }
}

wire::StationReply StationEmulator::handle(const wire::StationInfo& info) {
  wire::StationReply r;
  r.station = id_;
  r.msg_id = info.msg_id;
  r.order = info.order;
  r.bundle = info.bundle;
  r.item = info.item;
  r.time = info.time.value_or(0.0) + t_pick_line_;
  if (!script_.empty()) {
    const std::string verdict = script_.front();
    script_.pop_front();
    if (verdict != "ok") {
      r.ok = false;
      r.error = verdict.substr(6);
    }
  }
  return r;
}

}  // namespace rmfs
