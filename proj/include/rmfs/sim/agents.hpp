#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmfs/core/rng.hpp"
#include "rmfs/wire/messages.hpp"
#include "rmfs/world/world.hpp"

namespace rmfs {

class AgentDisconnected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Status replies a command produces: Go -> one WaypointTag per waypoint,
// Turn -> Orientation, Pickup/Setdown -> their success message, others none.
int expected_replies(const wire::TaskPayload& payload);

// Executes one task message stamped with the virtual clock and returns the
// stamped status replies. Throws AgentDisconnected when the robot is gone.
class RobotAgent {
 public:
  virtual ~RobotAgent() = default;
  virtual std::vector<wire::StatusMessage> execute(const wire::TaskMessage& command) = 0;
};

// Shows an info message to a station. Returns the stamped reply when it is
// known synchronously; nullopt means it arrives later via Engine::post.
class StationAgent {
 public:
  virtual ~StationAgent() = default;
  virtual std::optional<wire::StationReply> present(const wire::StationInfo& info) = 0;
};

struct RobotProfile {
  Kinematics kinematics;
  double spacing_m = 1.0;
  int heading = 0;  // initial, quarter turns
  double pickup_fault_rate = 0.0;
  std::uint64_t fault_seed = 0;
};

// Seed of a robot's pickup fault stream for a run seed.
std::uint64_t robot_fault_seed(std::uint64_t run_seed, RobotId robot);

// Kinematic robot model shared by the in-process agent and the wire
// emulator, so both produce identical timings.
class RobotEmulator {
 public:
  RobotEmulator(RobotId id, RobotProfile profile);

  std::vector<wire::StatusMessage> handle(const wire::TaskMessage& command);
  int heading() const { return heading_; }
  double clock() const { return clock_; }

 private:
  RobotId id_;
  RobotProfile profile_;
  int heading_;
  double clock_ = 0.0;
  Rng faults_;
};

// Answers after `t_pick_line`, following a verdict script ("ok",
// "error:<text>") and answering OK once the script runs out.
class StationEmulator {
 public:
  StationEmulator(StationId id, double t_pick_line, std::vector<std::string> script = {});

  wire::StationReply handle(const wire::StationInfo& info);

 private:
  StationId id_;
  double t_pick_line_;
  std::deque<std::string> script_;
};

class InProcessRobot : public RobotAgent {
 public:
  InProcessRobot(RobotId id, RobotProfile profile) : emulator_(id, profile) {}
  std::vector<wire::StatusMessage> execute(const wire::TaskMessage& command) override {
    return emulator_.handle(command);
  }

 private:
  RobotEmulator emulator_;
};

class InProcessStation : public StationAgent {
 public:
  InProcessStation(StationId id, double t_pick_line, std::vector<std::string> script = {})
      : emulator_(id, t_pick_line, std::move(script)) {}
  std::optional<wire::StationReply> present(const wire::StationInfo& info) override {
    return emulator_.handle(info);
  }

 private:
  StationEmulator emulator_;
};

}  // namespace rmfs
