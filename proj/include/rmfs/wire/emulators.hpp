#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "rmfs/sim/agents.hpp"
#include "rmfs/wire/client.hpp"
#include "rmfs/wire/server.hpp"

namespace rmfs::wire {

// Robot that connects over TCP, registers and answers task messages with
// the shared kinematic model, stamped in virtual time.
class EmulatedRobotClient {
 public:
  EmulatedRobotClient(const Endpoint& endpoint, RobotId id, RobotProfile profile);
  ~EmulatedRobotClient();
  // Registers and starts the answering thread. False when refused.
  bool start();
  void stop();
  long handled() const { return handled_; }

 private:
  void loop();

  WireClient client_;
  RobotId id_;
  RobotEmulator emulator_;
  std::atomic<bool> stopping_{false};
  std::atomic<long> handled_{0};
  std::thread thread_;
};

// Station that answers every info message after t_pick_line, following a
// verdict script.
class EmulatedStationClient {
 public:
  EmulatedStationClient(const Endpoint& endpoint, StationId id, double t_pick_line,
                        std::vector<std::string> script = {});
  ~EmulatedStationClient();
  bool start();
  void stop();
  long handled() const { return handled_; }

 private:
  void loop();

  WireClient client_;
  StationId id_;
  StationEmulator emulator_;
  std::atomic<bool> stopping_{false};
  std::atomic<long> handled_{0};
  std::thread thread_;
};

class RemoteRobotAgent : public RobotAgent {
 public:
  RemoteRobotAgent(Hub& hub, RobotId robot) : hub_(hub), robot_(robot) {}
  std::vector<StatusMessage> execute(const TaskMessage& command) override {
    return hub_.call_robot(command, expected_replies(command.payload));
  }

 private:
  Hub& hub_;
  RobotId robot_;
};

// Synchronous stations hold the virtual clock until they answer; async ones
// answer through Engine::post. Without a connection the fallback emulator,
// if any, answers instead.
class RemoteStationAgent : public StationAgent {
 public:
  RemoteStationAgent(Hub& hub, StationId station, bool sync, std::unique_ptr<StationEmulator> fallback);
  std::optional<StationReply> present(const StationInfo& info) override;

 private:
  Hub& hub_;
  StationId station_;
  bool sync_;
  std::unique_ptr<StationEmulator> fallback_;
};

}  // namespace rmfs::wire
