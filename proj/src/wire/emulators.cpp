#include "rmfs/wire/emulators.hpp"

namespace rmfs::wire {

EmulatedRobotClient::EmulatedRobotClient(const Endpoint& endpoint, RobotId id, RobotProfile profile)
    : client_(endpoint), id_(id), emulator_(id, profile) {}

EmulatedRobotClient::~EmulatedRobotClient() { stop(); }

bool EmulatedRobotClient::start() {
  if (!client_.register_as(Role::Robot, id_.value)) return false;
  thread_ = std::thread([this] { loop(); });
  return true;
}

void EmulatedRobotClient::stop() {
  stopping_ = true;
  if (thread_.joinable()) thread_.join();
  client_.close();
}

void EmulatedRobotClient::loop() {
  while (!stopping_ && !client_.closed()) {
    auto f = client_.receive(0.1);
    if (!f) continue;
    const auto* m = std::get_if<Message>(&*f);
    if (!m) continue;
    if (const auto* ping = std::get_if<Ping>(m)) {
      client_.send(Pong{ping->msg_id});
    } else if (const auto* task = std::get_if<TaskMessage>(m)) {
      // Counted before replying so a caller that saw the reply sees the count.
      const auto replies = emulator_.handle(*task);
      ++handled_;
      for (const StatusMessage& s : replies) client_.send(s);
    }
  }
}

EmulatedStationClient::EmulatedStationClient(const Endpoint& endpoint, StationId id, double t_pick_line,
                                             std::vector<std::string> script)
    : client_(endpoint), id_(id), emulator_(id, t_pick_line, std::move(script)) {}

EmulatedStationClient::~EmulatedStationClient() { stop(); }

bool EmulatedStationClient::start() {
  if (!client_.register_as(Role::Station, id_.value)) return false;
  thread_ = std::thread([this] { loop(); });
  return true;
}

void EmulatedStationClient::stop() {
  stopping_ = true;
  if (thread_.joinable()) thread_.join();
  client_.close();
}

void EmulatedStationClient::loop() {
  while (!stopping_ && !client_.closed()) {
    auto f = client_.receive(0.1);
    if (!f) continue;
    const auto* m = std::get_if<Message>(&*f);
    if (!m) continue;
    if (const auto* ping = std::get_if<Ping>(m)) {
      client_.send(Pong{ping->msg_id});
    } else if (const auto* info = std::get_if<StationInfo>(m)) {
      const StationReply reply = emulator_.handle(*info);
      ++handled_;
      client_.send(reply);
    }
  }
}

RemoteStationAgent::RemoteStationAgent(Hub& hub, StationId station, bool sync,
                                       std::unique_ptr<StationEmulator> fallback)
    : hub_(hub), station_(station), sync_(sync), fallback_(std::move(fallback)) {
  hub_.set_station_sync(station_, sync_);
}

std::optional<StationReply> RemoteStationAgent::present(const StationInfo& info) {
  if (hub_.send_station(info)) {
    if (!sync_) return std::nullopt;
    if (auto reply = hub_.await_station(station_, info.msg_id)) return reply;
  }
  if (fallback_) return fallback_->handle(info);
  return std::nullopt;
}

}  // namespace rmfs::wire
