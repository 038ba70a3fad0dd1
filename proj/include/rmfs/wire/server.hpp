#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "rmfs/gateway/order_gateway.hpp"
#include "rmfs/wire/framing.hpp"

namespace rmfs::wire {

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;
};
// "host:port"; throws ConfigError.
Endpoint parse_endpoint(const std::string& text);

// One transport-level peer. send() may be called from any thread.
class Connection {
 public:
  virtual ~Connection() = default;
  // Returns false once the peer is gone.
  virtual bool send(const std::string& frame) = 0;
  virtual void close() = 0;
  virtual std::string describe() const = 0;
};

struct HubOptions {
  double heartbeat_s = 5.0;
  int heartbeat_misses = 3;
  double call_timeout_s = 15.0;  // robot round trip before the robot counts as lost
  std::string wire_log;          // tee file for raw frames, empty = off
};

// Registration, routing and heartbeat for every connected agent, whatever
// the transport. Inbound frames from robots answer pending calls; station
// replies and feed messages go to the callbacks.
class Hub {
 public:
  explicit Hub(HubOptions options = {});
  ~Hub();
  Hub(const Hub&) = delete;
  Hub& operator=(const Hub&) = delete;

  // Set before any connection arrives.
  std::function<void(RobotId)> on_robot_lost;
  std::function<void(const StationReply&)> on_station_reply;  // only for stations in async mode
  std::function<void(FeedEvent)> on_feed;

  // Transport side. `preset` registers the peer without a Register frame.
  struct Peer;
  std::shared_ptr<Peer> attach(std::shared_ptr<Connection> connection, std::optional<Register> preset = std::nullopt);
  void on_bytes(const std::shared_ptr<Peer>& peer, std::string_view bytes);
  void on_frame_text(const std::shared_ptr<Peer>& peer, std::string_view line);
  void on_closed(const std::shared_ptr<Peer>& peer);

  // Engine side.
  bool robot_connected(RobotId robot) const;
  bool station_connected(StationId station) const;
  // Blocks until every listed agent registered or the deadline passed.
  bool wait_for(const std::set<RobotId>& robots, const std::set<StationId>& stations, double seconds) const;
  // Sends a task and collects `expected` status replies (fewer when an Error
  // arrives). Throws AgentDisconnected.
  std::vector<StatusMessage> call_robot(const TaskMessage& message, int expected);
  // Synchronous stations block here for their reply; nullopt when the
  // station is gone.
  void set_station_sync(StationId station, bool sync);
  bool send_station(const StationInfo& info);
  std::optional<StationReply> await_station(StationId station, long msg_id);
  void broadcast_feed(const Message& message);

  void start_heartbeat();
  void stop();

  long frames_in() const { return frames_in_; }
  long bad_frames() const { return bad_frames_; }

 private:
  void handle(const std::shared_ptr<Peer>& peer, Message message);
  void send_to(const std::shared_ptr<Peer>& peer, const Message& message);
  void tee(char direction, const Peer& peer, std::string_view frame);
  void drop(const std::shared_ptr<Peer>& peer);
  void heartbeat_loop();

  HubOptions options_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::map<RobotId, std::shared_ptr<Peer>> robots_;
  std::map<StationId, std::shared_ptr<Peer>> stations_;
  std::set<std::shared_ptr<Peer>> peers_;
  std::map<RobotId, std::deque<StatusMessage>> robot_inbox_;
  std::map<StationId, std::deque<StationReply>> station_inbox_;
  std::set<StationId> sync_stations_;
  std::mutex tee_mutex_;
  std::ofstream tee_;
  std::atomic<bool> stopping_{false};
  std::thread heartbeat_;
  std::atomic<long> frames_in_{0};
  std::atomic<long> bad_frames_{0};
  long next_ping_ = 1;
  long next_feed_msg_ = 1;
};

// Blocking TCP listener with one reader thread per connection.
class TcpServer {
 public:
  TcpServer(Hub& hub, const Endpoint& bind);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  int port() const { return port_; }
  void stop();

 private:
  void accept_loop();
  void serve(int fd, std::string peer_name);

  Hub& hub_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex threads_mutex_;
  std::vector<std::thread> readers_;
  std::set<int> open_fds_;
};

}  // namespace rmfs::wire
