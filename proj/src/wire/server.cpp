#include "rmfs/wire/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include <fmt/format.h>

#include "rmfs/core/error.hpp"
#include "rmfs/sim/agents.hpp"

namespace rmfs::wire {

namespace {

double steady_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

class TcpConnection : public Connection {
 public:
  TcpConnection(int fd, std::string name) : fd_(fd), name_(std::move(name)) {}

  bool send(const std::string& frame) override {
    std::lock_guard<std::mutex> lock(mutex_);
    if (closed_) return false;
    std::size_t sent = 0;
    while (sent < frame.size()) {
      const ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        closed_ = true;
        ::shutdown(fd_, SHUT_RDWR);
        return false;
      }
      sent += static_cast<std::size_t>(n);
    }
    return true;
  }

  void close() override {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!closed_) {
      closed_ = true;
      ::shutdown(fd_, SHUT_RDWR);
    }
  }

  std::string describe() const override { return name_; }

 private:
  int fd_;
  std::string name_;
  std::mutex mutex_;
  bool closed_ = false;
};

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) throw ConfigError(fmt::format("bind '{}': expected host:port", text));
  Endpoint e;
  e.host = text.substr(0, colon);
  try {
    std::size_t used = 0;
    e.port = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("bind '{}': bad port", text));
  }
  if (e.port < 0 || e.port > 65535) throw ConfigError(fmt::format("bind '{}': port out of range", text));
  return e;
}

struct Hub::Peer {
  std::shared_ptr<Connection> connection;
  std::optional<Register> reg;
  FrameReader reader;
  std::mutex read_mutex;
  std::atomic<double> last_inbound{0.0};
  std::atomic<bool> gone{false};

  std::string name() const {
    return reg ? fmt::format("{}:{}", to_string(reg->role), reg->id) : connection->describe();
  }
};

Hub::Hub(HubOptions options) : options_(std::move(options)) {
  if (!options_.wire_log.empty()) {
    tee_.open(options_.wire_log, std::ios::app);
    if (!tee_) throw ConfigError(fmt::format("cannot open wire log '{}'", options_.wire_log));
  }
}

Hub::~Hub() { stop(); }

void Hub::stop() {
  if (stopping_.exchange(true)) return;
  changed_.notify_all();
  if (heartbeat_.joinable()) heartbeat_.join();
  std::set<std::shared_ptr<Peer>> peers;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    peers = peers_;
  }
  for (const auto& p : peers) p->connection->close();
}

std::shared_ptr<Hub::Peer> Hub::attach(std::shared_ptr<Connection> connection, std::optional<Register> preset) {
  auto peer = std::make_shared<Peer>();
  peer->connection = std::move(connection);
  peer->last_inbound = steady_seconds();
  {
    std::lock_guard<std::mutex> lock(mutex_);
    peers_.insert(peer);
  }
  if (preset) handle(peer, *preset);
  return peer;
}

void Hub::tee(char direction, const Peer& peer, std::string_view frame) {
  if (!tee_.is_open()) return;
  std::lock_guard<std::mutex> lock(tee_mutex_);
  tee_ << direction << ' ' << peer.name() << ' ' << frame;
  if (frame.empty() || frame.back() != '\n') tee_ << '\n';
  tee_.flush();
}

void Hub::send_to(const std::shared_ptr<Peer>& peer, const Message& message) {
  const std::string frame = encode_frame(message);
  tee('>', *peer, frame);
  if (!peer->connection->send(frame)) peer->connection->close();
}

void Hub::on_bytes(const std::shared_ptr<Peer>& peer, std::string_view bytes) {
  std::vector<FrameResult> frames;
  {
    std::lock_guard<std::mutex> lock(peer->read_mutex);
    peer->reader.feed(bytes);
    while (auto f = peer->reader.next()) frames.push_back(std::move(*f));
  }
  peer->last_inbound = steady_seconds();
  for (FrameResult& f : frames) {
    if (auto* bad = std::get_if<BadFrame>(&f)) {
      ++bad_frames_;
      tee('<', *peer, bad->line);
      if (!peer->reg || peer->reg->role != Role::Robot) {
        const Role role = peer->reg ? peer->reg->role : Role::Station;
        send_to(peer, PeerError{role, peer->reg ? peer->reg->id : 0, 0, "bad frame: " + bad->reason});
      }
      continue;
    }
    ++frames_in_;
    Message m = std::get<Message>(std::move(f));
    tee('<', *peer, encode(m));
    handle(peer, std::move(m));
  }
}

void Hub::on_frame_text(const std::shared_ptr<Peer>& peer, std::string_view line) {
  std::string framed(line);
  if (framed.empty() || framed.back() != '\n') framed.push_back('\n');
  on_bytes(peer, framed);
}

void Hub::handle(const std::shared_ptr<Peer>& peer, Message message) {
  if (std::holds_alternative<Ping>(message)) {
    send_to(peer, Pong{std::get<Ping>(message).msg_id});
    return;
  }
  if (std::holds_alternative<Pong>(message)) return;

  if (auto* reg = std::get_if<Register>(&message)) {
    bool ok = !peer->reg;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (ok && reg->role == Role::Robot) {
        ok = !robots_.count(RobotId{reg->id});
        if (ok) {
          robots_[RobotId{reg->id}] = peer;
          robot_inbox_[RobotId{reg->id}].clear();
        }
      } else if (ok && reg->role == Role::Station) {
        ok = !stations_.count(StationId{reg->id});
        if (ok) {
          stations_[StationId{reg->id}] = peer;
          station_inbox_[StationId{reg->id}].clear();
        }
      }
      if (ok) peer->reg = *reg;
    }
    if (!ok) {
      send_to(peer, PeerError{reg->role, reg->id, reg->msg_id,
                              peer->reg ? "already registered" : "duplicate registration"});
      if (!peer->reg) peer->connection->close();
      return;
    }
    changed_.notify_all();
    send_to(peer, *reg);
    return;
  }

  if (!peer->reg) {
    send_to(peer, PeerError{Role::Station, 0, 0, "register first"});
    return;
  }
  const Register& who = *peer->reg;
  if (who.role == Role::Robot) {
    if (auto* s = std::get_if<StatusMessage>(&message); s && s->robot.value == who.id) {
      std::lock_guard<std::mutex> lock(mutex_);
      robot_inbox_[s->robot].push_back(*s);
      changed_.notify_all();
    }
    return;
  }
  if (who.role == Role::Station) {
    auto* r = std::get_if<StationReply>(&message);
    if (!r || r->station.value != who.id) {
      send_to(peer, PeerError{Role::Station, who.id, 0, "unexpected " + type_name(message)});
      return;
    }
    bool sync = false;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      sync = sync_stations_.count(r->station) > 0;
      if (sync) {
        station_inbox_[r->station].push_back(*r);
        changed_.notify_all();
      }
    }
    if (!sync && on_station_reply) on_station_reply(*r);
    return;
  }
  // Feed peers.
  if (auto* order = std::get_if<NewOrder>(&message)) {
    if (on_feed) on_feed(FeedEvent{0.0, order->order});
  } else if (auto* receipt = std::get_if<Receipt>(&message)) {
    if (on_feed) on_feed(FeedEvent{0.0, receipt->bundles});
  } else {
    send_to(peer, PeerError{Role::Feed, who.id, 0, "unexpected " + type_name(message)});
  }
}

void Hub::on_closed(const std::shared_ptr<Peer>& peer) { drop(peer); }

void Hub::drop(const std::shared_ptr<Peer>& peer) {
  if (peer->gone.exchange(true)) return;
  std::optional<RobotId> lost;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    peers_.erase(peer);
    if (peer->reg) {
      if (peer->reg->role == Role::Robot) {
        auto it = robots_.find(RobotId{peer->reg->id});
        if (it != robots_.end() && it->second == peer) {
          robots_.erase(it);
          lost = RobotId{peer->reg->id};
        }
      } else if (peer->reg->role == Role::Station) {
        auto it = stations_.find(StationId{peer->reg->id});
        if (it != stations_.end() && it->second == peer) stations_.erase(it);
      }
    }
  }
  peer->connection->close();
  changed_.notify_all();
  if (lost && on_robot_lost && !stopping_) on_robot_lost(*lost);
}

bool Hub::robot_connected(RobotId robot) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return robots_.count(robot) > 0;
}

bool Hub::station_connected(StationId station) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return stations_.count(station) > 0;
}

bool Hub::wait_for(const std::set<RobotId>& robots, const std::set<StationId>& stations, double seconds) const {
  std::unique_lock<std::mutex> lock(mutex_);
  auto all = [&] {
    for (RobotId r : robots) {
      if (!robots_.count(r)) return false;
    }
    for (StationId s : stations) {
      if (!stations_.count(s)) return false;
    }
    return true;
  };
  return changed_.wait_for(lock, std::chrono::duration<double>(seconds), [&] { return all() || stopping_; }) && all();
}

std::vector<StatusMessage> Hub::call_robot(const TaskMessage& message, int expected) {
  std::shared_ptr<Peer> peer;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = robots_.find(message.robot);
    if (it == robots_.end()) throw AgentDisconnected(fmt::format("robot {} not connected", message.robot.value));
    peer = it->second;
  }
  send_to(peer, message);
  std::vector<StatusMessage> out;
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                             std::chrono::duration<double>(options_.call_timeout_s));
  std::unique_lock<std::mutex> lock(mutex_);
  while (true) {
    auto& inbox = robot_inbox_[message.robot];
    while (!inbox.empty()) {
      StatusMessage s = std::move(inbox.front());
      inbox.pop_front();
      if (s.msg_id != message.msg_id) continue;  // stale answer to an abandoned call
      const bool error = std::holds_alternative<Error>(s.payload);
      out.push_back(std::move(s));
      if (error) return out;
    }
    if (static_cast<int>(out.size()) >= expected) return out;
    if (peer->gone || stopping_) throw AgentDisconnected(fmt::format("robot {} disconnected", message.robot.value));
    if (changed_.wait_until(lock, deadline) == std::cv_status::timeout) {
      lock.unlock();
      peer->connection->close();
      throw AgentDisconnected(fmt::format("robot {} did not answer message {}", message.robot.value, message.msg_id));
    }
  }
}

void Hub::set_station_sync(StationId station, bool sync) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (sync) {
    sync_stations_.insert(station);
  } else {
    sync_stations_.erase(station);
  }
}

bool Hub::send_station(const StationInfo& info) {
  std::shared_ptr<Peer> peer;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = stations_.find(info.station);
    if (it == stations_.end()) return false;
    peer = it->second;
  }
  send_to(peer, info);
  return !peer->gone;
}

std::optional<StationReply> Hub::await_station(StationId station, long msg_id) {
  std::unique_lock<std::mutex> lock(mutex_);
  while (true) {
    auto& inbox = station_inbox_[station];
    while (!inbox.empty()) {
      StationReply r = std::move(inbox.front());
      inbox.pop_front();
      if (r.msg_id == msg_id) return r;
    }
    if (!stations_.count(station) || stopping_) return std::nullopt;
    changed_.wait(lock);
  }
}

void Hub::broadcast_feed(const Message& message) {
  std::vector<std::shared_ptr<Peer>> feeds;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& p : peers_) {
      if (p->reg && p->reg->role == Role::Feed) feeds.push_back(p);
    }
  }
  for (const auto& p : feeds) send_to(p, message);
}

void Hub::start_heartbeat() {
  if (heartbeat_.joinable()) return;
  heartbeat_ = std::thread([this] { heartbeat_loop(); });
}

void Hub::heartbeat_loop() {
  std::unique_lock<std::mutex> lock(mutex_);
  while (!stopping_) {
    changed_.wait_for(lock, std::chrono::duration<double>(options_.heartbeat_s), [&] { return stopping_.load(); });
    if (stopping_) break;
    std::vector<std::shared_ptr<Peer>> peers(peers_.begin(), peers_.end());
    const long ping = next_ping_++;
    lock.unlock();
    const double now = steady_seconds();
    for (const auto& p : peers) {
      if (now - p->last_inbound > options_.heartbeat_s * options_.heartbeat_misses) {
        p->connection->close();
        drop(p);
      } else {
        send_to(p, Ping{ping});
      }
    }
    lock.lock();
  }
}

TcpServer::TcpServer(Hub& hub, const Endpoint& bind) : hub_(hub) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(bind.host.c_str(), std::to_string(bind.port).c_str(), &hints, &res); rc != 0) {
    throw ConfigError(fmt::format("bind {}:{}: {}", bind.host, bind.port, gai_strerror(rc)));
  }
  listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  const int rc = ::bind(listen_fd_, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0 || ::listen(listen_fd_, 16) != 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    throw ConfigError(fmt::format("bind {}:{}: {}", bind.host, bind.port, err));
  }
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::stop() {
  if (stopping_.exchange(true)) return;
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> readers;
  {
    std::lock_guard<std::mutex> lock(threads_mutex_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    readers.swap(readers_);
  }
  for (std::thread& t : readers) t.join();
  ::close(listen_fd_);
}

void TcpServer::accept_loop() {
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    const int fd = ::accept(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    if (fd < 0) continue;
    const int yes = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
    char host[INET_ADDRSTRLEN] = {};
    ::inet_ntop(AF_INET, &addr.sin_addr, host, sizeof host);
    std::string name = fmt::format("{}:{}", host, ntohs(addr.sin_port));
    std::lock_guard<std::mutex> lock(threads_mutex_);
    open_fds_.insert(fd);
    readers_.emplace_back([this, fd, name] { serve(fd, name); });
  }
}

void TcpServer::serve(int fd, std::string peer_name) {
  auto connection = std::make_shared<TcpConnection>(fd, peer_name);
  auto peer = hub_.attach(connection);
  char buffer[4096];
  while (true) {
    const ssize_t n = ::recv(fd, buffer, sizeof buffer, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    hub_.on_bytes(peer, std::string_view(buffer, static_cast<std::size_t>(n)));
  }
  hub_.on_closed(peer);
  std::lock_guard<std::mutex> lock(threads_mutex_);
  open_fds_.erase(fd);
  ::close(fd);
}

}  // namespace rmfs::wire
