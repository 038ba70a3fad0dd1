#include "rmfs/wire/client.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <stdexcept>

#include <fmt/format.h>

namespace rmfs::wire {

WireClient::WireClient(const Endpoint& endpoint) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(endpoint.host.c_str(), std::to_string(endpoint.port).c_str(), &hints, &res); rc != 0) {
    throw std::runtime_error(fmt::format("resolve {}:{}: {}", endpoint.host, endpoint.port, gai_strerror(rc)));
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const int rc = ::connect(fd_, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0) {
    ::close(fd_);
    throw std::runtime_error(fmt::format("connect {}:{} failed", endpoint.host, endpoint.port));
  }
  const int yes = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
}

WireClient::~WireClient() {
  close();
  ::close(fd_);
}

void WireClient::close() {
  if (!closed_) {
    closed_ = true;
    ::shutdown(fd_, SHUT_RDWR);
  }
}

bool WireClient::send_raw(const std::string& bytes) {
  std::lock_guard<std::mutex> lock(send_mutex_);
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

bool WireClient::send(const Message& message) { return send_raw(encode_frame(message)); }

std::optional<FrameResult> WireClient::receive(double timeout_s) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(timeout_s));
  while (true) {
    if (auto f = reader_.next()) return f;
    if (closed_) return std::nullopt;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
    if (left <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(left));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return std::nullopt;
    char buffer[4096];
    const ssize_t n = ::recv(fd_, buffer, sizeof buffer, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      closed_ = true;
      return reader_.next();
    }
    reader_.feed(std::string_view(buffer, static_cast<std::size_t>(n)));
  }
}

bool WireClient::register_as(Role role, int id, double timeout_s) {
  if (!send(Register{role, id, 0})) return false;
  while (auto f = receive(timeout_s)) {
    const auto* m = std::get_if<Message>(&*f);
    if (!m) continue;
    if (const auto* r = std::get_if<Register>(m); r && r->role == role && r->id == id) return true;
    if (std::holds_alternative<PeerError>(*m)) return false;
    if (const auto* s = std::get_if<StatusMessage>(m); s && std::holds_alternative<Error>(s->payload)) return false;
  }
  return false;
}

}  // namespace rmfs::wire
