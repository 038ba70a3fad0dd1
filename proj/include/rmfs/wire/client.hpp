#pragma once

#include <mutex>
#include <optional>
#include <string>

#include "rmfs/wire/framing.hpp"
#include "rmfs/wire/server.hpp"

namespace rmfs::wire {

// Blocking TCP client speaking newline-delimited frames.
class WireClient {
 public:
  // Throws std::runtime_error when the connection cannot be made.
  explicit WireClient(const Endpoint& endpoint);
  ~WireClient();
  WireClient(const WireClient&) = delete;
  WireClient& operator=(const WireClient&) = delete;

  bool send(const Message& message);
  bool send_raw(const std::string& bytes);
  // Waits up to `timeout_s` for the next frame; nullopt on timeout or close.
  std::optional<FrameResult> receive(double timeout_s);
  // Sends Register and waits for the echo. False when refused.
  bool register_as(Role role, int id, double timeout_s = 5.0);
  bool closed() const { return closed_; }
  void close();

 private:
  int fd_ = -1;
  bool closed_ = false;
  FrameReader reader_;
  std::mutex send_mutex_;
};

}  // namespace rmfs::wire
