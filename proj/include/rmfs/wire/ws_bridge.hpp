#pragma once

#include <memory>

#include "rmfs/wire/server.hpp"

namespace rmfs::wire {

// WebSocket listener for station consoles. A connection to /station/{id}
// is registered as that station; each text message carries one JSON frame
// without the trailing newline.
class WsBridge {
 public:
  WsBridge(Hub& hub, const Endpoint& bind);
  ~WsBridge();
  WsBridge(const WsBridge&) = delete;
  WsBridge& operator=(const WsBridge&) = delete;

  int port() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rmfs::wire
