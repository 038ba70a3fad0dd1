#pragma once

#include <stdexcept>
#include <string>

namespace rmfs {

// Invalid configuration or layout; the message names the offending key or waypoint.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition (programming error or bad input).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InventoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rmfs
