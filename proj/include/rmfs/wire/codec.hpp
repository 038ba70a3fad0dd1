#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "rmfs/wire/messages.hpp"

namespace rmfs::wire {

class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, std::string line) : std::runtime_error(what), line_(std::move(line)) {}
  const std::string& line() const { return line_; }

 private:
  std::string line_;
};

// One JSON object, keys in canonical order: type, robot_id/station_id, msg_id,
// payload fields, then the optional virtual time. No trailing newline.
std::string encode(const Message& m);
// encode(m) + '\n'.
std::string encode_frame(const Message& m);

// Strict: unknown types, missing or extra keys and wrong value types are
// rejected. A trailing CR or LF is ignored.
Message decode(std::string_view line);

}  // namespace rmfs::wire
