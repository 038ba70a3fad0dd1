#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rmfs/wire/codec.hpp"

namespace rmfs::wire {

struct BadFrame {
  std::string line;
  std::string reason;
};
using FrameResult = std::variant<Message, BadFrame>;

// Splits a byte stream into LF-terminated frames and decodes each one. A bad
// frame is reported and skipped; the next line parses normally.
class FrameReader {
 public:
  static constexpr std::size_t kMaxLine = 1 << 20;

  void feed(std::string_view bytes) { buffer_.append(bytes); }
  // Next complete frame, if any.
  std::optional<FrameResult> next();
  std::size_t buffered() const { return buffer_.size() - pos_; }

 private:
  std::string buffer_;
  std::size_t pos_ = 0;
};

// Decodes every complete frame in `bytes`.
std::vector<FrameResult> split_frames(std::string_view bytes);

}  // namespace rmfs::wire
