#include "rmfs/wire/framing.hpp"

namespace rmfs::wire {

std::optional<FrameResult> FrameReader::next() {
  while (true) {
    const std::size_t nl = buffer_.find('\n', pos_);
    if (nl == std::string::npos) {
      if (buffered() > kMaxLine) {
        BadFrame bad{buffer_.substr(pos_, 80), "frame exceeds maximum length"};
        buffer_.clear();
        pos_ = 0;
        return bad;
      }
      if (pos_ > 0) {
        buffer_.erase(0, pos_);
        pos_ = 0;
      }
      return std::nullopt;
    }
    std::string_view line(buffer_.data() + pos_, nl - pos_);
    pos_ = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    try {
      return FrameResult{decode(line)};
    } catch (const DecodeError& e) {
      return FrameResult{BadFrame{e.line(), e.what()}};
    }
  }
}

std::vector<FrameResult> split_frames(std::string_view bytes) {
  FrameReader reader;
  reader.feed(bytes);
  std::vector<FrameResult> out;
  while (auto f = reader.next()) out.push_back(std::move(*f));
  return out;
}

}  // namespace rmfs::wire
