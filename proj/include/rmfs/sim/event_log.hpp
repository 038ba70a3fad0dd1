#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace rmfs {

// Tab-separated records: time (%.3f), seq, kind, payload. Lines can be kept
// in memory, streamed, or only hashed.
class EventLog {
 public:
  explicit EventLog(bool keep_lines = true) : keep_(keep_lines) {}

  void set_sink(std::ostream* sink) { sink_ = sink; }
  void record(double time, long seq, std::string_view kind, std::string_view payload);
  void abort_marker(double time, std::string_view reason);
  void flush();

  const std::vector<std::string>& lines() const { return lines_; }
  std::string text() const;
  std::uint64_t hash() const { return hash_; }
  long count() const { return count_; }

 private:
  bool keep_;
  std::ostream* sink_ = nullptr;
  std::vector<std::string> lines_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
  long count_ = 0;
};

}  // namespace rmfs
