#include "rmfs/sim/event_log.hpp"

#include <fmt/format.h>

#include "rmfs/core/rng.hpp"

namespace rmfs {

void EventLog::record(double time, long seq, std::string_view kind, std::string_view payload) {
  std::string line = fmt::format("{:.3f}\t{}\t{}\t{}\n", time, seq, kind, payload);
  hash_ = fnv1a64(line, hash_);
  ++count_;
  if (sink_) sink_->write(line.data(), static_cast<std::streamsize>(line.size()));
  if (keep_) {
    line.pop_back();
    lines_.push_back(std::move(line));
  }
}

void EventLog::abort_marker(double time, std::string_view reason) { record(time, -1, "ABORT", reason); }

void EventLog::flush() {
  if (sink_) sink_->flush();
}

std::string EventLog::text() const {
  std::string out;
  for (const std::string& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace rmfs
