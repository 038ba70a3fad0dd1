#include "rmfs/sim/event_queue.hpp"

#include <fmt/format.h>

#include "rmfs/core/error.hpp"

namespace rmfs {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::RobotArrived: return "RobotArrived";
    case EventKind::RotationDone: return "RotationDone";
    case EventKind::LiftDone: return "LiftDone";
    case EventKind::OrderArrival: return "OrderArrival";
    case EventKind::BundleReceipt: return "BundleReceipt";
    case EventKind::StationConfirm: return "StationConfirm";
    case EventKind::DecisionDue: return "DecisionDue";
    case EventKind::FeedPoll: return "FeedPoll";
    case EventKind::Resume: return "Resume";
  }
  return "?";
}

long EventQueue::schedule(double time, EventKind kind, int subject, long token, long value) {
  if (!(time >= now_)) {
    throw PreconditionError(fmt::format("event {} at {} scheduled before the clock {}", to_string(kind), time, now_));
  }
  heap_.push(Event{time, ++seq_, kind, subject, token, value});
  return seq_;
}

Event EventQueue::pop() {
  if (heap_.empty()) throw PreconditionError("pop from an empty event queue");
  Event e = heap_.top();
  heap_.pop();
  now_ = e.time;
  return e;
}

}  // namespace rmfs
