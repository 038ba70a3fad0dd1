#pragma once

#include <queue>
#include <string>
#include <vector>

namespace rmfs {

enum class EventKind {
  RobotArrived,
  RotationDone,
  LiftDone,
  OrderArrival,
  BundleReceipt,
  StationConfirm,
  DecisionDue,
  FeedPoll,
  Resume,  // a robot's planned wait at a node is over
};
std::string_view to_string(EventKind kind);

struct Event {
  double time = 0.0;
  long seq = 0;
  EventKind kind = EventKind::DecisionDue;
  int subject = -1;  // robot or station id, when relevant
  long token = 0;    // kind-specific handle (command generation, message id, ...)
  long value = 0;
};

// Min-queue on (time, seq); seq grows by one per schedule() starting at 1,
// so equal times pop in insertion order.
class EventQueue {
 public:
  // Throws PreconditionError when `time` lies before the current clock.
  long schedule(double time, EventKind kind, int subject = -1, long token = 0, long value = 0);
  Event pop();
  const Event& top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  double now() const { return now_; }
  long last_seq() const { return seq_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time > b.time || (a.time == b.time && a.seq > b.seq);
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  double now_ = 0.0;
  long seq_ = 0;
};

}  // namespace rmfs
