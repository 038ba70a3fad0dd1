#pragma once

#include <cmath>
#include <random>
#include <string>

#include "rmfs/wire/messages.hpp"

namespace rmfs::testing {

// Structurally valid random messages, one generator per wire type name.
inline constexpr int kFuzzKinds = 22;

class MessageFuzzer {
 public:
  explicit MessageFuzzer(std::uint64_t seed) : rng_(seed) {}

  wire::Message make(int kind) {
    using namespace wire;
    if (kind < 7) {
      TaskMessage m{RobotId{id()}, msg_id(), Rest{}, maybe_time()};
      switch (kind) {
        case 0: {
          Go g;
          const int n = below(8);
          for (int i = 0; i < n; ++i) g.waypoints.push_back(below(1000));
          m.payload = g;
          break;
        }
        case 1: m.payload = Turn{90 * (below(9) - 4)}; break;
        case 2: m.payload = Rest{}; break;
        case 3: m.payload = Pickup{}; break;
        case 4: m.payload = Setdown{}; break;
        case 5: m.payload = GetItem{RequestId{id()}}; break;
        default: m.payload = PutItem{BundleId{id()}}; break;
      }
      return m;
    }
    if (kind < 12) {
      StatusMessage m{RobotId{id()}, msg_id(), Error{}, maybe_time()};
      switch (kind) {
        case 7: m.payload = Error{text()}; break;
        case 8: m.payload = WaypointTag{below(1000)}; break;
        case 9: m.payload = Orientation{real(-7.0, 7.0)}; break;
        case 10: m.payload = PickupSuccess{coin()}; break;
        default: m.payload = SetdownSuccess{coin()}; break;
      }
      return m;
    }
    switch (kind) {
      case 12:
      case 13: return info(kind == 12);
      case 14: {
        StationReply r;
        r.station = StationId{id()};
        r.msg_id = msg_id();
        r.ok = coin();
        if (!r.ok) r.error = text();
        if (coin()) r.order = OrderId{id()};
        if (coin()) r.bundle = BundleId{id()};
        r.item = text();
        r.time = maybe_time();
        return r;
      }
      case 15: return Register{role(true), id(), msg_id()};
      case 16: return PeerError{role(false), id(), msg_id(), text()};
      case 17: return Ping{msg_id()};
      case 18: return Pong{msg_id()};
      case 19: {
        NewOrder n{msg_id(), PickOrder{OrderId{id()}, {}}};
        const int lines = below(5);
        for (int i = 0; i < lines; ++i) n.order.lines.push_back(OrderLine{text(), 1 + below(50)});
        return n;
      }
      case 20: {
        Receipt r{msg_id(), {}};
        const int n = below(4);
        for (int i = 0; i < n; ++i) r.bundles.push_back(ReplenishmentBundle{BundleId{id()}, text(), 1 + below(50)});
        return r;
      }
      default: {
        TransferState t{msg_id(), TransferId{id()}, coin() ? "OutgoingPlanned" : "InternalReplenish",
                        coin() ? "Planned" : "Done", {}};
        const int n = below(4);
        for (int i = 0; i < n; ++i) t.moves.push_back(MoveState{text(), below(50), below(50)});
        return t;
      }
    }
  }

 private:
  wire::StationInfo info(bool picking) {
    using namespace wire;
    StationInfo m;
    m.kind = picking ? InfoKind::Picking : InfoKind::Replenish;
    m.station = StationId{id()};
    m.msg_id = msg_id();
    m.request = RequestId{id()};
    m.item = text();
    m.name = text();
    m.quantity = below(100);
    m.pod = PodId{id()};
    m.pod_rows = 1 + below(4);
    m.pod_cols = 1 + below(4);
    m.stock = StockLevels{below(20), below(20), below(20)};
    for (int r = 0; r < m.pod_rows; ++r) {
      for (int c = 0; c < m.pod_cols; ++c) m.compartments.push_back(CompartmentInfo{r, c, text(), below(20)});
    }
    auto ref = [&] { return CompartmentRef{below(m.pod_rows), below(m.pod_cols)}; };
    if (picking) {
      m.order = OrderId{id()};
      m.to_pick = ref();
    } else {
      m.bundle = BundleId{id()};
      ReplenishTarget t{ref(), {}};
      const int n = below(3);
      for (int i = 0; i < n; ++i) t.alternatives.push_back(ref());
      m.to_replenish = t;
    }
    m.time = maybe_time();
    return m;
  }

  int below(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  bool coin() { return rng_() & 1; }
  int id() { return below(100000); }
  long msg_id() { return static_cast<long>(rng_() % 1000000000ULL); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::optional<double> maybe_time() {
    if (coin()) return std::nullopt;
    return real(0.0, 1e6);
  }
  wire::Role role(bool any) {
    const int r = any ? below(3) : 1 + below(2);
    return static_cast<wire::Role>(r);
  }
  // Printable ASCII, JSON escapes and multi-byte UTF-8.
  std::string text() {
    static const char* const pieces[] = {"a", "Z", "7", " ", "\"", "\\", "/", "\n", "\t", "\xc3\xa9", "\xe2\x82\xac",
                                         "{", "}", ":", ","};
    std::string s;
    const int n = below(12);
    for (int i = 0; i < n; ++i) s += pieces[below(static_cast<int>(std::size(pieces)))];
    return s;
  }

  std::mt19937_64 rng_;
};

}  // namespace rmfs::testing
