#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rmfs/core/ids.hpp"
#include "rmfs/wire/messages.hpp"
#include "rmfs/world/world.hpp"

namespace rmfs {

enum class TransferKind { OutgoingPlanned, InternalReplenish };
enum class TransferStatus { Planned, Done };
std::string_view to_string(TransferKind kind);
std::string_view to_string(TransferStatus status);

struct Move {
  SkuId sku;
  int quantity = 0;
  int done = 0;
  std::optional<std::string> source;  // where the units came from, once known
  bool complete() const { return done >= quantity; }
  bool operator==(const Move&) const = default;
};

struct Transfer {
  TransferId id;
  TransferKind kind = TransferKind::OutgoingPlanned;
  std::vector<Move> moves;
  TransferStatus state = TransferStatus::Planned;
  std::optional<OrderId> order;   // OutgoingPlanned
  std::vector<BundleId> bundles;  // InternalReplenish, one per move
  bool operator==(const Transfer&) const = default;
};

struct FeedEvent {
  double time = 0.0;
  std::variant<PickOrder, std::vector<ReplenishmentBundle>> item;
};

// Work derived from a transfer: one extract request per order line, one
// insert request per bundle. `move` indexes the transfer's move list.
struct RequestSpec {
  enum class Kind { Extract, Insert } kind = Kind::Extract;
  TransferId transfer;
  int move = 0;
  SkuId sku;
  int quantity = 0;
  std::optional<OrderId> order;
  std::optional<BundleId> bundle;
};

// A station info message awaiting its reply.
struct Outstanding {
  StationId station;
  long msg_id = 0;
  RequestId request;
  TransferId transfer;
  int move = 0;
  PodId pod;
  int compartment = 0;
  int quantity = 0;
  bool pick = true;
};

enum class ReplyOutcome { Applied, Requeue, Ignored };

struct ReplyResult {
  ReplyOutcome outcome = ReplyOutcome::Ignored;
  std::optional<Outstanding> info;
  bool transfer_done = false;
  int before = 0;  // compartment count around the delta
  int after = 0;
};

// The next queued request at a station, as seen by the release check.
struct QueuedNeed {
  bool insert = false;
  SkuId sku;
  std::optional<PodId> bound_pod;  // inserts are bound to a pod
};

enum class ReleaseDecision { ReuseAtStation, Store };
std::string_view to_string(ReleaseDecision decision);

ReleaseDecision pod_release_check(const Pod& pod, const std::optional<QueuedNeed>& next);

// Feed ingestion, transfers and confirmation bookkeeping. Mutations of the
// world happen only through apply_station_reply.
class OrderGateway {
 public:
  void ingest(FeedEvent event) { feed_.push_back(std::move(event)); }
  // Transfers created from feed events not seen by an earlier poll.
  std::vector<Transfer> poll_feed();

  // Throws PreconditionError("no moves") for an empty transfer.
  std::vector<RequestSpec> transfer_to_requests(const Transfer& transfer) const;

  void expect_reply(const Outstanding& info);
  bool awaiting(StationId station) const;
  // OK applies the inventory delta and books the move; Error leaves all
  // state untouched and asks for a requeue; a reply that matches nothing
  // outstanding is ignored.
  ReplyResult apply_station_reply(const wire::StationReply& reply, World& world);

  const Transfer& transfer(TransferId id) const;
  const std::map<TransferId, Transfer>& transfers() const { return transfers_; }
  std::optional<TransferId> transfer_of(OrderId order) const;
  std::optional<TransferId> transfer_of(BundleId bundle) const;
  long done_units() const { return done_units_; }

 private:
  std::deque<FeedEvent> feed_;
  std::map<TransferId, Transfer> transfers_;
  std::map<OrderId, TransferId> by_order_;
  std::map<BundleId, TransferId> by_bundle_;
  std::map<StationId, Outstanding> outstanding_;
  int next_transfer_ = 1;
  long done_units_ = 0;
};

wire::TransferState transfer_state_message(const Transfer& transfer, long msg_id);

}  // namespace rmfs
