#include "rmfs/gateway/order_gateway.hpp"

#include <fmt/format.h>

#include "rmfs/core/error.hpp"

namespace rmfs {

std::string_view to_string(TransferKind kind) {
  return kind == TransferKind::OutgoingPlanned ? "OutgoingPlanned" : "InternalReplenish";
}

std::string_view to_string(TransferStatus status) { return status == TransferStatus::Planned ? "Planned" : "Done"; }

std::string_view to_string(ReleaseDecision decision) {
  return decision == ReleaseDecision::ReuseAtStation ? "ReuseAtStation" : "Store";
}

ReleaseDecision pod_release_check(const Pod& pod, const std::optional<QueuedNeed>& next) {
  if (!next) return ReleaseDecision::Store;
  if (next->insert) return next->bound_pod == pod.id ? ReleaseDecision::ReuseAtStation : ReleaseDecision::Store;
  return pod.units_of(next->sku) > 0 ? ReleaseDecision::ReuseAtStation : ReleaseDecision::Store;
}

std::vector<Transfer> OrderGateway::poll_feed() {
  std::vector<Transfer> created;
  while (!feed_.empty()) {
    FeedEvent event = std::move(feed_.front());
    feed_.pop_front();
    Transfer t;
    t.id = TransferId{next_transfer_};
    if (auto* order = std::get_if<PickOrder>(&event.item)) {
      if (by_order_.count(order->id)) throw PreconditionError(fmt::format("order {} fed twice", order->id.value));
      t.kind = TransferKind::OutgoingPlanned;
      t.order = order->id;
      for (const OrderLine& line : order->lines) t.moves.push_back(Move{line.sku, line.quantity, 0, std::nullopt});
      by_order_[order->id] = t.id;
    } else {
      const auto& bundles = std::get<std::vector<ReplenishmentBundle>>(event.item);
      t.kind = TransferKind::InternalReplenish;
      for (const ReplenishmentBundle& b : bundles) {
        if (by_bundle_.count(b.id)) throw PreconditionError(fmt::format("bundle {} fed twice", b.id.value));
        t.moves.push_back(Move{b.sku, b.quantity, 0, std::nullopt});
        t.bundles.push_back(b.id);
        by_bundle_[b.id] = t.id;
      }
    }
    ++next_transfer_;
    transfers_[t.id] = t;
    created.push_back(std::move(t));
  }
  return created;
}

std::vector<RequestSpec> OrderGateway::transfer_to_requests(const Transfer& transfer) const {
  if (transfer.moves.empty()) throw PreconditionError("no moves");
  std::vector<RequestSpec> out;
  for (std::size_t i = 0; i < transfer.moves.size(); ++i) {
    const Move& m = transfer.moves[i];
    RequestSpec spec;
    spec.transfer = transfer.id;
    spec.move = static_cast<int>(i);
    spec.sku = m.sku;
    spec.quantity = m.quantity - m.done;
    if (transfer.kind == TransferKind::OutgoingPlanned) {
      spec.kind = RequestSpec::Kind::Extract;
      spec.order = transfer.order;
    } else {
      spec.kind = RequestSpec::Kind::Insert;
      spec.bundle = transfer.bundles.at(i);
    }
    if (spec.quantity > 0) out.push_back(std::move(spec));
  }
  return out;
}

void OrderGateway::expect_reply(const Outstanding& info) {
  if (outstanding_.count(info.station)) {
    throw PreconditionError(fmt::format("station {} already has an outstanding message", info.station.value));
  }
  outstanding_[info.station] = info;
}

bool OrderGateway::awaiting(StationId station) const { return outstanding_.count(station) > 0; }

ReplyResult OrderGateway::apply_station_reply(const wire::StationReply& reply, World& world) {
  ReplyResult result;
  auto it = outstanding_.find(reply.station);
  if (it == outstanding_.end() || it->second.msg_id != reply.msg_id) return result;
  const Outstanding info = it->second;
  outstanding_.erase(it);
  result.info = info;
  if (!reply.ok) {
    result.outcome = ReplyOutcome::Requeue;
    return result;
  }
  const Pod& pod = world.pod(info.pod);
  result.before = pod.compartments.at(info.compartment).count;
  if (info.pick) {
    world.pick_units(info.pod, info.compartment, info.quantity);
  } else {
    world.replenish_units(info.pod, info.compartment, info.quantity);
  }
  result.after = world.pod(info.pod).compartments.at(info.compartment).count;
  Transfer& t = transfers_.at(info.transfer);
  Move& move = t.moves.at(info.move);
  move.done += info.quantity;
  move.source = fmt::format("pod:{}", info.pod.value);
  if (info.pick) done_units_ += info.quantity;
  bool all = true;
  for (const Move& m : t.moves) all = all && m.complete();
  if (all && t.state != TransferStatus::Done) {
    t.state = TransferStatus::Done;
    result.transfer_done = true;
  }
  result.outcome = ReplyOutcome::Applied;
  return result;
}

const Transfer& OrderGateway::transfer(TransferId id) const {
  auto it = transfers_.find(id);
  if (it == transfers_.end()) throw PreconditionError(fmt::format("unknown transfer {}", id.value));
  return it->second;
}

std::optional<TransferId> OrderGateway::transfer_of(OrderId order) const {
  auto it = by_order_.find(order);
  if (it == by_order_.end()) return std::nullopt;
  return it->second;
}

std::optional<TransferId> OrderGateway::transfer_of(BundleId bundle) const {
  auto it = by_bundle_.find(bundle);
  if (it == by_bundle_.end()) return std::nullopt;
  return it->second;
}

wire::TransferState transfer_state_message(const Transfer& transfer, long msg_id) {
  wire::TransferState s;
  s.msg_id = msg_id;
  s.transfer = transfer.id;
  s.kind = std::string(to_string(transfer.kind));
  s.state = std::string(to_string(transfer.state));
  for (const Move& m : transfer.moves) s.moves.push_back(wire::MoveState{m.sku, m.quantity, m.done});
  return s;
}

}  // namespace rmfs
