#include <doctest.h>

#include <cmath>

#include "rmfs/core/error.hpp"
#include "rmfs/gateway/order_gateway.hpp"
#include "rmfs/gateway/order_generator.hpp"

using namespace rmfs;

namespace {

PickOrder five_apples() { return PickOrder{OrderId{1}, {OrderLine{"apple", 5}}}; }

World apple_world() {
  World world(Layout::build(default_layout_config()), Kinematics{});
  Pod pod = make_pod(PodId{1}, 0);
  pod.compartments[5].sku = "apple";
  pod.compartments[5].count = 5;
  world.add_pod(pod);
  return world;
}

Outstanding pick_info(const Transfer& t, long msg_id) {
  return Outstanding{StationId{2}, msg_id, RequestId{1}, t.id, 0, PodId{1}, 5, 5, true};
}

wire::StationReply reply(long msg_id, bool ok) {
  wire::StationReply r;
  r.station = StationId{2};
  r.msg_id = msg_id;
  r.ok = ok;
  if (!ok) r.error = "apple not found";
  r.order = OrderId{1};
  r.item = "apple";
  return r;
}

}  // namespace

TEST_CASE("poll_feed") {
  OrderGateway gw;
  CHECK(gw.poll_feed().empty());
  gw.ingest(FeedEvent{0.0, five_apples()});
  const auto first = gw.poll_feed();
  REQUIRE(first.size() == 1);
  CHECK(first[0].kind == TransferKind::OutgoingPlanned);
  REQUIRE(first[0].moves.size() == 1);
  CHECK(first[0].moves[0] == Move{"apple", 5, 0, std::nullopt});
  CHECK(gw.poll_feed().empty());
  gw.ingest(FeedEvent{1.0, five_apples()});
  CHECK_THROWS_AS(gw.poll_feed(), PreconditionError);
}

TEST_CASE("transfer_to_requests") {
  OrderGateway gw;
  gw.ingest(FeedEvent{0.0, five_apples()});
  gw.ingest(FeedEvent{0.0, std::vector<ReplenishmentBundle>{{BundleId{1}, "apple", 10}, {BundleId{2}, "pear", 3}}});
  const auto transfers = gw.poll_feed();
  REQUIRE(transfers.size() == 2);

  const auto extract = gw.transfer_to_requests(transfers[0]);
  int total = 0;
  for (const RequestSpec& r : extract) {
    CHECK(r.kind == RequestSpec::Kind::Extract);
    CHECK(r.order == OrderId{1});
    total += r.quantity;
  }
  CHECK(total == 5);

  const auto insert = gw.transfer_to_requests(transfers[1]);
  REQUIRE(insert.size() == 2);
  CHECK(insert[0].kind == RequestSpec::Kind::Insert);
  CHECK(insert[1].bundle == BundleId{2});

  CHECK_THROWS_WITH_AS(gw.transfer_to_requests(Transfer{}), "no moves", PreconditionError);
}

TEST_CASE("apply_station_reply") {
  World world = apple_world();
  OrderGateway gw;
  gw.ingest(FeedEvent{0.0, five_apples()});
  const Transfer t = gw.poll_feed().front();

  SUBCASE("OK takes five apples and completes the transfer") {
    gw.expect_reply(pick_info(t, 7));
    const ReplyResult r = gw.apply_station_reply(reply(7, true), world);
    CHECK(r.outcome == ReplyOutcome::Applied);
    CHECK(r.before == 5);
    CHECK(r.after == 0);
    CHECK(r.transfer_done);
    CHECK(gw.transfer(t.id).moves[0].done == 5);
    CHECK(gw.transfer(t.id).state == TransferStatus::Done);
    CHECK(world.picked_total("apple") == 5);
    SUBCASE("a duplicate OK is ignored") {
      CHECK(gw.apply_station_reply(reply(7, true), world).outcome == ReplyOutcome::Ignored);
      CHECK(world.picked_total("apple") == 5);
    }
  }
  SUBCASE("Error asks for a requeue and changes nothing") {
    gw.expect_reply(pick_info(t, 7));
    const auto before = world.pod(PodId{1});
    const ReplyResult r = gw.apply_station_reply(reply(7, false), world);
    CHECK(r.outcome == ReplyOutcome::Requeue);
    CHECK(world.pod(PodId{1}) == before);
    CHECK(gw.transfer(t.id).moves[0].done == 0);
    CHECK_FALSE(gw.awaiting(StationId{2}));
  }
  SUBCASE("a reply nobody asked for is ignored") {
    CHECK(gw.apply_station_reply(reply(3, true), world).outcome == ReplyOutcome::Ignored);
  }
  SUBCASE("one outstanding message per station") {
    gw.expect_reply(pick_info(t, 7));
    CHECK_THROWS_AS(gw.expect_reply(pick_info(t, 8)), PreconditionError);
  }
}

TEST_CASE("pod_release_check") {
  Pod pod = make_pod(PodId{1}, 0);
  pod.compartments[0].sku = "apple";
  pod.compartments[0].count = 2;
  CHECK(pod_release_check(pod, QueuedNeed{false, "apple", std::nullopt}) == ReleaseDecision::ReuseAtStation);
  CHECK(pod_release_check(pod, QueuedNeed{false, "pear", std::nullopt}) == ReleaseDecision::Store);
  CHECK(pod_release_check(pod, std::nullopt) == ReleaseDecision::Store);
  CHECK(pod_release_check(pod, QueuedNeed{true, "apple", PodId{1}}) == ReleaseDecision::ReuseAtStation);
  CHECK(pod_release_check(pod, QueuedNeed{true, "apple", PodId{2}}) == ReleaseDecision::Store);
}

TEST_CASE("order generator") {
  GeneratorConfig cfg;
  cfg.sku_weights = {{"a", 1.0}, {"b", 3.0}};
  SUBCASE("rate 0 yields nothing") {
    OrderGenerator gen(cfg, Rng(1), Rng(2));
    CHECK_FALSE(gen.next_order());
    CHECK_FALSE(gen.next_receipt());
  }
  SUBCASE("same seed, same stream") {
    cfg.rate_per_hour = 30.0;
    cfg.receipt_rate_per_hour = 10.0;
    OrderGenerator a(cfg, Rng(1), Rng(2));
    OrderGenerator b(cfg, Rng(1), Rng(2));
    for (int i = 0; i < 100; ++i) {
      const auto x = a.next_order();
      const auto y = b.next_order();
      REQUIRE(x);
      CHECK(x->time == y->time);
      CHECK(std::get<PickOrder>(x->item) == std::get<PickOrder>(y->item));
    }
  }
  SUBCASE("60 per hour over 10 hours stays within three sigma of 600") {
    cfg.rate_per_hour = 60.0;
    cfg.cutoff_s = 36000.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      OrderGenerator gen(cfg, Rng(seed), Rng(seed + 100));
      int count = 0;
      double last = 0.0;
      while (auto o = gen.next_order()) {
        CHECK(o->time > last);
        last = o->time;
        const auto& order = std::get<PickOrder>(o->item);
        CHECK(order.lines.size() >= 1);
        CHECK(order.lines.size() <= 4);
        ++count;
      }
      CHECK(std::abs(count - 600) <= 3.0 * std::sqrt(600.0));
    }
  }
}

TEST_CASE("truncated geometric mean") {
  for (double mean : {1.2, 1.8, 2.3}) {
    const double p = truncated_geometric_p(mean, 4);
    double norm = 0.0;
    double m = 0.0;
    for (int k = 1; k <= 4; ++k) {
      const double w = p * std::pow(1.0 - p, k - 1);
      norm += w;
      m += k * w;
    }
    CHECK(m / norm == doctest::Approx(mean).epsilon(1e-9));
  }
  CHECK_THROWS_AS(truncated_geometric_p(2.6, 4), ConfigError);
  CHECK_THROWS_AS(truncated_geometric_p(0.5, 4), ConfigError);
}
