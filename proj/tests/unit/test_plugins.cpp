#include <doctest.h>

#include <algorithm>
#include <random>

#include "rmfs/core/error.hpp"
#include "rmfs/plugins/plugins.hpp"
#include "rmfs/plugins/validator.hpp"

using namespace rmfs;

namespace {

StationLoad station(int id, StationKind kind, int assigned, int slots = 4) {
  StationLoad s;
  s.id = StationId{id};
  s.kind = kind;
  s.assigned = assigned;
  s.slots = slots;
  return s;
}

PickOrder order(int id, std::vector<SkuId> skus) {
  PickOrder o;
  o.id = OrderId{id};
  for (auto& s : skus) o.lines.push_back(OrderLine{s, 1});
  return o;
}

Pod pod_with(int id, std::vector<std::pair<SkuId, int>> slots, int capacity = 10) {
  Pod p = make_pod(PodId{id}, id, 2, 3, capacity);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].first.empty()) continue;
    p.compartments[i].sku = slots[i].first;
    p.compartments[i].count = slots[i].second;
  }
  return p;
}

// Room for a sku, written out from the policy definition.
int room_for(const Pod& p, const SkuId& sku) {
  int room = 0;
  for (const Compartment& c : p.compartments)
    if (!c.sku || c.sku == sku) room = std::max(room, c.capacity - c.count);
  return room;
}

const Layout& grid() {
  static const Layout layout = Layout::build(default_layout_config());
  return layout;
}

}  // namespace

TEST_CASE("ROA sends a lone bundle to the only free station") {
  auto roa = make_fcfs_least_loaded_roa();
  const auto out = roa->assign({ReplenishmentBundle{BundleId{1}, "apple", 3}},
                               {station(1, StationKind::Replenish, 0), station(2, StationKind::Pick, 0)});
  REQUIRE(out.size() == 1);
  CHECK(out[0].second == StationId{1});
}

TEST_CASE("ROA prefers the station with the shorter queue") {
  auto roa = make_fcfs_least_loaded_roa();
  const auto out = roa->assign({ReplenishmentBundle{BundleId{1}, "apple", 3}},
                               {station(1, StationKind::Replenish, 3), station(3, StationKind::Replenish, 1)});
  REQUIRE(out.size() == 1);
  CHECK(out[0].second == StationId{3});
}

TEST_CASE("ROA on seeded backlogs replays the least-loaded rule") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ReplenishmentBundle> backlog;
    for (int b = 0; b < 20; ++b) backlog.push_back(ReplenishmentBundle{BundleId{b + 1}, "sku", 1});
    std::vector<StationLoad> stations;
    const int count = 1 + static_cast<int>(rng() % 4);
    for (int s = 0; s < count; ++s) {
      stations.push_back(station(s + 1, StationKind::Replenish, static_cast<int>(rng() % 4), 4 + static_cast<int>(rng() % 3)));
    }
    auto out = make_fcfs_least_loaded_roa()->assign(backlog, stations);

    std::vector<std::pair<BundleId, StationId>> oracle;
    std::vector<int> load;
    for (auto& s : stations) load.push_back(s.assigned);
    for (const auto& b : backlog) {
      int best = -1;
      for (int s = 0; s < count; ++s) {
        if (load[s] >= stations[s].slots) continue;
        if (best < 0 || load[s] < load[best]) best = s;  // ids ascend with index
      }
      if (best < 0) break;
      ++load[best];
      oracle.emplace_back(b.id, stations[best].id);
    }
    CHECK(out == oracle);
  }
}

TEST_CASE("POA FCFS") {
  auto poa = make_fcfs_poa();
  SUBCASE("single order, single station") {
    const auto out = poa->assign({order(1, {"a"})}, {station(2, StationKind::Pick, 0)});
    REQUIRE(out.size() == 1);
    CHECK(out[0] == std::pair{OrderId{1}, StationId{2}});
  }
  SUBCASE("one free slot goes to the oldest order") {
    const auto out = poa->assign({order(1, {"a"}), order(2, {"b"})}, {station(2, StationKind::Pick, 3)});
    REQUIRE(out.size() == 1);
    CHECK(out[0].first == OrderId{1});
  }
  SUBCASE("assignment order equals arrival order") {
    std::vector<PickOrder> backlog;
    for (int i = 1; i <= 6; ++i) backlog.push_back(order(i, {"a"}));
    const auto out = poa->assign(backlog, {station(2, StationKind::Pick, 0), station(4, StationKind::Pick, 0)});
    REQUIRE(out.size() == 6);
    for (int i = 0; i < 6; ++i) CHECK(out[i].first == OrderId{i + 1});
  }
}

TEST_CASE("POA common-lines prefers the order sharing queued skus") {
  auto poa = make_common_lines_poa();
  StationLoad s = station(2, StationKind::Pick, 3);
  s.queued_skus = {"apple", "pear"};
  const auto out = poa->assign({order(1, {"kiwi", "plum"}), order(2, {"apple", "pear", "fig"})}, {s});
  REQUIRE(out.size() == 1);
  CHECK(out[0].first == OrderId{2});
}

TEST_CASE("RPS") {
  auto rps = make_max_capacity_rps();
  const ReplenishmentBundle bundle{BundleId{1}, "apple", 5};
  SUBCASE("one feasible pod") {
    const auto out = rps->select(bundle, {pod_with(1, {{"apple", 2}})}, false);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == Placement{PodId{1}, 0, 5});
  }
  SUBCASE("larger free capacity wins") {
    const std::vector<Pod> pods = {pod_with(1, {{"apple", 7}, {"x", 1}, {"x", 1}, {"x", 1}, {"x", 1}, {"x", 1}}),
                                   pod_with(2, {{"apple", 1}, {"x", 1}, {"x", 1}, {"x", 1}, {"x", 1}, {"x", 1}})};
    const auto out = rps->select(bundle, pods, false);
    REQUIRE(out.size() == 1);
    CHECK(out[0].pod == PodId{2});
  }
  SUBCASE("no room anywhere") {
    const auto out = rps->select(bundle, {pod_with(1, {{"apple", 7}, {"x", 1}, {"x", 1}, {"x", 1}, {"x", 1}, {"x", 1}})}, false);
    CHECK(out.empty());
  }
  SUBCASE("split across pods when allowed") {
    const std::vector<Pod> pods = {pod_with(1, {{"apple", 7}, {"x", 1}, {"x", 1}, {"x", 1}, {"x", 1}, {"x", 1}}),
                                   pod_with(2, {{"apple", 8}, {"x", 1}, {"x", 1}, {"x", 1}, {"x", 1}, {"x", 1}})};
    const auto out = rps->select(bundle, pods, true);
    CHECK(out.size() == 2);
    CHECK_FALSE(check_placements(bundle, pods, out, true));
  }
}

TEST_CASE("RPS on seeded scenarios matches an exhaustive max-capacity scan") {
  std::mt19937_64 rng(50);
  const std::vector<SkuId> skus = {"a", "b", "c"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Pod> pods;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<SkuId, int>> slots;
      for (int c = 0; c < 6; ++c) {
        const int roll = static_cast<int>(rng() % 4);
        slots.emplace_back(roll == 3 ? "" : skus[roll], roll == 3 ? 0 : static_cast<int>(1 + rng() % 10));
      }
      pods.push_back(pod_with(i + 1, slots));
    }
    const ReplenishmentBundle bundle{BundleId{1}, skus[rng() % 3], static_cast<int>(1 + rng() % 9)};
    const auto out = make_max_capacity_rps()->select(bundle, pods, false);

    std::optional<PodId> best;
    int best_room = -1;
    for (const Pod& p : pods) {
      const int room = room_for(p, bundle.sku);
      if (room >= bundle.quantity && room > best_room) {
        best = p.id;
        best_room = room;
      }
    }
    if (!best) {
      CHECK(out.empty());
      continue;
    }
    REQUIRE(out.size() == 1);
    CHECK(out[0].pod == *best);
    CHECK_FALSE(check_placements(bundle, pods, out, false));
  }
}

TEST_CASE("PPS") {
  auto pps = make_greedy_pile_on_pps();
  const WaypointId station_wp = grid().id({2, 3});
  SUBCASE("one request, one pod") {
    const std::vector<PpsRequest> queue = {{RequestId{1}, "apple", 5}};
    const std::vector<PpsPod> pods = {{PodId{1}, grid().id({0, 0}), {{"apple", 5}}}};
    const auto out = pps->build(grid(), station_wp, queue, pods, 4);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == PpsTask{PodId{1}, {RequestId{1}}});
  }
  SUBCASE("the pod covering more requests goes first") {
    const std::vector<PpsRequest> queue = {
        {RequestId{1}, "a", 1}, {RequestId{2}, "b", 1}, {RequestId{3}, "c", 1}, {RequestId{4}, "d", 1}};
    const std::vector<PpsPod> pods = {{PodId{1}, grid().id({0, 3}), {{"d", 1}}},
                                      {PodId{2}, grid().id({0, 0}), {{"a", 1}, {"b", 1}, {"c", 1}}}};
    const auto out = pps->build(grid(), station_wp, queue, pods, 4);
    REQUIRE(out.size() == 2);
    CHECK(out[0].pod == PodId{2});
    CHECK(out[0].requests.size() == 3);
    CHECK(out[1].pod == PodId{1});
  }
}

TEST_CASE("PPS first pick covers at least the best single pod") {
  std::mt19937_64 rng(10);
  const std::vector<SkuId> skus = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PpsRequest> queue;
    for (int r = 0; r < 10; ++r) queue.push_back({RequestId{r + 1}, skus[rng() % 4], static_cast<int>(1 + rng() % 3)});
    std::vector<PpsPod> pods;
    const WaypointId places[] = {0, 1, 2, 3, 4, 7};
    for (int p = 0; p < 6; ++p) {
      PpsPod pod{PodId{p + 1}, places[p], {}};
      for (const SkuId& s : skus)
        if (rng() % 2) pod.available[s] = static_cast<int>(rng() % 7);
      pods.push_back(pod);
    }
    // Exhaustive: the most requests one pod can serve in full.
    std::size_t best = 0;
    for (const PpsPod& pod : pods) {
      for (unsigned mask = 1; mask < (1u << queue.size()); ++mask) {
        std::map<SkuId, int> need;
        std::size_t count = 0;
        for (std::size_t r = 0; r < queue.size(); ++r) {
          if (mask & (1u << r)) {
            need[queue[r].sku] += queue[r].quantity;
            ++count;
          }
        }
        if (count <= best) continue;
        bool fits = true;
        for (const auto& [sku, qty] : need) {
          auto it = pod.available.find(sku);
          fits = fits && it != pod.available.end() && it->second >= qty;
        }
        if (fits) best = count;
      }
    }
    const auto out = make_greedy_pile_on_pps()->build(grid(), grid().id({2, 3}), queue, pods, 3);
    if (best == 0) continue;
    REQUIRE_FALSE(out.empty());
    CHECK(out[0].requests.size() >= best);
    for (const PpsTask& t : out) CHECK_FALSE(check_pps_task(t, queue, pods));
  }
}

TEST_CASE("PR") {
  const WaypointId station_wp = grid().id({2, 3});
  const Pod pod = make_pod(PodId{1}, 0);
  SUBCASE("a single free place is chosen by every policy") {
    const std::vector<WaypointId> free = {grid().id({0, 0})};
    CHECK(make_nearest_pr()->choose(grid(), pod, station_wp, free) == free[0]);
    CHECK(make_random_pr(Rng(3))->choose(grid(), pod, station_wp, free) == free[0]);
  }
  SUBCASE("nearest picks the closer place") {
    const std::vector<WaypointId> free = {grid().id({0, 1}), grid().id({1, 3})};
    CHECK(grid().distance(station_wp, free[0]) == 4);
    CHECK(grid().distance(station_wp, free[1]) == 1);
    CHECK(make_nearest_pr()->choose(grid(), pod, station_wp, free) == free[1]);
  }
  SUBCASE("nearest with distances 2 and 4") {
    const std::vector<WaypointId> free = {grid().id({0, 1}), grid().id({0, 3})};
    CHECK(make_nearest_pr()->choose(grid(), pod, station_wp, free) == grid().id({0, 3}));
  }
  SUBCASE("random with seed 11 repeats its sequence") {
    const std::vector<WaypointId> free = {0, 1, 2, 3, 4, 7};
    auto a = make_random_pr(RngStreams(11).stream("plugin.pr"));
    auto b = make_random_pr(RngStreams(11).stream("plugin.pr"));
    for (int i = 0; i < 5; ++i) CHECK(a->choose(grid(), pod, station_wp, free) == b->choose(grid(), pod, station_wp, free));
  }
  SUBCASE("fixed waits for the home slot") {
    Pod homed = pod;
    homed.home = 3;
    CHECK_FALSE(make_fixed_pr()->choose(grid(), homed, station_wp, {0, 1}));
    CHECK(make_fixed_pr()->choose(grid(), homed, station_wp, {0, 3}) == 3);
  }
}

TEST_CASE("TA") {
  auto ta = make_nearest_ta();
  const std::vector<WaypointId> dwelling = {grid().id({1, 1}), grid().id({1, 2})};
  SUBCASE("one robot, one task") {
    const auto out = ta->allocate(grid(), {{TaskId{1}, 0}}, {{RobotId{1}, 3}}, dwelling);
    REQUIRE(out.assignments.size() == 1);
    CHECK(out.assignments[0] == std::pair{TaskId{1}, RobotId{1}});
  }
  SUBCASE("the nearer robot gets the task") {
    const auto out = ta->allocate(grid(), {{TaskId{1}, grid().id({0, 0})}},
                                  {{RobotId{1}, grid().id({2, 3})}, {RobotId{2}, grid().id({0, 1})}}, dwelling);
    REQUIRE(out.assignments.size() == 1);
    CHECK(out.assignments[0].second == RobotId{2});
  }
  SUBCASE("no tasks sends idle robots to dwelling points") {
    const std::vector<TaRobot> robots = {{RobotId{1}, grid().id({0, 0})}, {RobotId{2}, grid().id({0, 3})}};
    const auto out = ta->allocate(grid(), {}, robots, dwelling);
    CHECK(out.assignments.empty());
    REQUIRE(out.rests.size() == 2);
    CHECK_FALSE(check_allocation(out, {}, robots, dwelling));
  }
  SUBCASE("no idle robots defers every task") {
    const auto out = ta->allocate(grid(), {{TaskId{1}, 0}}, {}, dwelling);
    CHECK(out.assignments.empty());
    CHECK(out.rests.empty());
  }
}

TEST_CASE("argmin policies ignore a rescaled distance metric") {
  LayoutConfig wide = default_layout_config();
  wide.spacing_m = 2.5;
  const Layout scaled = Layout::build(wide);
  const std::vector<WaypointId> free = {0, 1, 2, 3, 4, 7};
  for (WaypointId from : {8, 11}) {
    CHECK(make_nearest_pr()->choose(grid(), make_pod(PodId{1}, 0), from, free) ==
          make_nearest_pr()->choose(scaled, make_pod(PodId{1}, 0), from, free));
  }
}

TEST_CASE("unknown policy names list the registered ones") {
  PluginBinding binding;
  binding.pr = "teleport";
  CHECK_THROWS_WITH_AS(make_plugins(binding, RngStreams(1)),
                       "plugins.pr: unknown policy 'teleport'; registered: random, nearest, fixed", ConfigError);
}
