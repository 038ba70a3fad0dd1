#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rmfs/console/scenario_config.hpp"
#include "rmfs/core/error.hpp"
#include "rmfs/ledger/naive_recompute.hpp"
#include "rmfs/sim/engine.hpp"

using namespace rmfs;

namespace {

ScenarioConfig config(const std::string& name) { return load_scenario(std::string(RMFS_CONFIG_DIR) + "/" + name); }

std::vector<std::string> kinds(const Engine& engine) {
  std::vector<std::string> out;
  for (const std::string& line : engine.log().lines()) {
    std::istringstream in(line);
    std::string t, seq, kind;
    std::getline(in, t, '\t');
    std::getline(in, seq, '\t');
    std::getline(in, kind, '\t');
    out.push_back(kind);
  }
  return out;
}

long first_index(const std::vector<std::string>& v, const std::string& kind) {
  auto it = std::find(v.begin(), v.end(), kind);
  return it == v.end() ? -1 : static_cast<long>(it - v.begin());
}

long count_of(const Engine& engine, const std::string& needle) {
  long n = 0;
  for (const std::string& line : engine.log().lines()) n += line.find(needle) != std::string::npos;
  return n;
}

// In-process robot that drops off the network after a number of commands.
class FlakyRobot : public RobotAgent {
 public:
  FlakyRobot(RobotId id, RobotProfile profile, int commands_before_loss)
      : inner_(id, profile), left_(commands_before_loss) {}
  std::vector<wire::StatusMessage> execute(const wire::TaskMessage& command) override {
    if (left_-- <= 0) throw AgentDisconnected("link down");
    return inner_.execute(command);
  }

 private:
  InProcessRobot inner_;
  int left_;
};

}  // namespace

TEST_CASE("horizon 0 logs the initial state only") {
  ScenarioConfig cfg = config("threebyfour.cfg");
  cfg.engine.horizon_s = 0.0;
  Engine engine(build_world(cfg), cfg.engine);
  const RunResult r = engine.run();
  CHECK(r.metrics.events == 0);
  CHECK(r.metrics.end_time == 0.0);
  for (const std::string& k : kinds(engine)) CHECK(k == "Init");
  CHECK(engine.ledger()->size() == 0);
}

TEST_CASE("same seed, same log; another seed, another log") {
  ScenarioConfig cfg = config("threebyfour.cfg");
  cfg.engine.horizon_s = 1800.0;
  auto run = [&](std::uint64_t seed) {
    cfg.engine.seed = seed;
    Engine engine(build_world(cfg), cfg.engine);
    engine.run();
    return engine.log().text();
  };
  const std::string a = run(42);
  CHECK(a == run(42));
  CHECK(a != run(43));
}

TEST_CASE("three-by-four replay") {
  ScenarioConfig cfg = config("threebyfour.cfg");
  Engine engine(build_world(cfg), cfg.engine);
  engine.keep_path_history(true);
  double last = 0.0;
  bool monotone = true;
  std::vector<std::string> violations;
  engine.set_observer([&](const Engine& e) {
    monotone = monotone && e.now() >= last;
    last = e.now();
    if (violations.empty()) violations = e.world().check_invariants();
  });
  const RunResult r = engine.run();
  CHECK(monotone);
  CHECK(violations.empty());
  CHECK_FALSE(r.metrics.aborted);
  CHECK(r.metrics.accepted_orders > 0);
  CHECK(r.metrics.completed_orders == r.metrics.accepted_orders);
  CHECK(r.metrics.completed_receipts > 0);
  CHECK(r.log_records == engine.log().count());

  // Every generated order reached the gateway and every transfer is Done.
  for (const auto& [id, t] : engine.gateway().transfers()) CHECK(t.state == TransferStatus::Done);

  SUBCASE("ledger bookkeeping") {
    const CostLedger& ledger = *engine.ledger();
    const auto awaiting = engine.pairing()->pods_awaiting_departure();
    CHECK(ledger.unlinked_count() == static_cast<long>(awaiting.size()));
    for (PodId p : awaiting) {
      const auto& loc = engine.world().pod(p).location;
      CHECK((std::holds_alternative<InStorage>(loc) || std::holds_alternative<CarriedBy>(loc)));
    }
  }
}

TEST_CASE("decision order within one pass") {
  ScenarioConfig cfg = config("five_apples.cfg");
  Engine engine(build_world(cfg), cfg.engine);
  engine.run();
  const auto k = kinds(engine);
  const std::vector<std::string> order = {"OrderArrival", "Transfer", "POA", "ExtractRequest", "PPS", "TA", "PP",
                                          "Command"};
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    INFO(order[i], " before ", order[i + 1]);
    CHECK(first_index(k, order[i]) >= 0);
    CHECK(first_index(k, order[i]) < first_index(k, order[i + 1]));
  }
}

TEST_CASE("a robot lost before pickup hands its task back to TA") {
  ScenarioConfig cfg = config("five_apples.cfg");
  World world = build_world(cfg);
  Engine engine(world, cfg.engine);
  engine.attach_robot_agent(RobotId{1}, std::make_unique<FlakyRobot>(RobotId{1}, robot_profile(world, cfg.engine, RobotId{1}), 2));
  const RunResult r = engine.run();
  const auto k = kinds(engine);
  const long lost = first_index(k, "Disconnect");
  REQUIRE(lost >= 0);
  CHECK(k[lost + 1] == "TaskRequeued");
  CHECK(count_of(engine, "\tTA\ttask=1 kind=Extraction robot=2") == 1);
  CHECK(r.metrics.completed_orders == 1);
  CHECK_FALSE(engine.world().robot(RobotId{1}).available);
  CHECK(engine.world().check_invariants().empty());
}

TEST_CASE("a robot lost while carrying returns its requests to the station queue") {
  ScenarioConfig cfg = config("five_apples.cfg");
  cfg.engine.horizon_s = 600.0;
  World world = build_world(cfg);
  Engine engine(world, cfg.engine);
  // Turn, Go, Turn, Go, Pickup, then lost on the way to the station.
  engine.attach_robot_agent(RobotId{1}, std::make_unique<FlakyRobot>(RobotId{1}, robot_profile(world, cfg.engine, RobotId{1}), 6));
  const RunResult r = engine.run();
  CHECK(count_of(engine, "\tTaskAbandoned\ttask=1 robot=1 pod=1 requests=[1]") == 1);
  CHECK(r.metrics.completed_orders == 0);
  CHECK(engine.station_queue(StationId{2}) == std::vector<RequestId>{RequestId{1}});
  CHECK(std::holds_alternative<CarriedBy>(engine.world().pod(PodId{1}).location));
  CHECK(engine.world().check_invariants().empty());
}

TEST_CASE("pickup faults") {
  ScenarioConfig cfg = config("five_apples.cfg");
  SUBCASE("every attempt fails: retries, then the task is requeued") {
    cfg.engine.pickup_fault_rate = 1.0;
    cfg.engine.horizon_s = 400.0;
    Engine engine(build_world(cfg), cfg.engine);
    const RunResult r = engine.run();
    CHECK(r.metrics.pickup_failures >= cfg.engine.pickup_retries + 1);
    CHECK(count_of(engine, "PickupFailed\trobot=1 pod=1 attempt=4") >= 1);
    CHECK(count_of(engine, "PickupFailed\trobot=1 pod=1 attempt=5") == 0);
    const auto k = kinds(engine);
    const long fourth = first_index(k, "PickupFailed") + 3;
    CHECK(k[fourth + 1] == "TaskRequeued");
    CHECK(r.metrics.completed_orders == 0);
    CHECK(engine.world().pod(PodId{1}).units_of("apple") == 5);
  }
  SUBCASE("occasional faults only delay the order") {
    cfg.engine.pickup_fault_rate = 0.5;
    Engine engine(build_world(cfg), cfg.engine);
    const RunResult r = engine.run();
    CHECK(r.metrics.completed_orders == 1);
    CHECK(engine.world().pod(PodId{1}).units_of("apple") == 0);
  }
}

TEST_CASE("an Error reply requeues the request without touching inventory") {
  ScenarioConfig cfg = config("five_apples_error.cfg");
  Engine engine(build_world(cfg), cfg.engine);
  const RunResult r = engine.run();
  CHECK(r.metrics.requeues == 1);
  CHECK(r.metrics.completed_orders == 1);
  CHECK(count_of(engine, "verdict=Error") == 1);
  CHECK(count_of(engine, "\tInventory\t") == 1);
  const auto k = kinds(engine);
  CHECK(first_index(k, "Requeue") < first_index(k, "Inventory"));
  CHECK(engine.world().picked_total("apple") == 5);
}

TEST_CASE("orders sharing a sku are served by one pod visit") {
  ScenarioConfig cfg = config("five_apples.cfg");
  cfg.engine.scripted_feed.clear();
  cfg.engine.scripted_feed.push_back(FeedEvent{0.0, PickOrder{OrderId{1}, {OrderLine{"apple", 2}}}});
  cfg.engine.scripted_feed.push_back(FeedEvent{0.0, PickOrder{OrderId{2}, {OrderLine{"apple", 3}}}});
  Engine engine(build_world(cfg), cfg.engine);
  const RunResult r = engine.run();
  CHECK(r.metrics.completed_orders == 2);
  CHECK(r.metrics.pod_visits == 1);
  CHECK(r.metrics.served_in_visits == 2);
  // The second order arrives after PPS ran, so the release check keeps the pod.
  CHECK(count_of(engine, "\tReuse\tpod=1 station=2 requests=[2]") == 1);
  CHECK(count_of(engine, "\tPodPickedUp\t") == 1);
}

TEST_CASE("ledger agrees with a naive recount from the log") {
  ScenarioConfig cfg = config("ledger_mc.cfg");
  cfg.engine.ledger.target_epochs = 1100;
  cfg.engine.keep_log_lines = true;
  Engine engine(build_world(cfg), cfg.engine);
  engine.run();
  const CostLedger& ledger = *engine.ledger();
  REQUIRE(ledger.size() >= 1000);
  const auto from_log = epochs_from_log(engine.log().text(), cfg.engine.ledger.burn_in, cfg.layout.cols);
  REQUIRE(static_cast<long>(from_log.size()) >= 1000);
  for (long t = 0; t < 1000; ++t) REQUIRE(from_log[t] == ledger.epochs()[t]);
  const long N = 1000;
  const NaiveStats naive = naive_statistics(from_log, ledger.costs(), N);
  CHECK(ledger.direct_average(N) == doctest::Approx(static_cast<double>(naive.direct)).epsilon(1e-12));
  CHECK(ledger.shifted_average(N) == doctest::Approx(static_cast<double>(naive.shifted)).epsilon(1e-12));
  CHECK(ledger.decomposed_estimate(N) == doctest::Approx(static_cast<double>(naive.decomposed)).epsilon(1e-12));
  const auto [departed, residual] = ledger.split_average(N);
  CHECK(departed == doctest::Approx(static_cast<double>(naive.departed)).epsilon(1e-12));
  CHECK(residual == doctest::Approx(static_cast<double>(naive.residual)).epsilon(1e-12));
}

TEST_CASE("agents are fixed once the run is initialized") {
  ScenarioConfig cfg = config("five_apples.cfg");
  Engine engine(build_world(cfg), cfg.engine);
  engine.initialize();
  CHECK_THROWS_AS(engine.attach_robot_agent(RobotId{1}, std::make_unique<InProcessRobot>(RobotId{1}, RobotProfile{})),
                  PreconditionError);
}

TEST_CASE("five-apples runs match the checked-in golden logs") {
  for (const std::string name : {"five_apples", "five_apples_error"}) {
    INFO(name);
    ScenarioConfig cfg = config(name + ".cfg");
    Engine engine(build_world(cfg), cfg.engine);
    engine.run();
    std::ifstream in(std::string(RMFS_GOLDEN_DIR) + "/" + name + ".log", std::ios::binary);
    REQUIRE(in);
    const std::string golden((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(engine.log().text() == golden);
  }
}
