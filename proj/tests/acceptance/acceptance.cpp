// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <streambuf>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "message_fuzz.hpp"
#include "rmfs/console/scenario_config.hpp"
#include "rmfs/core/error.hpp"
#include "rmfs/ledger/naive_recompute.hpp"
#include "rmfs/planner/conflict_scan.hpp"
#include "rmfs/planner/planner.hpp"
#include "rmfs/sim/engine.hpp"
#include "rmfs/wire/codec.hpp"
#include "rmfs/wire/emulators.hpp"
#include "rmfs/wire/framing.hpp"
#include "rmfs/wire/server.hpp"

using namespace rmfs;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  // Records a failed condition; the first few reasons end up in the detail.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail.clear();
    pass = false;
    if (failures_++ < 3) detail += (detail.empty() ? "" : "; ") + what;
  }

 private:
  int failures_ = 0;
};

ScenarioConfig config(const std::string& name) { return load_scenario(std::string(RMFS_CONFIG_DIR) + "/" + name); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Keeps only the log lines the naive ledger recount reads, so a long run
// does not hold its whole log in memory.
class LedgerLineFilter : public std::streambuf {
 public:
  const std::string& text() const { return kept_; }

 protected:
  int overflow(int ch) override {
    if (ch == traits_type::eof()) return 0;
    line_.push_back(static_cast<char>(ch));
    if (ch == '\n') take_line();
    return ch;
  }
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    for (std::streamsize i = 0; i < n; ++i) overflow(static_cast<unsigned char>(s[i]));
    return n;
  }

 private:
  void take_line() {
    if (line_.find("\tEpoch\t") != std::string::npos || line_.find("\tPodPickedUp\t") != std::string::npos) {
      kept_ += line_;
    }
    line_.clear();
  }
  std::string line_;
  std::string kept_;
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---------------------------------------------------------------------------
// Criteria 1-3: ledger identities on the Monte Carlo scenario.

struct LedgerRun {
  ScenarioConfig cfg;
  std::unique_ptr<Engine> engine;
  std::string log_text;
  double runtime_s = 0.0;
};

LedgerRun& ledger_run() {
  static LedgerRun run = [] {
    LedgerRun r;
    r.cfg = config("ledger_mc.cfg");
    r.engine = std::make_unique<Engine>(build_world(r.cfg), r.cfg.engine);
    LedgerLineFilter filter;
    std::ostream sink(&filter);
    r.engine->set_log_sink(&sink);
    const auto start = std::chrono::steady_clock::now();
    r.engine->run();
    r.runtime_s = seconds_since(start);
    r.engine->set_log_sink(nullptr);
    r.log_text = filter.text();
    return r;
  }();
  return run;
}

Verdict criterion_1() {
  Verdict v;
  LedgerRun& run = ledger_run();
  const CostLedger& ledger = *run.engine->ledger();
  const long N = run.cfg.engine.ledger.target_epochs;
  v.require(ledger.size() >= N, fmt::format("only {} epochs recorded", ledger.size()));
  if (!v.pass) return v;

  const LedgerReport rep = ledger.report(N);
  const double dev = rel(rep.decomposed_est, rep.direct_avg);
  v.require(dev <= 0.02, fmt::format("relative deviation {:.4f} > 0.02", dev));
  v.require(run.runtime_s < 60.0, fmt::format("runtime {:.1f} s", run.runtime_s));

  // Independent recount from the event log.
  const auto epochs = epochs_from_log(run.log_text, run.cfg.engine.ledger.burn_in, run.cfg.layout.cols);
  v.require(static_cast<long>(epochs.size()) >= N, "log holds fewer epochs than the ledger");
  if (!v.pass) return v;
  long mismatched = 0;
  for (long t = 0; t < N; ++t) mismatched += !(epochs[t] == ledger.epochs()[t]);
  v.require(mismatched == 0, fmt::format("{} epochs differ from the log recount", mismatched));
  const NaiveStats naive = naive_statistics(epochs, ledger.costs(), N);
  const double oracle_gap = std::max({rel(rep.direct_avg, static_cast<double>(naive.direct)),
                                      rel(rep.decomposed_est, static_cast<double>(naive.decomposed)),
                                      rel(rep.shifted_avg, static_cast<double>(naive.shifted))});
  v.require(oracle_gap <= 1e-9, fmt::format("naive recount differs by {:.2e}", oracle_gap));
  if (v.pass) {
    v.detail = fmt::format("N={} direct={:.6f} decomposed={:.6f} rel={:.4f} (<= 0.02) runtime={:.1f}s (< 60s) "
                           "naive-recount gap={:.1e}",
                           N, rep.direct_avg, rep.decomposed_est, dev, run.runtime_s, oracle_gap);
  }
  return v;
}

Verdict criterion_2() {
  Verdict v;
  LedgerRun& run = ledger_run();
  const CostLedger& ledger = *run.engine->ledger();
  const double c_max = ledger.costs().c_max;
  const int pods = ledger.pod_count();
  std::string detail;
  for (long N : {100L, 1000L, 10000L}) {
    if (N > ledger.size()) {
      v.require(false, fmt::format("N={} beyond {} epochs", N, ledger.size()));
      continue;
    }
    const LedgerReport rep = ledger.report(N);
    const double bound = pods * c_max / N;
    v.require(rep.residual_part <= bound, fmt::format("N={} residual {:.6f} > {:.6f}", N, rep.residual_part, bound));
    v.require(rep.sums.total == rep.sums.departed + rep.sums.residual,
              fmt::format("N={} sums {} != {} + {}", N, rep.sums.total, rep.sums.departed, rep.sums.residual));
    detail += fmt::format(" N={}: residual={:.5f}<={:.5f}", N, rep.residual_part, bound);
  }
  if (v.pass) v.detail = fmt::format("c_max={} pods={};{}; total == departed + residual exactly", c_max, pods, detail);
  return v;
}

// Cost tables restricted to one station.
CostFunctions single_station(const CostFunctions& full, StationId keep) {
  CostFunctions one;
  const std::size_t k = *full.station_index(keep);
  one.places = full.places;
  one.stations = {keep};
  for (const auto& row : full.to_station) one.to_station.push_back({row[k]});
  one.from_station = {full.from_station[k]};
  one.recompute_c_max();
  return one;
}

Verdict criterion_3() {
  Verdict v;
  LedgerRun& run = ledger_run();
  const CostLedger& ledger = *run.engine->ledger();
  const double c_max = ledger.costs().c_max;
  const int pods = ledger.pod_count();
  std::string detail;
  std::vector<long> marks = {100, 1000, 10000, run.cfg.engine.ledger.target_epochs};
  for (long N : marks) {
    if (N > ledger.size()) continue;
    const double gap = std::abs(ledger.shifted_average(N) - ledger.direct_average(N));
    const double bound = 2.0 * pods * c_max / N;
    v.require(gap <= bound, fmt::format("N={} |shifted-direct|={:.6f} > {:.6f}", N, gap, bound));
    detail += fmt::format(" N={}: {:.5f}<={:.5f}", N, gap, bound);
  }

  // Pick-only run: no receipts, so every epoch starts and ends at the pick
  // station, replayed into a ledger that knows only that station.
  ScenarioConfig cfg = config("ledger_mc.cfg");
  cfg.engine.generator.receipt_rate_per_hour = 0.0;
  cfg.engine.ledger.target_epochs = 10000;
  Engine engine(build_world(cfg), cfg.engine);
  engine.run();
  const CostLedger& two = *engine.ledger();
  StationId pick;
  for (const Station& s : engine.world().layout().stations())
    if (s.kind == StationKind::Pick) pick = s.id;
  CostLedger one(single_station(two.costs(), pick), two.pod_count());
  bool pick_only = true;
  for (const EpochRecord& e : two.epochs()) {
    pick_only = pick_only && e.S == pick && e.tau == pick;
    one.record_epoch(e.S, e.pi, e.P, e.tau);
  }
  for (const EpochRecord& e : two.epochs())
    if (e.D) one.link_departure(e.t, *e.D);
  v.require(pick_only, "pick-only run used the replenishment station");
  v.require(one.size() >= 10000, fmt::format("pick-only run recorded {} epochs", one.size()));
  int equal = 0;
  for (long N : {100L, 1000L, 10000L}) {
    if (N > one.size()) continue;
    const double d = one.decomposed_estimate(N);
    const double s = one.shifted_average(N);
    v.require(d == s, fmt::format("single station N={} decomposed {:.17g} != shifted {:.17g}", N, d, s));
    equal += d == s;
  }
  if (v.pass) v.detail = fmt::format("2*pods*c_max/N bound:{}; single station decomposed == shifted at {} checkpoints",
                                     detail, equal);
  return v;
}

// ---------------------------------------------------------------------------
// Criterion 4: prioritized planning never produces conflicts.

Verdict criterion_4() {
  Verdict v;
  const int trials = 10000;
  const Kinematics kin;
  std::mt19937_64 rng(2024);
  long samples = 0;
  long paths_planned = 0;
  long unplanned = 0;
  for (int trial = 0; trial < trials; ++trial) {
    LayoutConfig lc;
    lc.rows = 3 + static_cast<int>(rng() % 8);
    lc.cols = std::max(4, 3 + static_cast<int>(rng() % 8));
    lc.stations = {StationSpec{StationId{1}, StationKind::Replenish, std::nullopt, 2},
                   StationSpec{StationId{2}, StationKind::Pick, std::nullopt, 2}};
    lc.placement_seed = rng();
    if (lc.rows * lc.cols >= 25) {
      const int holes = static_cast<int>(rng() % 4);
      for (int h = 0; h < holes; ++h) {
        lc.holes.push_back(Coord{1 + static_cast<int>(rng() % (lc.rows - 2)), 1 + static_cast<int>(rng() % (lc.cols - 2))});
      }
    }
    std::optional<Layout> built;
    try {
      built = Layout::build(lc);
    } catch (const ConfigError&) {
      lc.holes.clear();
      built = Layout::build(lc);
    }
    const Layout& layout = *built;

    std::vector<WaypointId> cells;
    for (WaypointId w = 0; w < layout.cell_count(); ++w)
      if (layout.is_waypoint(w)) cells.push_back(w);
    std::shuffle(cells.begin(), cells.end(), rng);
    const int robots = std::min(2 + static_cast<int>(rng() % 7), static_cast<int>(cells.size()) / 3);

    ReservationTable table(layout.cell_count());
    std::vector<TimedPath> paths;
    std::vector<WaypointId> at(robots);
    std::vector<int> heading(robots);
    std::vector<double> free_at(robots, 0.0);
    for (int r = 0; r < robots; ++r) {
      at[r] = cells[r];
      heading[r] = static_cast<int>(rng() % 4);
      table.release(RobotId{r}, at[r], 0.0);
      TimedPath stay;
      stay.robot = RobotId{r};
      stay.start_heading = heading[r];
      stay.steps.push_back(PathStep{at[r], 0.0, 0.0, 0.0, heading[r]});
      paths.push_back(stay);
    }
    // Two legs per robot in priority order; goals are distinct per round.
    double until = 0.0;
    for (int leg = 0; leg < 2; ++leg) {
      for (int r = 0; r < robots; ++r) {
        const WaypointId goal = cells[robots * (leg + 1) + r];
        const double start = free_at[r] + (leg == 0 ? static_cast<double>(rng() % 40) : kin.t_pickup);
        const auto p = plan_path(layout, kin, table, PlanRequest{RobotId{r}, at[r], heading[r], start, goal});
        if (!p) {
          ++unplanned;
          continue;
        }
        if (!table.reserve(*p)) {
          v.require(false, fmt::format("trial {}: planner returned a path the table rejects", trial));
          continue;
        }
        ++paths_planned;
        paths.push_back(*p);
        at[r] = p->goal();
        heading[r] = p->steps.back().heading_after;
        free_at[r] = p->end_time();
        until = std::max(until, p->end_time());
      }
    }
    const ScanReport scan = scan_conflicts(layout, paths, kin.v_max, until + 1.0, 0.1);
    samples += scan.samples;
    v.require(scan.clean(), fmt::format("trial {} {}x{} robots={}: {}", trial, lc.rows, lc.cols, robots,
                                        scan.details.empty() ? "dirty" : scan.details.front()));
  }
  if (v.pass) {
    v.detail = fmt::format("{} scenarios, {} paths, {} unplannable legs skipped, {} samples at 0.1 s: no vertex, "
                           "edge or speed violations",
                           trials, paths_planned, unplanned, samples);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Criterion 5: kinematic timing.

Verdict criterion_5() {
  Verdict v;
  const ScenarioConfig cfg = config("threebyfour.cfg");
  const Layout layout = Layout::build(cfg.layout);
  const Kinematics& kin = cfg.kinematics;
  ReservationTable table(layout.cell_count());
  const WaypointId a = layout.id({1, 0});
  const WaypointId b = layout.id({1, 2});
  const auto straight = plan_path(layout, kin, table, PlanRequest{RobotId{1}, a, 0, 0.0, b});
  const auto turned = plan_path(layout, kin, table, PlanRequest{RobotId{1}, a, 1, 0.0, b});
  v.require(straight && straight->moves() == 2 && straight->total_duration() == 40.0,
            fmt::format("straight plan {:.17g} s", straight ? straight->total_duration() : -1.0));
  v.require(turned && turned->moves() == 2 && turned->total_duration() == 40.75,
            fmt::format("turned plan {:.17g} s", turned ? turned->total_duration() : -1.0));

  RobotProfile profile;
  profile.kinematics = kin;
  profile.spacing_m = cfg.layout.spacing_m;
  RobotEmulator robot(RobotId{1}, profile);
  const auto go = robot.handle(wire::TaskMessage{RobotId{1}, 1, wire::Go{{layout.id({1, 1}), b}}, 0.0});
  v.require(go.size() == 2 && *go[1].time == 40.0, "emulated Go does not finish at 40 s");
  RobotEmulator turner(RobotId{1}, profile);
  const auto turn = turner.handle(wire::TaskMessage{RobotId{1}, 1, wire::Turn{90}, 0.0});
  const auto go2 = turner.handle(wire::TaskMessage{RobotId{1}, 2, wire::Go{{layout.id({1, 1}), b}}, *turn[0].time});
  v.require(go2.size() == 2 && *go2[1].time == 40.75, "emulated Turn + Go does not finish at 40.75 s");
  if (v.pass) v.detail = "planner and robot emulator: 2 edges = 40.0 s, with one 90 degree turn = 40.75 s";
  return v;
}

// ---------------------------------------------------------------------------
// Criterion 6: the 3x4 experiment replay.

Verdict criterion_6() {
  Verdict v;
  ScenarioConfig cfg = config("threebyfour.cfg");
  v.require(cfg.engine.horizon_s == 7200.0, "bundled horizon is not two hours");
  auto run = [&] {
    Engine engine(build_world(cfg), cfg.engine);
    const RunResult r = engine.run();
    bool all_done = true;
    for (const auto& [id, t] : engine.gateway().transfers()) all_done = all_done && t.state == TransferStatus::Done;
    return std::make_tuple(r, engine.log().text(), all_done);
  };
  const auto [r1, log1, done1] = run();
  const auto [r2, log2, done2] = run();
  const RunMetrics& m = r1.metrics;
  v.require(!m.aborted, "run aborted: " + m.abort_reason);
  v.require(m.accepted_orders > 0, "no orders accepted");
  v.require(m.completed_orders == m.accepted_orders,
            fmt::format("{} of {} accepted orders fulfilled", m.completed_orders, m.accepted_orders));
  v.require(done1, "a transfer is still Planned");
  v.require(log1 == log2 && r1.log_hash == r2.log_hash, "same seed produced different logs");
  if (v.pass) {
    v.detail = fmt::format("seed {} horizon {:.0f}s: {}/{} orders fulfilled, {} receipts, {} log lines identical "
                           "across two runs (hash {:016x})",
                           cfg.engine.seed, cfg.engine.horizon_s, m.completed_orders, m.accepted_orders,
                           m.completed_receipts, r1.log_records, r1.log_hash);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Criterion 7: five-apples golden logs.

std::string golden(const std::string& name) {
  std::ifstream in(std::string(RMFS_GOLDEN_DIR) + "/" + name, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Index of the first line at or after `from` containing every needle, -1 if none.
long find_line(const std::vector<std::string>& lines, long from, const std::vector<std::string_view>& needles) {
  for (long i = std::max(from, 0L); i < static_cast<long>(lines.size()); ++i) {
    bool all = true;
    for (std::string_view n : needles) all = all && lines[i].find(n) != std::string::npos;
    if (all) return i;
  }
  return -1;
}

Verdict criterion_7() {
  Verdict v;
  auto run = [](const std::string& name) {
    ScenarioConfig cfg = config(name + ".cfg");
    Engine engine(build_world(cfg), cfg.engine);
    engine.run();
    return std::make_pair(engine.log().text(), engine.log().lines());
  };
  const auto [text, lines] = run("five_apples");
  v.require(text == golden("five_apples.log"), "five_apples log differs from golden");
  const std::vector<std::vector<std::string_view>> flow = {
      {"\tPOA\t", "order=1"},
      {"\tExtractRequest\t", "item=apple qty=5"},
      {"\tPodAtStation\t", "pod=1"},
      {"\tPickingInfo\t", "item=apple qty=5", "compartment=(1,2)"},
      {"\tStationReply\t", "verdict=OK"},
      {"\tInventory\t", "apple 5->0"},
      {"\tMoveDone\t", "done=5/5"},
      {"\tTransferDone\t", "state=Done"},
      {"\tPodStored\t", "pod=1", "location=storage:"},
  };
  long at = 0;
  for (const auto& step : flow) {
    const long i = find_line(lines, at, step);
    v.require(i >= 0, fmt::format("flow step {} missing after line {}", step.front(), at));
    if (i < 0) break;
    at = i + 1;
  }

  const auto [etext, elines] = run("five_apples_error");
  v.require(etext == golden("five_apples_error.log"), "five_apples_error log differs from golden");
  const long err = find_line(elines, 0, {"\tStationReply\t", "verdict=Error"});
  const long requeue = find_line(elines, err, {"\tRequeue\t", "request=1", "inventory=unchanged"});
  const long first_inventory = find_line(elines, 0, {"\tInventory\t"});
  v.require(err >= 0 && requeue == err + 1, "Error reply is not followed by the requeue");
  v.require(first_inventory > requeue, "inventory changed before the requeue");
  v.require(find_line(elines, requeue, {"\tInventory\t", "apple 5->0"}) > requeue, "retry did not pick the apples");
  if (v.pass) {
    v.detail = fmt::format("five_apples ({} lines) and error variant ({} lines) match golden; POA -> request -> "
                           "pod at station -> PickingInfo -> OK -> 5->0 -> done 5 -> Done -> stored",
                           lines.size(), elines.size());
  }
  return v;
}

// ---------------------------------------------------------------------------
// Criterion 8: wire conformance.

Verdict criterion_8() {
  Verdict v;
  testing::MessageFuzzer fuzz(8);
  long round_trips = 0;
  std::string stream;
  std::vector<wire::Message> sent;
  for (int kind = 0; kind < testing::kFuzzKinds; ++kind) {
    for (int i = 0; i < 1000; ++i) {
      const wire::Message m = fuzz.make(kind);
      const std::string line = wire::encode(m);
      bool same = false;
      try {
        same = wire::decode(line) == m;
      } catch (const wire::DecodeError& e) {
        v.require(false, fmt::format("{}: {}", e.what(), line));
      }
      v.require(same, "round trip changed " + line);
      round_trips += same;
      if (i % 50 == 0) {
        stream += "garbage\n{\"type\":\"Nope\"}\n" + wire::encode_frame(m);
        sent.push_back(m);
      }
    }
  }
  // Resync: every garbage line is reported and every valid frame survives.
  wire::FrameReader reader;
  std::size_t good = 0;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < stream.size(); i += 7) {
    reader.feed(std::string_view(stream).substr(i, 7));
    while (auto f = reader.next()) {
      if (const auto* m = std::get_if<wire::Message>(&*f)) {
        v.require(good < sent.size() && *m == sent[good], "resynced stream reordered or altered a frame");
        ++good;
      } else {
        ++bad;
      }
    }
  }
  v.require(good == sent.size() && bad == 2 * sent.size(),
            fmt::format("resync kept {} of {} frames, {} bad", good, sent.size(), bad));

  // Loopback: robots behind TCP give the same run as in-process robots.
  ScenarioConfig cfg = config("threebyfour.cfg");
  Engine local(build_world(cfg), cfg.engine);
  local.run();
  const World world = build_world(cfg);
  wire::Hub hub;
  wire::TcpServer server(hub, wire::Endpoint{"127.0.0.1", 0});
  std::vector<std::unique_ptr<wire::EmulatedRobotClient>> clients;
  for (const Robot& r : world.robots()) {
    clients.push_back(std::make_unique<wire::EmulatedRobotClient>(wire::Endpoint{"127.0.0.1", server.port()}, r.id,
                                                                   robot_profile(world, cfg.engine, r.id)));
    v.require(clients.back()->start(), fmt::format("robot {} could not register", r.id.value));
  }
  Engine remote(world, cfg.engine);
  for (const Robot& r : world.robots()) remote.attach_robot_agent(r.id, std::make_unique<wire::RemoteRobotAgent>(hub, r.id));
  remote.run();
  long handled = 0;
  for (auto& c : clients) {
    handled += c->handled();
    c->stop();
  }
  hub.stop();
  server.stop();
  v.require(remote.log().text() == local.log().text(), "loopback log differs from the in-process log");
  if (v.pass) {
    v.detail = fmt::format("{} round trips over {} types; resync kept {}/{} frames past {} bad ones; loopback run "
                           "({} commands over TCP) log hash {:016x} == in-process",
                           round_trips, testing::kFuzzKinds, good, sent.size(), bad, handled, remote.log().hash());
  }
  return v;
}

// ---------------------------------------------------------------------------
// Criterion 9: conservation and exclusivity under random runs.

// Independent structural check written against the public state only.
std::string exclusivity_violation(const World& world) {
  std::map<WaypointId, PodId> places;
  std::map<RobotId, PodId> carried;
  std::map<StationId, int> at_station;
  for (const Pod& pod : world.pods()) {
    if (const auto* s = std::get_if<InStorage>(&pod.location)) {
      if (!places.emplace(s->place, pod.id).second) return fmt::format("two pods on place {}", s->place);
      if (!world.layout().is_waypoint(s->place)) return fmt::format("pod {} off the grid", pod.id.value);
    } else if (const auto* c = std::get_if<CarriedBy>(&pod.location)) {
      if (!carried.emplace(c->robot, pod.id).second) return fmt::format("robot {} carries two pods", c->robot.value);
      if (world.robot(c->robot).carrying != pod.id) return fmt::format("pod {} carrier disagrees", pod.id.value);
    } else if (const auto* st = std::get_if<AtStation>(&pod.location)) {
      ++at_station[st->station];
    }
    for (const Compartment& c : pod.compartments) {
      if (c.count < 0 || c.count > c.capacity) return fmt::format("pod {} compartment count {}", pod.id.value, c.count);
    }
  }
  for (const auto& [station, n] : at_station) {
    if (n > 1) return fmt::format("{} pods presented at station {}", n, station.value);
  }
  std::set<WaypointId> robot_cells;
  for (const Robot& r : world.robots()) {
    if (r.carrying && !carried.count(r.id)) {
      // A pod presented at a station stays on the robot standing there.
      const auto* a = std::get_if<AtStation>(&world.pod(*r.carrying).location);
      if (!a || world.layout().station(a->station).waypoint != r.waypoint) {
        return fmt::format("robot {} carries a pod located elsewhere", r.id.value);
      }
    }
    if (r.available && !robot_cells.insert(r.waypoint).second) return fmt::format("two robots on {}", r.waypoint);
  }
  return "";
}

Verdict criterion_9() {
  Verdict v;
  const int runs = 200;
  const long events_per_run = 1000;
  long checked = 0;
  std::mt19937_64 rng(99);
  for (int run = 0; run < runs; ++run) {
    ScenarioConfig cfg = config(run % 2 ? "threebyfour.cfg" : "ledger_mc.cfg");
    cfg.engine.seed = rng();
    cfg.engine.horizon_s = 1e7;
    cfg.engine.ledger.target_epochs = 0;
    cfg.engine.keep_log_lines = false;
    cfg.engine.pickup_fault_rate = (rng() % 4) * 0.1;
    if (run % 2) {
      cfg.engine.generator.rate_per_hour = 20.0 + static_cast<double>(rng() % 40);
      cfg.engine.generator.receipt_rate_per_hour = 5.0 + static_cast<double>(rng() % 20);
      cfg.engine.generator.cutoff_s = std::numeric_limits<double>::infinity();
    }
    // Scripted station errors exercise the requeue path.
    std::vector<std::string> script;
    for (int i = 0; i < 20; ++i) script.push_back(rng() % 5 == 0 ? "error:damaged" : "ok");
    cfg.engine.station_scripts[StationId{2}] = script;

    Engine engine(build_world(cfg), cfg.engine);
    const auto baseline = engine.world().conservation_snapshot();
    std::string failure;
    engine.set_observer([&](const Engine& e) {
      if (!failure.empty()) return;
      ++checked;
      const auto invariants = e.world().check_invariants();
      if (!invariants.empty()) failure = invariants.front();
      if (failure.empty()) failure = exclusivity_violation(e.world());
      if (failure.empty() && e.world().conservation_snapshot() != baseline) failure = "sku conservation broken";
    });
    engine.initialize();
    while (engine.metrics().events < events_per_run && engine.step()) {
    }
    v.require(failure.empty(), fmt::format("run {} (seed {}) at t={:.3f}: {}", run, cfg.engine.seed, engine.now(), failure));
    v.require(engine.metrics().events >= events_per_run,
              fmt::format("run {} stopped after {} events", run, engine.metrics().events));
  }
  if (v.pass) {
    v.detail = fmt::format("{} runs x {} events ({} states checked): sku totals conserved, pod and robot positions "
                           "exclusive",
                           runs, events_per_run, checked);
  }
  return v;
}

struct Criterion {
  int number;
  const char* name;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "ledger Monte Carlo identity", criterion_1},
      {2, "residual vanishing", criterion_2},
      {3, "shifted-sequence bound", criterion_3},
      {4, "MAPF safety", criterion_4},
      {5, "kinematic timing", criterion_5},
      {6, "3x4 experiment replay", criterion_6},
      {7, "five-apples golden flow", criterion_7},
      {8, "wire conformance", criterion_8},
      {9, "conservation suite", criterion_9},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += !v.pass;
    std::cout << fmt::format("{} {} {}: {} [{:.1f}s]", v.pass ? "PASS" : "FAIL", c.number, c.name, v.detail,
                             seconds_since(start))
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
