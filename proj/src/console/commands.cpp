#include "rmfs/console/commands.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "rmfs/console/scenario_config.hpp"
#include "rmfs/core/error.hpp"
#include "rmfs/ledger/epoch_dump.hpp"
#include "rmfs/wire/emulators.hpp"
#include "rmfs/wire/server.hpp"
#include "rmfs/wire/ws_bridge.hpp"

namespace rmfs {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  return f;
}

// Runs a prepared engine, streaming its log, then writes the reports.
RunOutcome execute(Engine& engine, const ScenarioConfig& config, const std::filesystem::path& dir, bool dump_epochs,
                   std::ostream& out) {
  RunOutcome outcome;
  {
    std::ofstream events = open_output(dir / "events.log");
    engine.set_log_sink(&events);
    outcome.result = engine.run();
    engine.set_log_sink(nullptr);
  }
  const bool ran = config.engine.horizon_s > 0.0;
  outcome.report = make_report(engine, outcome.result.metrics);
  {
    std::ofstream metrics = open_output(dir / "metrics.csv");
    write_metrics_csv(metrics, ran ? &outcome.report : nullptr);
  }
  std::vector<LedgerReport> rows;
  if (const CostLedger* ledger = engine.ledger(); ledger && ran) {
    std::vector<long> marks;
    for (long n : config.checkpoints)
      if (n > 0 && n < ledger->size()) marks.push_back(n);
    if (ledger->size() > 0) marks.push_back(ledger->size());
    rows = ledger->convergence_report(marks);
    if (dump_epochs) {
      std::ofstream dump = open_output(dir / "epochs.txt");
      write_epoch_dump(dump, *ledger);
    }
  }
  {
    std::ofstream ledger_csv = open_output(dir / "ledger.csv");
    ledger_csv << convergence_csv(rows);
  }
  const RunMetrics& m = outcome.result.metrics;
  out << fmt::format("events={} log_records={} end_time={:.3f} accepted={} completed={} receipts={}\n", m.events,
                     outcome.result.log_records, m.end_time, m.accepted_orders, m.completed_orders,
                     m.completed_receipts);
  if (m.aborted) {
    out << "aborted: " << m.abort_reason << "\n";
    outcome.exit_code = kExitFailed;
  }
  return outcome;
}

ScenarioConfig load_with_dir(const std::string& config_path, const std::string& out_dir) {
  ScenarioConfig config = load_scenario(config_path);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", out_dir, ec.message()));
  return config;
}

}  // namespace

RunOutcome run_scenario(const RunRequest& request, std::ostream& out, std::ostream& err) {
  try {
    ScenarioConfig config = load_with_dir(request.config_path, request.out_dir);
    if (request.seed) config.engine.seed = *request.seed;
    if (request.horizon_s) config.engine.horizon_s = *request.horizon_s;
    Engine engine(build_world(config), config.engine);
    return execute(engine, config, request.out_dir, request.dump_epochs, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const PreconditionError& e) {
    err << "invalid scenario: " << e.what() << "\n";
  }
  RunOutcome failed;
  failed.exit_code = kExitUsage;
  return failed;
}

int verify_ledger_dump(const std::string& dump_path, std::ostream& out, std::ostream& err) {
  std::ifstream in(dump_path);
  if (!in) {
    err << fmt::format("cannot read '{}'\n", dump_path);
    return kExitUsage;
  }
  try {
    const LedgerVerification v = verify_ledger(read_epoch_dump(in));
    for (const std::string& line : v.lines) out << line << "\n";
    out << fmt::format("epochs {} max_relative_deviation {:.3e} ({})\n", v.epochs, v.max_relative_deviation,
                       v.worst_statistic.empty() ? "none" : v.worst_statistic);
    const bool ok = v.max_relative_deviation <= 1e-9 && v.check_matches;
    out << (ok ? "OK\n" : "MISMATCH\n");
    return ok ? kExitOk : kExitFailed;
  } catch (const PreconditionError& e) {
    err << "verify-ledger: " << e.what() << "\n";
    return kExitUsage;
  }
}

RunOutcome serve_mode(const ServeRequest& request, std::ostream& out, std::ostream& err) {
  RunOutcome failed;
  failed.exit_code = kExitUsage;
  try {
    ScenarioConfig config = load_with_dir(request.config_path, request.out_dir);
    if (request.wall_clock) config.engine.wall_clock = true;
    const wire::Endpoint bind = wire::parse_endpoint(request.bind.value_or(config.wire.bind));
    wire::Endpoint ws_bind = bind;
    if (request.ws_bind) {
      ws_bind = wire::parse_endpoint(*request.ws_bind);
    } else if (bind.port != 0) {
      ws_bind.port = bind.port + 1;
    }

    World world = build_world(config);
    std::set<RobotId> robot_ids;
    for (const Robot& r : world.robots()) robot_ids.insert(r.id);
    std::set<StationId> station_ids;
    for (const Station& s : world.layout().stations()) station_ids.insert(s.id);

    Engine engine(world, config.engine);
    std::atomic<bool> running{false};

    wire::HubOptions hub_options;
    hub_options.heartbeat_s = config.wire.heartbeat_s;
    hub_options.heartbeat_misses = config.wire.heartbeat_misses;
    hub_options.wire_log = request.wire_log;
    wire::Hub hub(hub_options);
    hub.on_robot_lost = [&](RobotId robot) {
      if (running) engine.post(RobotDisconnected{robot});
    };
    hub.on_station_reply = [&](const wire::StationReply& reply) { engine.post(RemoteStationReply{reply}); };
    hub.on_feed = [&](FeedEvent event) { engine.post(RemoteFeed{std::move(event)}); };

    wire::TcpServer tcp(hub, bind);
    wire::WsBridge ws(hub, ws_bind);
    out << fmt::format("listening tcp={}:{} ws={}:{}\n", bind.host, tcp.port(), ws_bind.host, ws.port());
    out.flush();
    if (request.on_listening) request.on_listening(tcp.port(), ws.port());
    hub.start_heartbeat();

    if (!hub.wait_for(robot_ids, station_ids, config.wire.grace_s) && !config.wire.fallback_in_process) {
      for (RobotId r : robot_ids)
        if (!hub.robot_connected(r)) err << fmt::format("robot {} did not connect\n", r.value);
      hub.stop();
      return failed;
    }
    const bool sync_stations = !config.engine.wall_clock;
    for (RobotId r : robot_ids) {
      if (hub.robot_connected(r)) {
        engine.attach_robot_agent(r, std::make_unique<wire::RemoteRobotAgent>(hub, r));
        out << fmt::format("robot {} remote\n", r.value);
      } else {
        out << fmt::format("robot {} in-process\n", r.value);
      }
    }
    for (StationId s : station_ids) {
      std::unique_ptr<StationEmulator> fallback;
      if (config.wire.fallback_in_process) {
        std::vector<std::string> script;
        if (auto it = config.engine.station_scripts.find(s); it != config.engine.station_scripts.end())
          script = it->second;
        fallback = std::make_unique<StationEmulator>(s, config.engine.t_pick_line, script);
      }
      out << fmt::format("station {} {}\n", s.value, hub.station_connected(s) ? "remote" : "awaiting");
      engine.attach_station_agent(s, std::make_unique<wire::RemoteStationAgent>(hub, s, sync_stations,
                                                                               std::move(fallback)));
    }
    running = true;
    RunOutcome outcome = execute(engine, config, request.out_dir, request.dump_epochs, out);
    running = false;
    ws.stop();
    tcp.stop();
    hub.stop();
    return outcome;
  } catch (const ConfigError& e) {
    err << "serve: " << e.what() << "\n";
  } catch (const PreconditionError& e) {
    err << "invalid scenario: " << e.what() << "\n";
  }
  return failed;
}

}  // namespace rmfs
