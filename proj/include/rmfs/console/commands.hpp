#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "rmfs/sim/metrics.hpp"

namespace rmfs {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;  // run aborted or verification failed
inline constexpr int kExitUsage = 2;   // bad config, flags or input file

struct RunRequest {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon_s;
  std::string out_dir = "out";
  bool dump_epochs = false;  // also write epochs.txt for verify-ledger
};

struct RunOutcome {
  int exit_code = kExitOk;
  RunResult result;
  MetricsReport report;
};

// Writes events.log, metrics.csv and ledger.csv into out_dir, plus
// epochs.txt when asked and the ledger is enabled. Diagnostics go to `err`.
RunOutcome run_scenario(const RunRequest& request, std::ostream& out, std::ostream& err);

// Re-derives every ledger statistic from an epoch dump and compares.
int verify_ledger_dump(const std::string& dump_path, std::ostream& out, std::ostream& err);

struct ServeRequest {
  std::string config_path;
  std::optional<std::string> bind;     // overrides [wire] bind
  std::optional<std::string> ws_bind;  // defaults to the TCP port + 1, or ephemeral for port 0
  bool wall_clock = false;
  std::string out_dir = "out";
  bool dump_epochs = false;
  std::string wire_log;  // raw frame tee; empty = off
  // Called once both listeners are up, with their bound ports.
  std::function<void(int tcp_port, int ws_port)> on_listening;
};

// Listens for robots and stations, waits up to the grace period for the
// configured agents, falls back to in-process agents if allowed, then runs
// the scenario like run_scenario.
RunOutcome serve_mode(const ServeRequest& request, std::ostream& out, std::ostream& err);

}  // namespace rmfs
