#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "rmfs/console/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Robotic mobile fulfillment simulator"};
  app.require_subcommand(1);

  rmfs::RunRequest run;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write events.log, metrics.csv and ledger.csv");
  run_cmd->add_option("--config", run.config_path, "Scenario file")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override [run] seed");
  auto* horizon_opt = run_cmd->add_option("--horizon", horizon, "Override [run] horizon_s")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--out", run.out_dir, "Output directory")->capture_default_str();
  run_cmd->add_flag("--dump-epochs", run.dump_epochs, "Also write epochs.txt for verify-ledger");

  std::string dump_path;
  auto* verify_cmd = app.add_subcommand("verify-ledger", "Recompute ledger statistics from an epoch dump");
  verify_cmd->add_option("--dump", dump_path, "Epoch dump written by run")->required();

  rmfs::ServeRequest serve;
  std::string bind;
  std::string ws_bind;
  auto* serve_cmd = app.add_subcommand("serve", "Run a scenario with robots and stations on the wire");
  serve_cmd->add_option("--config", serve.config_path, "Scenario file")->required();
  auto* bind_opt = serve_cmd->add_option("--bind", bind, "TCP listener HOST:PORT");
  auto* ws_opt = serve_cmd->add_option("--ws-bind", ws_bind, "Station websocket HOST:PORT (default: TCP port + 1)");
  serve_cmd->add_flag("--wall-clock", serve.wall_clock, "Pace events against the wall clock");
  serve_cmd->add_option("--out", serve.out_dir, "Output directory")->capture_default_str();
  serve_cmd->add_flag("--dump-epochs", serve.dump_epochs, "Also write epochs.txt for verify-ledger");

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) {
    if (*seed_opt) run.seed = seed;
    if (*horizon_opt) run.horizon_s = horizon;
    return rmfs::run_scenario(run, std::cout, std::cerr).exit_code;
  }
  if (*verify_cmd) return rmfs::verify_ledger_dump(dump_path, std::cout, std::cerr);
  if (*bind_opt) serve.bind = bind;
  if (*ws_opt) serve.ws_bind = ws_bind;
  if (const char* tee = std::getenv("RMFS_WIRE_LOG")) serve.wire_log = tee;
  return rmfs::serve_mode(serve, std::cout, std::cerr).exit_code;
}
