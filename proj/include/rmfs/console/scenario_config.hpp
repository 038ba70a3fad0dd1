#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmfs/sim/engine.hpp"
#include "rmfs/world/layout.hpp"
#include "rmfs/world/world.hpp"

namespace rmfs {

struct WireConfig {
  std::string bind = "127.0.0.1:7700";
  double grace_s = 5.0;             // wait this long for agents before falling back
  bool fallback_in_process = true;  // missing agents run in-process after the grace period
  double heartbeat_s = 5.0;
  int heartbeat_misses = 3;
};

struct PodSpec {
  PodId id;
  Coord at;
  int face_rows = 2;
  int face_cols = 3;
  int capacity = 10;
  std::optional<Coord> home;
  struct Slot {
    int row = 0;
    int col = 0;
    SkuId sku;
    int count = 0;
  };
  std::vector<Slot> contents;
};

struct RobotSpec {
  RobotId id;
  Coord at;
  int heading = 0;
};

struct ScenarioConfig {
  LayoutConfig layout;
  Kinematics kinematics;
  std::vector<PodSpec> pods;
  std::vector<RobotSpec> robots;
  double pickup_fault_rate = 0.0;
  EngineOptions engine;
  std::vector<long> checkpoints{100, 1000, 10000};
  WireConfig wire;
};

// INI text with sections run, layout, kinematics, robots, plugins, orders,
// ledger, wire plus numbered station.N, pod.N, robot.N, order.N, receipt.N.
// Unknown sections or keys raise ConfigError naming the key path.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

World build_world(const ScenarioConfig& config);

}  // namespace rmfs
