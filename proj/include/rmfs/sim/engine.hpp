#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rmfs/gateway/order_gateway.hpp"
#include "rmfs/gateway/order_generator.hpp"
#include "rmfs/ledger/cost_ledger.hpp"
#include "rmfs/planner/reservation_table.hpp"
#include "rmfs/plugins/plugins.hpp"
#include "rmfs/sim/agents.hpp"
#include "rmfs/sim/event_log.hpp"
#include "rmfs/sim/event_queue.hpp"
#include "rmfs/world/world.hpp"

namespace rmfs {

struct LedgerOptions {
  bool enabled = true;
  long burn_in = 100;
  CostMetric metric = CostMetric::Hops;
  long target_epochs = 0;  // stop the run once this many epochs are recorded; 0 = no target
};

struct EngineOptions {
  double horizon_s = 7200.0;
  std::uint64_t seed = 1;
  PluginBinding plugins;
  GeneratorConfig generator;
  std::optional<std::uint64_t> feed_seed;  // defaults to seed
  std::vector<FeedEvent> scripted_feed;
  std::map<StationId, std::vector<std::string>> station_scripts;
  double t_pick_line = 5.0;
  int pickup_retries = 3;
  double pickup_fault_rate = 0.0;  // in-process robots only
  int replan_limit = 5;
  LedgerOptions ledger;
  bool keep_log_lines = true;
  bool wall_clock = false;
  double wall_speed = 1.0;  // simulated seconds per wall-clock second
};

// Kinematics, start heading and fault stream of a robot, as the in-process
// agent would get them.
RobotProfile robot_profile(const World& world, const EngineOptions& options, RobotId robot);

// Inputs that reach the engine from other threads.
struct RobotDisconnected {
  RobotId robot;
};
struct RemoteStationReply {
  wire::StationReply reply;
};
struct RemoteFeed {
  FeedEvent event;  // time is ignored; it arrives now
};
using EngineCommand = std::variant<RobotDisconnected, RemoteStationReply, RemoteFeed>;

enum class RequestKind { Extract, Insert };

struct Request {
  RequestId id;
  RequestKind kind = RequestKind::Extract;
  TransferId transfer;
  int move = 0;
  SkuId sku;
  int remaining = 0;
  StationId station;
  std::optional<OrderId> order;
  std::optional<BundleId> bundle;
  std::optional<PodId> pod;  // inserts are bound at RPS time
  int compartment = -1;
  double created = 0.0;
  int requeues = 0;
  std::optional<TaskId> task;
};

enum class TaskKind { Extraction, Insertion, Store, Rest };
std::string_view to_string(TaskKind kind);

enum class TaskPhase { Open, ToPod, ToStation, AtStation, AwaitStore, ToStorage, ToDwelling, Done };
std::string_view to_string(TaskPhase phase);

struct Task {
  TaskId id;
  TaskKind kind = TaskKind::Extraction;
  PodId pod;
  StationId station;
  std::vector<RequestId> requests;
  WaypointId target = -1;  // storage place or dwelling point
  std::optional<RobotId> robot;
  double created = 0.0;
  double assigned_at = 0.0;
  TaskPhase phase = TaskPhase::Open;
  int pickup_attempts = 0;
  int visit_served = 0;  // requests completed during this station visit
};

struct RunMetrics {
  long events = 0;
  long completed_orders = 0;
  long accepted_orders = 0;
  long completed_receipts = 0;
  long picked_units = 0;
  long pod_visits = 0;         // pick-station visits finished
  long served_in_visits = 0;   // pick requests completed over those visits
  long requeues = 0;
  long parked_orders = 0;
  long rps_infeasible = 0;
  long replan_failures = 0;
  long retreats = 0;
  long pickup_failures = 0;
  long rejected_decisions = 0;
  double busy_robot_seconds = 0.0;
  double end_time = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

struct RunResult {
  RunMetrics metrics;
  std::uint64_t log_hash = 0;
  long log_records = 0;
};

// Single-owner discrete-event core. Every mutation of the world happens on
// the thread calling step()/run(); other threads talk to it through post().
class Engine {
 public:
  Engine(World world, EngineOptions options);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Agents default to in-process emulators; replace before initialize().
  void attach_robot_agent(RobotId robot, std::unique_ptr<RobotAgent> agent);
  void attach_station_agent(StationId station, std::unique_ptr<StationAgent> agent);
  void set_log_sink(std::ostream* sink) { log_.set_sink(sink); }
  // Called after every processed event.
  void set_observer(std::function<void(const Engine&)> observer) { observer_ = std::move(observer); }

  void post(EngineCommand command);

  void initialize();
  // Processes one event. Returns false once the run is over.
  bool step();
  RunResult run();

  double now() const { return queue_.now(); }
  const World& world() const { return world_; }
  const EventLog& log() const { return log_; }
  const OrderGateway& gateway() const { return gateway_; }
  const ReservationTable& reservations() const { return table_; }
  const RunMetrics& metrics() const { return metrics_; }
  const EngineOptions& options() const { return options_; }
  const CostLedger* ledger() const { return ledger_.get(); }
  const EpochPairing* pairing() const { return pairing_.get(); }
  const std::map<TaskId, Task>& tasks() const { return tasks_; }
  const std::map<RequestId, Request>& requests() const { return requests_; }
  std::vector<RequestId> station_queue(StationId station) const;
  // Paths reserved so far, for conflict scans.
  const std::vector<TimedPath>& executed_paths() const { return history_; }
  void keep_path_history(bool keep) { keep_history_ = keep; }

 private:
  struct RobotRuntime {
    std::optional<TaskId> task;
    TimedPath path;
    bool has_path = false;
    std::size_t step = 0;      // index of the node the robot is on
    std::size_t run_end = 0;   // last node of the Go command in flight
    long generation = 0;       // bumps invalidate scheduled events
    long next_msg = 1;
    bool needs_plan = false;
    WaypointId leg_goal = -1;
    std::optional<WaypointId> retreat;  // detour target after repeated planning failures
    int failures = 0;
    bool busy = false;  // a command is in flight or a wait is scheduled
    double busy_since = 0.0;
    bool wait_logged = false;
  };
  struct StationRuntime {
    std::deque<RequestId> queue;  // unclaimed requests in service order
    std::set<OrderId> orders;
    std::set<BundleId> bundles;
    std::optional<TaskId> present;
    long next_msg = 1;
    std::optional<RequestId> current;
  };

  // Event handlers.
  void handle(const Event& e);
  void on_robot_status(RobotId robot, long value, EventKind kind);
  void drain_commands();
  // Simulated time at which input from another thread takes effect.
  double arrival_time() const;
  void schedule_next_order();
  void schedule_next_receipt();

  // Decision pass and its stages.
  void decide();
  void stage_feed();
  void stage_roa_rps();
  void stage_poa();
  void stage_insertion_tasks(int& budget);
  void stage_pps(int& budget);
  void stage_pr();
  void stage_ta();
  void stage_pp();

  // Robot execution.
  void advance(RobotId robot);
  void send(RobotId robot, wire::TaskPayload payload);
  void leg_complete(RobotId robot);
  void finish_task(RobotId robot);
  void disconnect(RobotId robot);
  void set_leg(RobotId robot, WaypointId goal);

  // Stations.
  void present_next(StationId station);
  void on_station_reply(const wire::StationReply& reply);
  void release_check(StationId station);
  std::optional<QueuedNeed> next_need(StationId station) const;

  // Helpers.
  std::vector<WaypointId> free_storage_places() const;
  std::vector<WaypointId> free_dwelling_points(std::optional<RobotId> except = std::nullopt) const;
  std::vector<RobotId> idle_robots() const;
  int station_inbound(StationId station) const;
  long committed(const SkuId& sku) const;
  bool pod_claimed(PodId pod) const { return pod_task_.count(pod) > 0; }
  void record(std::string_view kind, std::string_view payload);
  void record_init(std::string_view kind, std::string_view payload);
  std::string where(WaypointId w) const;
  void abort(const std::string& reason);
  TaskId new_task(TaskKind kind);

  World world_;
  EngineOptions options_;
  RngStreams streams_;
  PluginSet plugins_;
  EventQueue queue_;
  EventLog log_;
  ReservationTable table_;
  OrderGateway gateway_;
  std::unique_ptr<OrderGenerator> generator_;
  std::unique_ptr<CostLedger> ledger_;
  std::unique_ptr<EpochPairing> pairing_;
  std::map<RobotId, std::unique_ptr<RobotAgent>> robot_agents_;
  std::map<StationId, std::unique_ptr<StationAgent>> station_agents_;
  std::map<RobotId, RobotRuntime> robots_;
  std::map<StationId, StationRuntime> stations_;
  std::map<TaskId, Task> tasks_;
  std::map<RequestId, Request> requests_;
  std::map<PodId, TaskId> pod_task_;
  std::map<OrderId, StationId> order_station_;
  std::deque<PickOrder> order_backlog_;
  std::set<OrderId> parked_;
  std::deque<ReplenishmentBundle> bundle_backlog_;
  std::deque<std::pair<ReplenishmentBundle, StationId>> awaiting_rps_;
  std::set<BundleId> rps_warned_;
  std::map<BundleId, int> bundle_parts_;  // insert requests still open per bundle
  std::map<StationId, std::vector<wire::StationReply>> replies_;
  std::deque<FeedEvent> remote_feed_;
  std::atomic<int> async_pending_{0};  // station infos sent without a synchronous reply
  std::vector<TimedPath> history_;
  bool keep_history_ = false;
  std::function<void(const Engine&)> observer_;
  std::mutex inbox_mutex_;
  std::vector<EngineCommand> inbox_;
  long current_seq_ = 0;
  int next_task_ = 1;
  int next_request_ = 1;
  std::optional<FeedEvent> pending_order_;
  std::optional<FeedEvent> pending_receipt_;
  RunMetrics metrics_;
  bool initialized_ = false;
  bool finished_ = false;
  bool dirty_ = true;
  double wall_start_ = 0.0;
  double last_prune_ = 0.0;
};

}  // namespace rmfs
