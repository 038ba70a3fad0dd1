#include "rmfs/sim/engine.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "rmfs/core/error.hpp"
#include "rmfs/plugins/validator.hpp"

namespace rmfs {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Extraction: return "Extraction";
    case TaskKind::Insertion: return "Insertion";
    case TaskKind::Store: return "Store";
    case TaskKind::Rest: return "Rest";
  }
  return "?";
}

std::string_view to_string(TaskPhase phase) {
  switch (phase) {
    case TaskPhase::Open: return "Open";
    case TaskPhase::ToPod: return "ToPod";
    case TaskPhase::ToStation: return "ToStation";
    case TaskPhase::AtStation: return "AtStation";
    case TaskPhase::AwaitStore: return "AwaitStore";
    case TaskPhase::ToStorage: return "ToStorage";
    case TaskPhase::ToDwelling: return "ToDwelling";
    case TaskPhase::Done: return "Done";
  }
  return "?";
}

namespace {

double wall_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::string contents_of(const Pod& pod) {
  std::vector<std::string> parts;
  for (const Compartment& c : pod.compartments) {
    parts.push_back(c.sku ? fmt::format("{}:{}", *c.sku, c.count) : std::string("-"));
  }
  return fmt::format("{}", fmt::join(parts, ","));
}

std::string lines_of(const std::vector<OrderLine>& lines) {
  std::vector<std::string> parts;
  for (const OrderLine& l : lines) parts.push_back(fmt::format("{}x{}", l.sku, l.quantity));
  return fmt::format("{}", fmt::join(parts, ","));
}

std::string ids_of(const std::vector<RequestId>& ids) {
  std::vector<int> v;
  for (RequestId id : ids) v.push_back(id.value);
  return fmt::format("[{}]", fmt::join(v, ","));
}

}  // namespace

Engine::Engine(World world, EngineOptions options)
    : world_(std::move(world)),
      options_(std::move(options)),
      streams_(options_.seed),
      plugins_(make_plugins(options_.plugins, streams_)),
      log_(options_.keep_log_lines),
      table_(world_.layout().cell_count()) {
  const Layout& layout = world_.layout();
  if (layout.dwelling_points().size() < world_.robots().size()) {
    throw ConfigError(fmt::format("layout has {} dwelling points for {} robots", layout.dwelling_points().size(),
                                  world_.robots().size()));
  }
  for (const Robot& r : world_.robots()) {
    if (!layout.is_waypoint(r.waypoint)) throw ConfigError(fmt::format("robot {} is off the grid", r.id.value));
    for (const Robot& o : world_.robots()) {
      if (o.id < r.id && o.waypoint == r.waypoint) {
        throw ConfigError(fmt::format("robots {} and {} start on the same waypoint", o.id.value, r.id.value));
      }
    }
  }
  if (auto issues = world_.check_invariants(); !issues.empty()) throw ConfigError(issues.front());
}

Engine::~Engine() = default;

void Engine::attach_robot_agent(RobotId robot, std::unique_ptr<RobotAgent> agent) {
  if (initialized_) throw PreconditionError("agents are attached before initialize()");
  if (!agent) throw PreconditionError(fmt::format("robot {}: null agent", robot.value));
  world_.robot(robot);
  robot_agents_[robot] = std::move(agent);
}

void Engine::attach_station_agent(StationId station, std::unique_ptr<StationAgent> agent) {
  if (initialized_) throw PreconditionError("agents are attached before initialize()");
  if (!agent) throw PreconditionError(fmt::format("station {}: null agent", station.value));
  world_.layout().station(station);
  station_agents_[station] = std::move(agent);
}

void Engine::post(EngineCommand command) {
  std::lock_guard<std::mutex> lock(inbox_mutex_);
  inbox_.push_back(std::move(command));
}

void Engine::record(std::string_view kind, std::string_view payload) {
  log_.record(queue_.now(), current_seq_, kind, payload);
}

void Engine::record_init(std::string_view kind, std::string_view payload) { log_.record(0.0, 0, kind, payload); }

std::string Engine::where(WaypointId w) const { return world_.layout().describe(w); }

TaskId Engine::new_task(TaskKind kind) {
  Task t;
  t.id = TaskId{next_task_++};
  t.kind = kind;
  t.created = now();
  tasks_[t.id] = t;
  return t.id;
}

RobotProfile robot_profile(const World& world, const EngineOptions& options, RobotId robot) {
  RobotProfile profile;
  profile.kinematics = world.kinematics();
  profile.spacing_m = world.layout().spacing_m();
  profile.heading = world.robot(robot).heading;
  profile.pickup_fault_rate = options.pickup_fault_rate;
  profile.fault_seed = robot_fault_seed(options.seed, robot);
  return profile;
}

void Engine::initialize() {
  if (initialized_) return;
  initialized_ = true;
  const Layout& layout = world_.layout();
  const Kinematics& kin = world_.kinematics();

  for (const Robot& r : world_.robots()) {
    robots_[r.id] = RobotRuntime{};
    if (!robot_agents_.count(r.id)) {
      robot_agents_[r.id] = std::make_unique<InProcessRobot>(r.id, robot_profile(world_, options_, r.id));
    }
    table_.release(r.id, r.waypoint, 0.0);
  }
  for (const Station& s : layout.stations()) {
    stations_[s.id] = StationRuntime{};
    if (!station_agents_.count(s.id)) {
      std::vector<std::string> script;
      if (auto it = options_.station_scripts.find(s.id); it != options_.station_scripts.end()) script = it->second;
      station_agents_[s.id] = std::make_unique<InProcessStation>(s.id, options_.t_pick_line, script);
    }
  }
  if (options_.ledger.enabled) {
    ledger_ = std::make_unique<CostLedger>(CostFunctions::from_layout(layout, options_.ledger.metric, kin),
                                           static_cast<int>(world_.pods().size()));
    pairing_ = std::make_unique<EpochPairing>(*ledger_, options_.ledger.burn_in);
  }
  const GeneratorConfig& gen = options_.generator;
  if (gen.rate_per_hour > 0.0 || gen.receipt_rate_per_hour > 0.0) {
    const RngStreams feed(options_.feed_seed.value_or(options_.seed));
    generator_ = std::make_unique<OrderGenerator>(gen, feed.stream("feed.orders"), feed.stream("feed.receipts"));
  }

  record_init("Init", fmt::format("layout {}x{} spacing={} seed={} horizon={}", layout.rows(), layout.cols(),
                                  layout.spacing_m(), options_.seed, options_.horizon_s));
  const PluginBinding& p = options_.plugins;
  record_init("Init", fmt::format("plugins roa={} poa={} rps={} pps={} pr={} ta={} pp={} order_slots={}", p.roa,
                                  p.poa, p.rps, p.pps, p.pr, p.ta, p.pp, p.order_slots));
  for (const Station& s : layout.stations()) {
    record_init("Init", fmt::format("station {} kind={} at={} capacity={}", s.id.value, to_string(s.kind),
                                    where(s.waypoint), s.capacity));
  }
  for (const Pod& pod : world_.pods()) {
    record_init("Init", fmt::format("pod {} location={} contents={}", pod.id.value, describe(pod.location),
                                    contents_of(pod)));
  }
  for (const Robot& r : world_.robots()) {
    record_init("Init", fmt::format("robot {} at={} heading={}", r.id.value, where(r.waypoint), r.heading));
  }

  if (options_.horizon_s <= 0.0) {
    finished_ = true;
    return;
  }
  for (std::size_t i = 0; i < options_.scripted_feed.size(); ++i) {
    const FeedEvent& f = options_.scripted_feed[i];
    const bool order = std::holds_alternative<PickOrder>(f.item);
    queue_.schedule(f.time, order ? EventKind::OrderArrival : EventKind::BundleReceipt, -1, static_cast<long>(i));
  }
  schedule_next_order();
  schedule_next_receipt();
  queue_.schedule(0.0, EventKind::DecisionDue);
  if (options_.wall_clock) wall_start_ = wall_seconds();
}

void Engine::schedule_next_order() {
  if (!generator_) return;
  pending_order_ = generator_->next_order();
  if (pending_order_) queue_.schedule(pending_order_->time, EventKind::OrderArrival, -1, -1);
}

void Engine::schedule_next_receipt() {
  if (!generator_) return;
  pending_receipt_ = generator_->next_receipt();
  if (pending_receipt_) queue_.schedule(pending_receipt_->time, EventKind::BundleReceipt, -1, -1);
}

std::vector<RequestId> Engine::station_queue(StationId station) const {
  const auto& q = stations_.at(station).queue;
  return {q.begin(), q.end()};
}

void Engine::abort(const std::string& reason) {
  metrics_.aborted = true;
  metrics_.abort_reason = reason;
  log_.abort_marker(now(), reason);
  log_.flush();
  finished_ = true;
}

void Engine::drain_commands() {
  std::vector<EngineCommand> inbox;
  {
    std::lock_guard<std::mutex> lock(inbox_mutex_);
    inbox.swap(inbox_);
  }
  for (EngineCommand& c : inbox) {
    if (auto* d = std::get_if<RobotDisconnected>(&c)) {
      if (world_.robot(d->robot).available) {
        disconnect(d->robot);
        dirty_ = true;
      }
    } else if (auto* r = std::get_if<RemoteStationReply>(&c)) {
      const double t = std::max(arrival_time(), r->reply.time.value_or(0.0));
      replies_[r->reply.station].push_back(r->reply);
      queue_.schedule(t, EventKind::StationConfirm, r->reply.station.value, r->reply.msg_id);
      if (async_pending_ > 0) --async_pending_;
    } else if (auto* f = std::get_if<RemoteFeed>(&c)) {
      remote_feed_.push_back(std::move(f->event));
      const bool order = std::holds_alternative<PickOrder>(remote_feed_.back().item);
      queue_.schedule(arrival_time(), order ? EventKind::OrderArrival : EventKind::BundleReceipt, -1, -2);
    }
  }
}

double Engine::arrival_time() const {
  if (!options_.wall_clock) return now();
  return std::max(now(), (wall_seconds() - wall_start_) * options_.wall_speed);
}

bool Engine::step() {
  if (!initialized_) initialize();
  if (finished_) return false;
  while (true) {
    drain_commands();
    if (queue_.empty()) {
      // Wall-clock runs stay open for remote input until the horizon.
      const bool open = options_.wall_clock ? arrival_time() <= options_.horizon_s : async_pending_ > 0;
      if (open) {
        std::this_thread::sleep_for(std::chrono::milliseconds(options_.wall_clock ? 50 : 5));
        continue;
      }
      finished_ = true;
      return false;
    }
    if (options_.wall_clock) {
      const double due = wall_start_ + queue_.top().time / options_.wall_speed;
      const double wait = due - wall_seconds();
      if (wait > 0.0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(std::min(wait, 0.05)));
        continue;
      }
    }
    break;
  }
  if (queue_.top().time > options_.horizon_s) {
    finished_ = true;
    return false;
  }
  if (ledger_ && options_.ledger.target_epochs > 0 && ledger_->size() >= options_.ledger.target_epochs) {
    finished_ = true;
    return false;
  }
  const Event e = queue_.pop();
  current_seq_ = e.seq;
  ++metrics_.events;
  try {
    handle(e);
    if (dirty_) decide();
  } catch (const std::exception& ex) {
    abort(ex.what());
    return false;
  }
  if (observer_) observer_(*this);
  return true;
}

RunResult Engine::run() {
  initialize();
  while (step()) {
  }
  metrics_.end_time = now();
  for (auto& [id, rt] : robots_) {
    if (rt.task && tasks_.at(*rt.task).kind != TaskKind::Rest) metrics_.busy_robot_seconds += now() - rt.busy_since;
  }
  log_.flush();
  return RunResult{metrics_, log_.hash(), log_.count()};
}

// ---------------------------------------------------------------------------
// Events

void Engine::handle(const Event& e) {
  dirty_ = true;
  switch (e.kind) {
    case EventKind::RobotArrived:
    case EventKind::RotationDone:
    case EventKind::LiftDone:
    case EventKind::Resume: {
      const RobotId r{e.subject};
      if (robots_.at(r).generation != e.token || !world_.robot(r).available) {
        dirty_ = false;
        return;
      }
      on_robot_status(r, e.value, e.kind);
      return;
    }
    case EventKind::OrderArrival:
    case EventKind::BundleReceipt: {
      FeedEvent f;
      if (e.token >= 0) {
        f = options_.scripted_feed.at(e.token);
      } else if (e.token == -2) {
        f = std::move(remote_feed_.front());
        remote_feed_.pop_front();
      } else {
        f = e.kind == EventKind::OrderArrival ? *pending_order_ : *pending_receipt_;
      }
      f.time = now();
      if (const auto* order = std::get_if<PickOrder>(&f.item)) {
        record(to_string(e.kind), fmt::format("order={} lines={}", order->id.value, lines_of(order->lines)));
      } else {
        for (const ReplenishmentBundle& b : std::get<std::vector<ReplenishmentBundle>>(f.item)) {
          record(to_string(e.kind), fmt::format("bundle={} item={} qty={}", b.id.value, b.sku, b.quantity));
        }
      }
      gateway_.ingest(std::move(f));
      if (e.token == -1) {
        if (e.kind == EventKind::OrderArrival) {
          schedule_next_order();
        } else {
          schedule_next_receipt();
        }
      }
      return;
    }
    case EventKind::StationConfirm: {
      const StationId s{e.subject};
      auto& pending = replies_[s];
      auto it = std::find_if(pending.begin(), pending.end(),
                             [&](const wire::StationReply& r) { return r.msg_id == e.token; });
      if (it == pending.end()) return;
      const wire::StationReply reply = *it;
      pending.erase(it);
      on_station_reply(reply);
      return;
    }
    case EventKind::DecisionDue:
    case EventKind::FeedPoll:
      return;
  }
}

void Engine::on_robot_status(RobotId r, long value, EventKind kind) {
  RobotRuntime& rt = robots_.at(r);
  Robot& bot = world_.robot(r);
  if (kind == EventKind::Resume) {
    rt.busy = false;
    advance(r);
    return;
  }
  if (kind == EventKind::RotationDone) {
    bot.heading = static_cast<int>(value);
    record("RotationDone", fmt::format("robot={} heading={}", r.value, bot.heading));
    rt.busy = false;
    advance(r);
    return;
  }
  if (kind == EventKind::RobotArrived) {
    const std::size_t index = static_cast<std::size_t>(value);
    bot.waypoint = rt.path.steps.at(index).waypoint;
    rt.step = index;
    record("RobotArrived", fmt::format("robot={} at={}", r.value, where(bot.waypoint)));
    if (index == rt.run_end) {
      rt.busy = false;
      bot.state = RobotState::Idle;
      advance(r);
    }
    return;
  }

  // LiftDone: pickup or setdown finished.
  rt.busy = false;
  const bool ok = value != 0;
  Task& task = tasks_.at(*rt.task);
  Pod& pod = world_.pod(task.pod);
  if (task.phase == TaskPhase::ToPod) {
    if (!ok) {
      ++metrics_.pickup_failures;
      ++task.pickup_attempts;
      record("PickupFailed", fmt::format("robot={} pod={} attempt={}", r.value, pod.id.value, task.pickup_attempts));
      if (task.pickup_attempts <= options_.pickup_retries) {
        send(r, wire::Pickup{});
        return;
      }
      record("TaskRequeued", fmt::format("task={} robot={}", task.id.value, r.value));
      metrics_.busy_robot_seconds += now() - rt.busy_since;
      task.robot.reset();
      task.phase = TaskPhase::Open;
      task.pickup_attempts = 0;
      rt.task.reset();
      bot.state = RobotState::Idle;
      return;
    }
    const WaypointId place = std::get<InStorage>(pod.location).place;
    pod.location = CarriedBy{r};
    bot.carrying = pod.id;
    bot.state = RobotState::Idle;
    record("PodPickedUp", fmt::format("robot={} pod={} from={} station={} location={}", r.value, pod.id.value,
                                      where(place), task.station.value, describe(pod.location)));
    if (pairing_) pairing_->on_departure(pod.id, place, task.station);
    task.phase = TaskPhase::ToStation;
    set_leg(r, world_.layout().station(task.station).waypoint);
    return;
  }
  if (task.phase == TaskPhase::ToStorage) {
    if (!ok) {
      record("SetdownFailed", fmt::format("robot={} pod={}", r.value, pod.id.value));
      send(r, wire::Setdown{});
      return;
    }
    pod.location = InStorage{task.target};
    bot.carrying.reset();
    bot.state = RobotState::Idle;
    record("PodStored", fmt::format("robot={} pod={} at={} location={}", r.value, pod.id.value, where(task.target),
                                    describe(pod.location)));
    finish_task(r);
    return;
  }
  throw PreconditionError(fmt::format("lift finished for robot {} in phase {}", r.value, to_string(task.phase)));
}

// ---------------------------------------------------------------------------
// Robot execution

void Engine::send(RobotId r, wire::TaskPayload payload) {
  RobotRuntime& rt = robots_.at(r);
  Robot& bot = world_.robot(r);
  wire::TaskMessage msg{r, rt.next_msg++, std::move(payload), now()};
  std::vector<wire::StatusMessage> replies;
  try {
    replies = robot_agents_.at(r)->execute(msg);
  } catch (const AgentDisconnected& e) {
    disconnect(r);
    return;
  }
  const int expected = expected_replies(msg.payload);
  for (const wire::StatusMessage& s : replies) {
    if (const auto* err = std::get_if<wire::Error>(&s.payload)) {
      record("RobotError", fmt::format("robot={} msg={} text={}", r.value, s.msg_id, err->text));
      disconnect(r);
      return;
    }
  }
  if (static_cast<int>(replies.size()) != expected) {
    record("RobotError", fmt::format("robot={} msg={} replies={} expected={}", r.value, msg.msg_id, replies.size(),
                                     expected));
    disconnect(r);
    return;
  }
  rt.busy = true;
  std::size_t index = rt.step;
  for (const wire::StatusMessage& s : replies) {
    const double t = std::max(now(), s.time.value_or(now()));
    if (std::holds_alternative<wire::WaypointTag>(s.payload)) {
      queue_.schedule(t, EventKind::RobotArrived, r.value, rt.generation, static_cast<long>(++index));
    } else if (std::holds_alternative<wire::Orientation>(s.payload)) {
      const auto& turn = std::get<wire::Turn>(msg.payload);
      const int heading = ((bot.heading - turn.degrees / 90) % 4 + 4) % 4;
      queue_.schedule(t, EventKind::RotationDone, r.value, rt.generation, heading);
    } else if (const auto* p = std::get_if<wire::PickupSuccess>(&s.payload)) {
      queue_.schedule(t, EventKind::LiftDone, r.value, rt.generation, p->ok ? 1 : 0);
    } else if (const auto* d = std::get_if<wire::SetdownSuccess>(&s.payload)) {
      queue_.schedule(t, EventKind::LiftDone, r.value, rt.generation, d->ok ? 1 : 0);
    }
  }
}

void Engine::advance(RobotId r) {
  RobotRuntime& rt = robots_.at(r);
  Robot& bot = world_.robot(r);
  if (!rt.has_path) return;
  const auto& steps = rt.path.steps;
  const std::size_t last = steps.size() - 1;
  const std::size_t i = rt.step;
  if (i == last) {
    rt.has_path = false;
    leg_complete(r);
    return;
  }
  const PathStep& s = steps[i];
  if (s.turn_start > now()) {
    rt.busy = true;
    queue_.schedule(s.turn_start, EventKind::Resume, r.value, rt.generation);
    return;
  }
  if (bot.heading != s.heading_after) {
    bot.state = RobotState::Turning;
    const int degrees = turn_degrees(bot.heading, s.heading_after);
    record("Command", fmt::format("robot={} Turn degrees={}", r.value, degrees));
    send(r, wire::Turn{degrees});
    return;
  }
  std::size_t k = i + 1;
  while (k < last && steps[k].turn_start == steps[k].arrival && steps[k].heading_after == s.heading_after) ++k;
  wire::Go go;
  std::vector<std::string> cells;
  for (std::size_t j = i + 1; j <= k; ++j) {
    go.waypoints.push_back(steps[j].waypoint);
    cells.push_back(where(steps[j].waypoint));
  }
  rt.run_end = k;
  bot.state = RobotState::Moving;
  record("Command", fmt::format("robot={} Go {}", r.value, fmt::join(cells, ",")));
  send(r, std::move(go));
}

void Engine::set_leg(RobotId r, WaypointId goal) {
  RobotRuntime& rt = robots_.at(r);
  rt.leg_goal = goal;
  rt.needs_plan = true;
  rt.failures = 0;
  rt.wait_logged = false;
}

void Engine::leg_complete(RobotId r) {
  RobotRuntime& rt = robots_.at(r);
  Robot& bot = world_.robot(r);
  if (rt.retreat && bot.waypoint == *rt.retreat) {
    rt.retreat.reset();
    if (rt.task) {
      rt.needs_plan = true;
      rt.failures = 0;
    }
    return;
  }
  if (!rt.task) return;
  Task& task = tasks_.at(*rt.task);
  switch (task.phase) {
    case TaskPhase::ToPod:
      bot.state = RobotState::PickingUp;
      record("Command", fmt::format("robot={} Pickup pod={}", r.value, task.pod.value));
      send(r, wire::Pickup{});
      return;
    case TaskPhase::ToStation: {
      Pod& pod = world_.pod(task.pod);
      pod.location = AtStation{task.station};
      bot.state = RobotState::AtStation;
      task.phase = TaskPhase::AtStation;
      task.visit_served = 0;
      stations_.at(task.station).present = task.id;
      record("PodAtStation",
             fmt::format("robot={} pod={} station={} location={}", r.value, pod.id.value, task.station.value,
                         describe(pod.location)));
      present_next(task.station);
      return;
    }
    case TaskPhase::ToStorage:
      bot.state = RobotState::SettingDown;
      record("Command", fmt::format("robot={} Setdown pod={}", r.value, task.pod.value));
      send(r, wire::Setdown{});
      return;
    case TaskPhase::ToDwelling:
      record("RestReached", fmt::format("robot={} at={}", r.value, where(bot.waypoint)));
      finish_task(r);
      return;
    default:
      throw PreconditionError(fmt::format("robot {} finished a leg in phase {}", r.value, to_string(task.phase)));
  }
}

void Engine::finish_task(RobotId r) {
  RobotRuntime& rt = robots_.at(r);
  Task& task = tasks_.at(*rt.task);
  if (task.kind != TaskKind::Rest) {
    metrics_.busy_robot_seconds += now() - rt.busy_since;
    pod_task_.erase(task.pod);
  }
  tasks_.erase(task.id);
  rt.task.reset();
  world_.robot(r).state = RobotState::Idle;
}

void Engine::disconnect(RobotId r) {
  RobotRuntime& rt = robots_.at(r);
  Robot& bot = world_.robot(r);
  bot.available = false;
  ++rt.generation;
  rt.busy = false;
  rt.has_path = false;
  rt.needs_plan = false;
  rt.retreat.reset();
  table_.release(r, bot.waypoint, now());
  record("Disconnect", fmt::format("robot={} at={}", r.value, where(bot.waypoint)));
  if (!rt.task) return;
  Task& task = tasks_.at(*rt.task);
  rt.task.reset();
  if (task.kind == TaskKind::Rest) {
    tasks_.erase(task.id);
    return;
  }
  metrics_.busy_robot_seconds += now() - rt.busy_since;
  if (!bot.carrying) {
    task.robot.reset();
    task.phase = TaskPhase::Open;
    task.pickup_attempts = 0;
    record("TaskRequeued", fmt::format("task={} robot={}", task.id.value, r.value));
    return;
  }
  // The pod stays on the lost robot; its requests go back to the station.
  StationRuntime& st = stations_.at(task.station);
  for (auto it = task.requests.rbegin(); it != task.requests.rend(); ++it) {
    requests_.at(*it).task.reset();
    st.queue.push_front(*it);
  }
  if (st.present == task.id) st.present.reset();
  record("TaskAbandoned", fmt::format("task={} robot={} pod={} requests={}", task.id.value, r.value,
                                      task.pod.value, ids_of(task.requests)));
  pod_task_.erase(task.pod);
  tasks_.erase(task.id);
}

// ---------------------------------------------------------------------------
// Stations

std::optional<QueuedNeed> Engine::next_need(StationId s) const {
  const StationRuntime& st = stations_.at(s);
  if (st.queue.empty()) return std::nullopt;
  const Request& req = requests_.at(st.queue.front());
  return QueuedNeed{req.kind == RequestKind::Insert, req.sku, req.pod};
}

void Engine::present_next(StationId s) {
  StationRuntime& st = stations_.at(s);
  Task& task = tasks_.at(*st.present);
  const Pod& pod = world_.pod(task.pod);
  while (!task.requests.empty()) {
    Request& req = requests_.at(task.requests.front());
    int compartment = -1;
    int quantity = 0;
    if (req.kind == RequestKind::Extract) {
      int best = 0;
      for (std::size_t i = 0; i < pod.compartments.size(); ++i) {
        const Compartment& c = pod.compartments[i];
        if (c.sku && *c.sku == req.sku && c.count > best) {
          best = c.count;
          compartment = static_cast<int>(i);
        }
      }
      if (compartment < 0) {
        // Nothing left in this pod; the request waits for another one.
        req.task.reset();
        st.queue.push_front(req.id);
        task.requests.erase(task.requests.begin());
        record("Unclaim", fmt::format("request={} pod={}", req.id.value, pod.id.value));
        continue;
      }
      quantity = std::min(req.remaining, best);
    } else {
      compartment = req.compartment;
      quantity = req.remaining;
    }
    const Compartment& target = pod.compartments[compartment];

    wire::StationInfo info;
    info.kind = req.kind == RequestKind::Extract ? wire::InfoKind::Picking : wire::InfoKind::Replenish;
    info.station = s;
    info.msg_id = st.next_msg++;
    info.order = req.order;
    info.bundle = req.bundle;
    info.request = req.id;
    info.item = req.sku;
    info.name = req.sku;
    info.quantity = quantity;
    info.pod = pod.id;
    info.pod_rows = pod.face_rows;
    info.pod_cols = pod.face_cols;
    info.stock = wire::StockLevels{target.capacity * 4 / 5, target.capacity, target.capacity / 5};
    for (const Compartment& c : pod.compartments) {
      info.compartments.push_back(wire::CompartmentInfo{c.row, c.col, c.sku.value_or(""), c.count});
    }
    const wire::CompartmentRef chosen{target.row, target.col};
    if (req.kind == RequestKind::Extract) {
      info.to_pick = chosen;
    } else {
      wire::ReplenishTarget t{chosen, {}};
      for (std::size_t i = 0; i < pod.compartments.size(); ++i) {
        const Compartment& c = pod.compartments[i];
        if (static_cast<int>(i) == compartment) continue;
        const bool same = c.sku && *c.sku == req.sku && c.free() >= quantity;
        const bool empty = !c.sku && c.capacity >= quantity;
        if (same || empty) t.alternatives.push_back(wire::CompartmentRef{c.row, c.col});
      }
      info.to_replenish = std::move(t);
    }
    info.time = now();

    gateway_.expect_reply(Outstanding{s, info.msg_id, req.id, req.transfer, req.move, pod.id, compartment, quantity,
                                      req.kind == RequestKind::Extract});
    st.current = req.id;
    record(info.kind == wire::InfoKind::Picking ? "PickingInfo" : "ReplenishInfo",
           fmt::format("station={} msg={} {}={} request={} item={} qty={} pod={} compartment=({},{})", s.value,
                       info.msg_id, req.order ? "order" : "bundle", req.order ? req.order->value : req.bundle->value,
                       req.id.value, req.sku, quantity, pod.id.value, target.row, target.col));
    std::optional<wire::StationReply> reply = station_agents_.at(s)->present(info);
    if (reply) {
      const double t = std::max(now(), reply->time.value_or(now()));
      replies_[s].push_back(*reply);
      queue_.schedule(t, EventKind::StationConfirm, s.value, reply->msg_id);
    } else {
      ++async_pending_;
    }
    return;
  }
  release_check(s);
}

void Engine::on_station_reply(const wire::StationReply& reply) {
  const StationId s = reply.station;
  record("StationReply", fmt::format("station={} msg={} verdict={}{}", s.value, reply.msg_id,
                                     reply.ok ? "OK" : "Error", reply.ok ? "" : fmt::format(" text={}", reply.error)));
  const ReplyResult res = gateway_.apply_station_reply(reply, world_);
  if (res.outcome == ReplyOutcome::Ignored) {
    record("ReplyIgnored", fmt::format("station={} msg={}", s.value, reply.msg_id));
    return;
  }
  StationRuntime& st = stations_.at(s);
  st.current.reset();
  const Outstanding& info = *res.info;
  Request& req = requests_.at(info.request);
  Task& task = tasks_.at(*st.present);
  auto drop_from_task = [&] {
    task.requests.erase(std::find(task.requests.begin(), task.requests.end(), req.id));
  };

  if (res.outcome == ReplyOutcome::Requeue) {
    ++req.requeues;
    ++metrics_.requeues;
    req.task.reset();
    drop_from_task();
    st.queue.push_back(req.id);
    record("Requeue", fmt::format("request={} station={} position={} requeues={} inventory=unchanged", req.id.value,
                                  s.value, st.queue.size(), req.requeues));
    present_next(s);
    return;
  }

  const Pod& pod = world_.pod(info.pod);
  const Compartment& c = pod.compartments[info.compartment];
  record("Inventory", fmt::format("pod={} compartment=({},{}) item={} {}->{}", pod.id.value, c.row, c.col, req.sku,
                                  res.before, res.after));
  const Transfer& t = gateway_.transfer(info.transfer);
  const Move& mv = t.moves.at(info.move);
  record("MoveDone", fmt::format("transfer={} item={} done={}/{}", t.id.value, mv.sku, mv.done, mv.quantity));
  req.remaining -= info.quantity;
  if (info.pick) metrics_.picked_units += info.quantity;
  if (req.remaining <= 0) {
    drop_from_task();
    if (req.kind == RequestKind::Extract) ++task.visit_served;
    if (req.bundle) {
      if (--bundle_parts_[*req.bundle] <= 0) {
        bundle_parts_.erase(*req.bundle);
        st.bundles.erase(*req.bundle);
      }
    }
    requests_.erase(req.id);
  }
  if (res.transfer_done) {
    record("TransferDone", fmt::format("transfer={} kind={} state={}", t.id.value, to_string(t.kind),
                                       to_string(t.state)));
    if (t.order) {
      st.orders.erase(*t.order);
      order_station_.erase(*t.order);
      ++metrics_.completed_orders;
    } else {
      ++metrics_.completed_receipts;
    }
  }
  present_next(s);
}

void Engine::release_check(StationId s) {
  StationRuntime& st = stations_.at(s);
  Task& task = tasks_.at(*st.present);
  const Pod& pod = world_.pod(task.pod);
  const ReleaseDecision decision = pod_release_check(pod, next_need(s));
  record("ReleaseCheck", fmt::format("pod={} station={} decision={}", pod.id.value, s.value, to_string(decision)));
  if (decision == ReleaseDecision::ReuseAtStation) {
    std::map<SkuId, int> left;
    for (const Compartment& c : pod.compartments) {
      if (c.sku) left[*c.sku] += c.count;
    }
    std::vector<RequestId> claimed;
    for (auto it = st.queue.begin(); it != st.queue.end();) {
      Request& req = requests_.at(*it);
      bool take = false;
      if (req.kind == RequestKind::Insert) {
        take = req.pod == pod.id;
      } else if (left[req.sku] > 0) {
        take = true;
        left[req.sku] -= std::min(left[req.sku], req.remaining);
      }
      if (take) {
        req.task = task.id;
        task.requests.push_back(req.id);
        claimed.push_back(req.id);
        it = st.queue.erase(it);
      } else {
        ++it;
      }
    }
    record("Reuse", fmt::format("pod={} station={} requests={}", pod.id.value, s.value, ids_of(claimed)));
    present_next(s);
    return;
  }
  if (world_.layout().station(s).kind == StationKind::Pick) {
    ++metrics_.pod_visits;
    metrics_.served_in_visits += task.visit_served;
  }
  task.phase = TaskPhase::AwaitStore;
  record("StoreRequest", fmt::format("pod={} station={}", pod.id.value, s.value));
  stage_pr();
}

// ---------------------------------------------------------------------------
// Decisions

std::vector<WaypointId> Engine::free_storage_places() const {
  std::set<WaypointId> taken;
  for (const Pod& p : world_.pods()) {
    if (const auto* s = std::get_if<InStorage>(&p.location)) taken.insert(s->place);
  }
  for (const auto& [id, t] : tasks_) {
    if (t.phase == TaskPhase::ToStorage) taken.insert(t.target);
  }
  std::vector<WaypointId> out;
  for (WaypointId w : world_.layout().storage_places()) {
    if (!taken.count(w) && !table_.pinned_at(w)) out.push_back(w);
  }
  return out;
}

std::vector<WaypointId> Engine::free_dwelling_points(std::optional<RobotId> except) const {
  std::set<WaypointId> taken;
  for (const auto& [id, t] : tasks_) {
    if (t.kind == TaskKind::Rest) taken.insert(t.target);
  }
  for (const auto& [id, rt] : robots_) {
    if (rt.retreat) taken.insert(*rt.retreat);
  }
  std::vector<WaypointId> out;
  for (WaypointId w : world_.layout().dwelling_points()) {
    if (taken.count(w)) continue;
    const auto holder = table_.pinned_at(w);
    if (holder && (!except || *holder != *except)) continue;
    out.push_back(w);
  }
  return out;
}

std::vector<RobotId> Engine::idle_robots() const {
  std::vector<RobotId> out;
  for (const auto& [id, rt] : robots_) {
    if (world_.robot(id).available && !rt.task && !rt.busy && !rt.needs_plan && !rt.retreat && !rt.has_path) {
      out.push_back(id);
    }
  }
  return out;
}

int Engine::station_inbound(StationId s) const {
  int n = 0;
  for (const auto& [id, t] : tasks_) {
    if (t.station != s) continue;
    if (t.kind != TaskKind::Extraction && t.kind != TaskKind::Insertion) continue;
    if (t.phase == TaskPhase::Open || t.phase == TaskPhase::ToPod || t.phase == TaskPhase::ToStation ||
        t.phase == TaskPhase::AtStation || t.phase == TaskPhase::AwaitStore) {
      ++n;
    }
  }
  return n;
}

long Engine::committed(const SkuId& sku) const {
  long total = 0;
  for (const auto& [id, r] : requests_) {
    if (r.kind == RequestKind::Extract && r.sku == sku) total += r.remaining;
  }
  return total;
}

void Engine::decide() {
  dirty_ = false;
  if (now() - last_prune_ >= 60.0) {
    table_.prune(now());
    last_prune_ = now();
  }
  stage_feed();
  stage_roa_rps();
  stage_poa();
  const int open = static_cast<int>(std::count_if(tasks_.begin(), tasks_.end(), [](const auto& kv) {
    return kv.second.phase == TaskPhase::Open;
  }));
  int budget = static_cast<int>(idle_robots().size()) - open;
  if (budget > 0) stage_insertion_tasks(budget);
  if (budget > 0) stage_pps(budget);
  stage_pr();
  stage_ta();
  stage_pp();

  bool waiting = false;
  for (const auto& [id, rt] : robots_) waiting = waiting || rt.needs_plan;
  for (const auto& [id, t] : tasks_) waiting = waiting || t.phase == TaskPhase::AwaitStore;
  if (waiting && queue_.empty()) queue_.schedule(now() + 1.0, EventKind::DecisionDue);
}

void Engine::stage_feed() {
  for (const Transfer& t : gateway_.poll_feed()) {
    std::vector<std::string> moves;
    for (const Move& m : t.moves) moves.push_back(fmt::format("{}x{}", m.sku, m.quantity));
    record("Transfer", fmt::format("transfer={} kind={} state={} moves={}", t.id.value, to_string(t.kind),
                                   to_string(t.state), fmt::join(moves, ",")));
    if (t.kind == TransferKind::OutgoingPlanned) {
      PickOrder order;
      order.id = *t.order;
      for (const Move& m : t.moves) order.lines.push_back(OrderLine{m.sku, m.quantity});
      order_backlog_.push_back(std::move(order));
    } else {
      for (std::size_t i = 0; i < t.moves.size(); ++i) {
        bundle_backlog_.push_back(ReplenishmentBundle{t.bundles[i], t.moves[i].sku, t.moves[i].quantity});
      }
    }
  }
}

void Engine::stage_roa_rps() {
  const int slots = options_.plugins.order_slots;
  if (!bundle_backlog_.empty()) {
    std::vector<StationLoad> loads;
    for (const Station& s : world_.layout().stations()) {
      loads.push_back(StationLoad{s.id, s.kind, s.waypoint, static_cast<int>(stations_.at(s.id).bundles.size()),
                                  slots, {}});
    }
    const std::vector<ReplenishmentBundle> backlog(bundle_backlog_.begin(), bundle_backlog_.end());
    std::map<StationId, int> this_pass;
    for (const auto& [bundle_id, station] : plugins_.roa->assign(backlog, loads)) {
      auto load = std::find_if(loads.begin(), loads.end(), [&](const StationLoad& l) { return l.id == station; });
      auto b = std::find_if(bundle_backlog_.begin(), bundle_backlog_.end(),
                            [&](const ReplenishmentBundle& x) { return x.id == bundle_id; });
      std::optional<std::string> err =
          b == bundle_backlog_.end()
              ? std::optional<std::string>("bundle not in backlog")
              : check_station_assignment(StationKind::Replenish, load == loads.end() ? nullptr : &*load,
                                         this_pass[station]);
      if (err) {
        ++metrics_.rejected_decisions;
        record("Rejected", fmt::format("ROA bundle={}: {}", bundle_id.value, *err));
        continue;
      }
      ++this_pass[station];
      stations_.at(station).bundles.insert(bundle_id);
      record("ROA", fmt::format("bundle={} station={}", bundle_id.value, station.value));
      awaiting_rps_.emplace_back(*b, station);
      bundle_backlog_.erase(b);
    }
  }

  for (auto it = awaiting_rps_.begin(); it != awaiting_rps_.end();) {
    const auto& [bundle, station] = *it;
    std::vector<Pod> snapshot = world_.pods();
    for (const auto& [rid, r] : requests_) {
      if (r.kind != RequestKind::Insert) continue;
      for (Pod& p : snapshot) {
        if (p.id == *r.pod) {
          Compartment& c = p.compartments[r.compartment];
          c.sku = r.sku;
          c.count += r.remaining;
        }
      }
    }
    std::vector<Placement> placements = plugins_.rps->select(bundle, snapshot, options_.plugins.split_bundles);
    if (placements.empty()) {
      if (rps_warned_.insert(bundle.id).second) {
        ++metrics_.rps_infeasible;
        record("RPSDeferred", fmt::format("bundle={} item={} qty={}", bundle.id.value, bundle.sku, bundle.quantity));
      }
      ++it;
      continue;
    }
    if (auto err = check_placements(bundle, snapshot, placements, options_.plugins.split_bundles)) {
      ++metrics_.rejected_decisions;
      record("Rejected", fmt::format("RPS bundle={}: {}", bundle.id.value, *err));
      ++it;
      continue;
    }
    const TransferId transfer = *gateway_.transfer_of(bundle.id);
    const Transfer& t = gateway_.transfer(transfer);
    const int move = static_cast<int>(std::find(t.bundles.begin(), t.bundles.end(), bundle.id) - t.bundles.begin());
    for (const Placement& pl : placements) {
      Compartment& c = world_.pod(pl.pod).compartments[pl.compartment];
      if (!c.sku) c.sku = bundle.sku;
      Request req;
      req.id = RequestId{next_request_++};
      req.kind = RequestKind::Insert;
      req.transfer = transfer;
      req.move = move;
      req.sku = bundle.sku;
      req.remaining = pl.quantity;
      req.station = station;
      req.bundle = bundle.id;
      req.pod = pl.pod;
      req.compartment = pl.compartment;
      req.created = now();
      requests_[req.id] = req;
      stations_.at(station).queue.push_back(req.id);
      ++bundle_parts_[bundle.id];
      record("RPS", fmt::format("bundle={} pod={} compartment=({},{}) qty={}", bundle.id.value, pl.pod.value, c.row,
                                c.col, pl.quantity));
      record("InsertRequest", fmt::format("request={} bundle={} item={} qty={} station={} pod={}", req.id.value,
                                          bundle.id.value, bundle.sku, pl.quantity, station.value, pl.pod.value));
    }
    it = awaiting_rps_.erase(it);
  }
}

void Engine::stage_poa() {
  if (order_backlog_.empty()) return;
  const int slots = options_.plugins.order_slots;
  std::vector<StationLoad> loads;
  bool any_free = false;
  for (const Station& s : world_.layout().stations()) {
    const StationRuntime& st = stations_.at(s.id);
    StationLoad load{s.id, s.kind, s.waypoint, static_cast<int>(st.orders.size()), slots, {}};
    for (const auto& [rid, r] : requests_) {
      if (r.station == s.id && r.kind == RequestKind::Extract) load.queued_skus.push_back(r.sku);
    }
    any_free = any_free || (s.kind == StationKind::Pick && load.free_slots() > 0);
    loads.push_back(std::move(load));
  }
  if (!any_free) return;

  // Orders the system cannot cover from uncommitted stock stay parked.
  std::map<SkuId, long> promised;
  std::vector<PickOrder> feasible;
  for (const PickOrder& o : order_backlog_) {
    bool ok = true;
    for (const OrderLine& l : o.lines) {
      if (!promised.count(l.sku)) promised[l.sku] = committed(l.sku);
      ok = ok && world_.stock(l.sku) - promised[l.sku] >= l.quantity;
    }
    if (ok) {
      for (const OrderLine& l : o.lines) promised[l.sku] += l.quantity;
      feasible.push_back(o);
    } else if (parked_.insert(o.id).second) {
      ++metrics_.parked_orders;
      record("Park", fmt::format("order={} lines={}", o.id.value, lines_of(o.lines)));
    }
  }
  if (feasible.empty()) return;

  std::map<StationId, int> this_pass;
  for (const auto& [order_id, station] : plugins_.poa->assign(feasible, loads)) {
    auto load = std::find_if(loads.begin(), loads.end(), [&](const StationLoad& l) { return l.id == station; });
    auto o = std::find_if(order_backlog_.begin(), order_backlog_.end(),
                          [&](const PickOrder& x) { return x.id == order_id; });
    const bool is_feasible = std::any_of(feasible.begin(), feasible.end(),
                                         [&](const PickOrder& x) { return x.id == order_id; });
    std::optional<std::string> err =
        (o == order_backlog_.end() || !is_feasible)
            ? std::optional<std::string>("order not assignable")
            : check_station_assignment(StationKind::Pick, load == loads.end() ? nullptr : &*load, this_pass[station]);
    if (err) {
      ++metrics_.rejected_decisions;
      record("Rejected", fmt::format("POA order={}: {}", order_id.value, *err));
      continue;
    }
    ++this_pass[station];
    ++metrics_.accepted_orders;
    StationRuntime& st = stations_.at(station);
    st.orders.insert(order_id);
    order_station_[order_id] = station;
    parked_.erase(order_id);
    record("POA", fmt::format("order={} station={}", order_id.value, station.value));
    const Transfer& t = gateway_.transfer(*gateway_.transfer_of(order_id));
    for (const RequestSpec& spec : gateway_.transfer_to_requests(t)) {
      Request req;
      req.id = RequestId{next_request_++};
      req.kind = RequestKind::Extract;
      req.transfer = t.id;
      req.move = spec.move;
      req.sku = spec.sku;
      req.remaining = spec.quantity;
      req.station = station;
      req.order = order_id;
      req.created = now();
      requests_[req.id] = req;
      st.queue.push_back(req.id);
      record("ExtractRequest", fmt::format("request={} order={} item={} qty={} station={}", req.id.value,
                                           order_id.value, req.sku, req.remaining, station.value));
    }
    order_backlog_.erase(o);
  }
}

void Engine::stage_insertion_tasks(int& budget) {
  for (const Station& s : world_.layout().stations()) {
    if (s.kind != StationKind::Replenish || budget <= 0) continue;
    StationRuntime& st = stations_.at(s.id);
    int room = s.capacity - station_inbound(s.id);
    std::vector<PodId> order;
    for (RequestId rid : st.queue) {
      const Request& r = requests_.at(rid);
      if (r.kind != RequestKind::Insert) continue;
      const Pod& pod = world_.pod(*r.pod);
      if (!std::holds_alternative<InStorage>(pod.location) || pod_claimed(pod.id)) continue;
      if (std::find(order.begin(), order.end(), pod.id) == order.end()) order.push_back(pod.id);
    }
    for (PodId pod : order) {
      if (room <= 0 || budget <= 0) break;
      const TaskId id = new_task(TaskKind::Insertion);
      Task& task = tasks_.at(id);
      task.pod = pod;
      task.station = s.id;
      for (auto it = st.queue.begin(); it != st.queue.end();) {
        Request& r = requests_.at(*it);
        if (r.kind == RequestKind::Insert && r.pod == pod) {
          r.task = id;
          task.requests.push_back(r.id);
          it = st.queue.erase(it);
        } else {
          ++it;
        }
      }
      pod_task_[pod] = id;
      --room;
      --budget;
      record("InsertionTask", fmt::format("task={} pod={} station={} requests={}", id.value, pod.value, s.id.value,
                                          ids_of(task.requests)));
    }
  }
}

void Engine::stage_pps(int& budget) {
  for (const Station& s : world_.layout().stations()) {
    if (s.kind != StationKind::Pick || budget <= 0) continue;
    StationRuntime& st = stations_.at(s.id);
    const int room = s.capacity - station_inbound(s.id);
    if (room <= 0 || st.queue.empty()) continue;
    std::vector<PpsRequest> queue;
    for (RequestId rid : st.queue) {
      const Request& r = requests_.at(rid);
      if (r.kind == RequestKind::Extract) queue.push_back(PpsRequest{r.id, r.sku, r.remaining});
    }
    std::vector<PpsPod> pods;
    for (const Pod& p : world_.pods()) {
      const auto* stored = std::get_if<InStorage>(&p.location);
      if (!stored || pod_claimed(p.id)) continue;
      PpsPod view{p.id, stored->place, {}};
      for (const Compartment& c : p.compartments) {
        if (c.sku && c.count > 0) view.available[*c.sku] += c.count;
      }
      if (!view.available.empty()) pods.push_back(std::move(view));
    }
    if (queue.empty() || pods.empty()) continue;
    const auto built = plugins_.pps->build(world_.layout(), s.waypoint, queue, pods, std::min(budget, room));
    for (const PpsTask& pt : built) {
      std::optional<std::string> err = check_pps_task(pt, queue, pods);
      if (!err && pod_claimed(pt.pod)) err = "pod already claimed";
      for (RequestId rid : pt.requests) {
        if (!err && std::find(st.queue.begin(), st.queue.end(), rid) == st.queue.end()) {
          err = fmt::format("request {} already claimed", rid.value);
        }
      }
      if (!err && budget <= 0) err = "no idle robot left";
      if (err) {
        ++metrics_.rejected_decisions;
        record("Rejected", fmt::format("PPS pod={}: {}", pt.pod.value, *err));
        continue;
      }
      const TaskId id = new_task(TaskKind::Extraction);
      Task& task = tasks_.at(id);
      task.pod = pt.pod;
      task.station = s.id;
      for (RequestId rid : pt.requests) {
        requests_.at(rid).task = id;
        task.requests.push_back(rid);
        st.queue.erase(std::find(st.queue.begin(), st.queue.end(), rid));
      }
      pod_task_[pt.pod] = id;
      --budget;
      record("PPS", fmt::format("task={} station={} pod={} requests={}", id.value, s.id.value, pt.pod.value,
                                ids_of(pt.requests)));
    }
  }
}

void Engine::stage_pr() {
  for (auto& [id, task] : tasks_) {
    if (task.phase != TaskPhase::AwaitStore) continue;
    const Station& station = world_.layout().station(task.station);
    const std::vector<WaypointId> free = free_storage_places();
    Pod& pod = world_.pod(task.pod);
    const std::optional<WaypointId> choice = plugins_.pr->choose(world_.layout(), pod, station.waypoint, free);
    if (!choice) continue;
    if (auto err = check_storage_choice(world_.layout(), *choice, free)) {
      ++metrics_.rejected_decisions;
      record("Rejected", fmt::format("PR pod={}: {}", pod.id.value, *err));
      continue;
    }
    record("PR", fmt::format("pod={} station={} place={}", pod.id.value, station.id.value, where(*choice)));
    if (pairing_) {
      if (auto t = pairing_->on_store(pod.id, station.id, *choice)) {
        const EpochRecord& e = ledger_->epochs()[*t];
        record("Epoch", fmt::format("t={} pod={} S={} pi={} P={} tau={}", e.t, pod.id.value, e.S.value, where(e.pi),
                                    where(e.P), e.tau.value));
      }
    }
    StationRuntime& st = stations_.at(station.id);
    if (st.present == task.id) st.present.reset();
    pod.location = CarriedBy{*task.robot};
    task.kind = TaskKind::Store;
    task.phase = TaskPhase::ToStorage;
    task.target = *choice;
    set_leg(*task.robot, *choice);
    dirty_ = true;
  }
}

void Engine::stage_ta() {
  std::vector<TaOpenTask> open;
  for (const auto& [id, t] : tasks_) {
    if (t.phase != TaskPhase::Open) continue;
    const Pod& pod = world_.pod(t.pod);
    if (const auto* s = std::get_if<InStorage>(&pod.location)) open.push_back(TaOpenTask{id, s->place});
  }
  std::vector<TaRobot> idle;
  for (RobotId r : idle_robots()) idle.push_back(TaRobot{r, world_.robot(r).waypoint});
  if (idle.empty()) return;
  const bool someone_away = std::any_of(idle.begin(), idle.end(), [&](const TaRobot& r) {
    return world_.layout().kind(r.at) != WaypointKind::Dwelling;
  });
  if (open.empty() && !someone_away) return;
  const std::vector<WaypointId> dwelling = free_dwelling_points();
  const TaAllocation alloc = plugins_.ta->allocate(world_.layout(), open, idle, dwelling);
  if (auto err = check_allocation(alloc, open, idle, dwelling)) {
    ++metrics_.rejected_decisions;
    record("Rejected", fmt::format("TA: {}", *err));
    return;
  }
  for (const auto& [task_id, robot] : alloc.assignments) {
    Task& task = tasks_.at(task_id);
    task.robot = robot;
    task.assigned_at = now();
    task.phase = TaskPhase::ToPod;
    RobotRuntime& rt = robots_.at(robot);
    rt.task = task_id;
    rt.busy_since = now();
    const WaypointId place = std::get<InStorage>(world_.pod(task.pod).location).place;
    record("TA", fmt::format("task={} kind={} robot={} pod={} from={}", task_id.value, to_string(task.kind),
                             robot.value, task.pod.value, where(place)));
    set_leg(robot, place);
  }
  for (const auto& [robot, target] : alloc.rests) {
    const TaskId id = new_task(TaskKind::Rest);
    Task& task = tasks_.at(id);
    task.robot = robot;
    task.target = target;
    task.assigned_at = now();
    task.phase = TaskPhase::ToDwelling;
    robots_.at(robot).task = id;
    record("Rest", fmt::format("task={} robot={} dwelling={}", id.value, robot.value, where(target)));
    set_leg(robot, target);
  }
}

void Engine::stage_pp() {
  std::vector<std::pair<double, RobotId>> order;
  for (const auto& [id, rt] : robots_) {
    if (!rt.needs_plan || !world_.robot(id).available) continue;
    const double assigned = rt.task ? tasks_.at(*rt.task).assigned_at : now();
    order.emplace_back(assigned, id);
  }
  std::sort(order.begin(), order.end());
  for (const auto& [_, r] : order) {
    RobotRuntime& rt = robots_.at(r);
    const Robot& bot = world_.robot(r);
    const WaypointId goal = rt.retreat.value_or(rt.leg_goal);
    const PlanRequest req{r, bot.waypoint, bot.heading, now(), goal};
    if (goal != bot.waypoint && table_.held_by_other_forever(goal, r)) {
      if (!rt.wait_logged) {
        rt.wait_logged = true;
        record("PlanWait", fmt::format("robot={} goal={} occupied", r.value, where(goal)));
      }
      continue;
    }
    std::optional<TimedPath> path = plugins_.pp->plan(world_.layout(), world_.kinematics(), table_, req);
    if (!path) {
      ++rt.failures;
      ++metrics_.replan_failures;
      record("PlanFailed", fmt::format("robot={} goal={} attempt={}", r.value, where(goal), rt.failures));
      if (rt.failures >= options_.replan_limit && !rt.retreat) {
        std::optional<WaypointId> best;
        for (WaypointId d : free_dwelling_points(r)) {
          if (d == bot.waypoint) continue;
          if (!best || world_.layout().distance(bot.waypoint, d) < world_.layout().distance(bot.waypoint, *best)) {
            best = d;
          }
        }
        if (best) {
          rt.retreat = best;
          rt.failures = 0;
          ++metrics_.retreats;
          record("Retreat", fmt::format("robot={} dwelling={}", r.value, where(*best)));
        }
      }
      continue;
    }
    if (auto err = check_path(world_.layout(), world_.kinematics(), table_, req, *path)) {
      ++metrics_.rejected_decisions;
      record("Rejected", fmt::format("PP robot={}: {}", r.value, *err));
      continue;
    }
    if (!table_.reserve(*path)) throw PreconditionError("validated path rejected by the reservation table");
    if (keep_history_) history_.push_back(*path);
    record("PP", fmt::format("robot={} from={} to={} hops={} depart={:.3f} arrive={:.3f}", r.value,
                             where(bot.waypoint), where(goal), path->moves(), path->start_time, path->end_time()));
    rt.path = std::move(*path);
    rt.has_path = true;
    rt.step = 0;
    rt.needs_plan = false;
    rt.wait_logged = false;
    advance(r);
  }
}

}  // namespace rmfs
