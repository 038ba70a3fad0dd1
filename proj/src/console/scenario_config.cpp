#include "rmfs/console/scenario_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "rmfs/core/error.hpp"

namespace rmfs {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
  boost::algorithm::trim(s);
  return s;
}

std::vector<std::string> split(const std::string& s, const char* seps) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, boost::algorithm::is_any_of(seps));
  std::vector<std::string> out;
  for (std::string& p : parts) {
    p = trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

// Reads keys from one INI section and remembers which ones were used, so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {}

  const std::string& name() const { return name_; }
  std::string path(const std::string& key) const { return name_ + "." + key; }

  std::optional<std::string> raw(const std::string& key) {
    auto it = tree_.find(key);
    if (it == tree_.not_found()) return std::nullopt;
    used_.insert(key);
    return trim(it->second.data());
  }

  std::string text(const std::string& key, const std::string& fallback) { return raw(key).value_or(fallback); }

  std::string required(const std::string& key) {
    auto v = raw(key);
    if (!v) throw ConfigError(fmt::format("{}: missing", path(key)));
    return *v;
  }

  double number(const std::string& key, double fallback) {
    auto v = raw(key);
    return v ? parse_number(key, *v) : fallback;
  }

  long integer(const std::string& key, long fallback) {
    auto v = raw(key);
    return v ? parse_integer(key, *v) : fallback;
  }

  bool flag(const std::string& key, bool fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    const std::string s = boost::algorithm::to_lower_copy(*v);
    if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
    if (s == "false" || s == "no" || s == "0" || s == "off") return false;
    throw ConfigError(fmt::format("{}: expected a boolean, got '{}'", path(key), *v));
  }

  double parse_number(const std::string& key, const std::string& v) const {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("{}: expected a number, got '{}'", path(key), v));
  }

  long parse_integer(const std::string& key, const std::string& v) const {
    try {
      std::size_t used = 0;
      const long n = std::stol(v, &used);
      if (used == v.size()) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("{}: expected an integer, got '{}'", path(key), v));
  }

  Coord coord(const std::string& key, const std::string& v) const {
    const auto parts = split(v, ",");
    if (parts.size() != 2) throw ConfigError(fmt::format("{}: expected 'row,col', got '{}'", path(key), v));
    return Coord{static_cast<int>(parse_integer(key, parts[0])), static_cast<int>(parse_integer(key, parts[1]))};
  }

  std::vector<Coord> coords(const std::string& key) {
    std::vector<Coord> out;
    if (auto v = raw(key)) {
      for (const std::string& item : split(*v, ";")) out.push_back(coord(key, item));
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, _] : tree_) {
      if (!used_.count(key)) throw ConfigError(fmt::format("unknown key '{}'", path(key)));
    }
  }

 private:
  std::string name_;
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

// "pod.3" -> ("pod", 3); plain names -> (name, nullopt).
std::pair<std::string, std::optional<int>> section_name(const std::string& name) {
  const auto dot = name.find('.');
  if (dot == std::string::npos) return {name, std::nullopt};
  const std::string base = name.substr(0, dot);
  const std::string num = name.substr(dot + 1);
  if (num.empty() || !std::all_of(num.begin(), num.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ConfigError(fmt::format("section [{}]: expected a numeric id after '{}.'", name, base));
  }
  return {base, std::stoi(num)};
}

void parse_run(Section& s, ScenarioConfig& cfg) {
  EngineOptions& e = cfg.engine;
  e.seed = static_cast<std::uint64_t>(s.integer("seed", static_cast<long>(e.seed)));
  e.horizon_s = s.number("horizon_s", e.horizon_s);
  e.t_pick_line = s.number("t_pick_line", e.t_pick_line);
  e.pickup_retries = static_cast<int>(s.integer("pickup_retries", e.pickup_retries));
  e.replan_limit = static_cast<int>(s.integer("replan_limit", e.replan_limit));
  e.keep_log_lines = s.flag("keep_log", e.keep_log_lines);
  e.wall_clock = s.flag("wall_clock", e.wall_clock);
  e.wall_speed = s.number("wall_speed", e.wall_speed);
  if (e.horizon_s < 0.0) throw ConfigError(s.path("horizon_s") + ": must not be negative");
  if (e.t_pick_line < 0.0) throw ConfigError(s.path("t_pick_line") + ": must not be negative");
  if (e.pickup_retries < 0) throw ConfigError(s.path("pickup_retries") + ": must not be negative");
  if (e.replan_limit < 1) throw ConfigError(s.path("replan_limit") + ": must be at least 1");
  if (!(e.wall_speed > 0.0)) throw ConfigError(s.path("wall_speed") + ": must be positive");
}

void parse_layout(Section& s, ScenarioConfig& cfg) {
  LayoutConfig& l = cfg.layout;
  l.rows = static_cast<int>(s.integer("rows", l.rows));
  l.cols = static_cast<int>(s.integer("cols", l.cols));
  l.spacing_m = s.number("spacing_m", l.spacing_m);
  l.placement_seed = static_cast<std::uint64_t>(s.integer("placement_seed", 0));
  if (s.raw("dwelling")) l.dwelling.clear();
  for (Coord c : s.coords("dwelling")) l.dwelling.push_back(c);
  l.highway = s.coords("highway");
  l.holes = s.coords("holes");
}

void parse_kinematics(Section& s, ScenarioConfig& cfg) {
  Kinematics& k = cfg.kinematics;
  k.v_max = s.number("v_max", k.v_max);
  k.t_full_turn = s.number("t_full_turn", k.t_full_turn);
  const double lift = s.number("t_lift", -1.0);
  if (lift >= 0.0) k.t_pickup = k.t_setdown = lift;
  k.t_pickup = s.number("t_pickup", k.t_pickup);
  k.t_setdown = s.number("t_setdown", k.t_setdown);
  if (!(k.v_max > 0.0)) throw ConfigError(s.path("v_max") + ": must be positive");
  if (k.t_full_turn < 0.0 || k.t_pickup < 0.0 || k.t_setdown < 0.0) {
    throw ConfigError(fmt::format("[{}]: durations must not be negative", s.name()));
  }
}

void parse_plugins(Section& s, ScenarioConfig& cfg) {
  PluginBinding& p = cfg.engine.plugins;
  p.roa = s.text("roa", p.roa);
  p.poa = s.text("poa", p.poa);
  p.rps = s.text("rps", p.rps);
  p.pps = s.text("pps", p.pps);
  p.pr = s.text("pr", p.pr);
  p.ta = s.text("ta", p.ta);
  p.pp = s.text("pp", p.pp);
  p.split_bundles = s.flag("split_bundles", p.split_bundles);
  p.order_slots = static_cast<int>(s.integer("order_slots", p.order_slots));
}

void parse_orders(Section& s, ScenarioConfig& cfg) {
  GeneratorConfig& g = cfg.engine.generator;
  g.rate_per_hour = s.number("rate_per_hour", g.rate_per_hour);
  g.mean_lines = s.number("mean_lines", g.mean_lines);
  g.max_lines = static_cast<int>(s.integer("max_lines", g.max_lines));
  g.max_quantity = static_cast<int>(s.integer("max_quantity", g.max_quantity));
  g.receipt_rate_per_hour = s.number("receipt_rate_per_hour", g.receipt_rate_per_hour);
  g.bundle_quantity = static_cast<int>(s.integer("bundle_quantity", g.bundle_quantity));
  g.cutoff_s = s.number("cutoff_s", g.cutoff_s);
  if (auto seed = s.raw("seed")) cfg.engine.feed_seed = static_cast<std::uint64_t>(s.parse_integer("seed", *seed));
  if (auto w = s.raw("sku_weights")) {
    g.sku_weights.clear();
    for (const std::string& item : split(*w, ",;")) {
      const auto colon = item.rfind(':');
      if (colon == std::string::npos) {
        throw ConfigError(fmt::format("{}: expected 'sku:weight', got '{}'", s.path("sku_weights"), item));
      }
      const double weight = s.parse_number("sku_weights", trim(item.substr(colon + 1)));
      if (weight < 0.0) throw ConfigError(s.path("sku_weights") + ": weights must not be negative");
      g.sku_weights.emplace_back(trim(item.substr(0, colon)), weight);
    }
  }
  if (g.rate_per_hour < 0.0 || g.receipt_rate_per_hour < 0.0) {
    throw ConfigError(fmt::format("[{}]: rates must not be negative", s.name()));
  }
  if (g.max_quantity < 1 || g.bundle_quantity < 1) {
    throw ConfigError(fmt::format("[{}]: quantities must be positive", s.name()));
  }
  if (g.rate_per_hour > 0.0) truncated_geometric_p(g.mean_lines, g.max_lines);
  if ((g.rate_per_hour > 0.0 || g.receipt_rate_per_hour > 0.0) && g.sku_weights.empty()) {
    throw ConfigError(s.path("sku_weights") + ": required when an arrival rate is set");
  }
}

void parse_ledger(Section& s, ScenarioConfig& cfg) {
  LedgerOptions& l = cfg.engine.ledger;
  l.enabled = s.flag("enabled", l.enabled);
  l.burn_in = s.integer("burn_in", l.burn_in);
  l.target_epochs = s.integer("target_epochs", l.target_epochs);
  const std::string metric = s.text("metric", "hops");
  if (metric == "hops") {
    l.metric = CostMetric::Hops;
  } else if (metric == "time") {
    l.metric = CostMetric::TravelTime;
  } else {
    throw ConfigError(fmt::format("{}: expected 'hops' or 'time', got '{}'", s.path("metric"), metric));
  }
  if (auto c = s.raw("checkpoints")) {
    cfg.checkpoints.clear();
    for (const std::string& item : split(*c, ",;")) {
      const long n = s.parse_integer("checkpoints", item);
      if (n <= 0) throw ConfigError(s.path("checkpoints") + ": checkpoints must be positive");
      cfg.checkpoints.push_back(n);
    }
  }
  if (l.burn_in < 0) throw ConfigError(s.path("burn_in") + ": must not be negative");
  if (l.target_epochs < 0) throw ConfigError(s.path("target_epochs") + ": must not be negative");
}

void parse_wire(Section& s, ScenarioConfig& cfg) {
  WireConfig& w = cfg.wire;
  w.bind = s.text("bind", w.bind);
  w.grace_s = s.number("grace_s", w.grace_s);
  const std::string fallback = s.text("fallback", w.fallback_in_process ? "in-process" : "none");
  if (fallback == "in-process") {
    w.fallback_in_process = true;
  } else if (fallback == "none") {
    w.fallback_in_process = false;
  } else {
    throw ConfigError(fmt::format("{}: expected 'in-process' or 'none', got '{}'", s.path("fallback"), fallback));
  }
  w.heartbeat_s = s.number("heartbeat_s", w.heartbeat_s);
  w.heartbeat_misses = static_cast<int>(s.integer("heartbeat_misses", w.heartbeat_misses));
  if (!(w.heartbeat_s > 0.0) || w.heartbeat_misses < 1) {
    throw ConfigError(fmt::format("[{}]: heartbeat settings must be positive", s.name()));
  }
}

void parse_robots(Section& s, ScenarioConfig& cfg) {
  cfg.pickup_fault_rate = s.number("pickup_fault_rate", 0.0);
  cfg.engine.pickup_fault_rate = cfg.pickup_fault_rate;
  if (cfg.pickup_fault_rate < 0.0 || cfg.pickup_fault_rate > 1.0) {
    throw ConfigError(s.path("pickup_fault_rate") + ": must lie in [0, 1]");
  }
}

StationSpec parse_station(Section& s, int id, ScenarioConfig& cfg) {
  StationSpec spec;
  spec.id = StationId{id};
  const std::string kind = s.required("kind");
  if (kind == "pick") {
    spec.kind = StationKind::Pick;
  } else if (kind == "replenish") {
    spec.kind = StationKind::Replenish;
  } else {
    throw ConfigError(fmt::format("{}: expected 'pick' or 'replenish', got '{}'", s.path("kind"), kind));
  }
  if (auto at = s.raw("at")) spec.at = s.coord("at", *at);
  spec.capacity = static_cast<int>(s.integer("capacity", spec.capacity));
  if (auto script = s.raw("script")) cfg.engine.station_scripts[spec.id] = split(*script, ";");
  return spec;
}

PodSpec parse_pod(Section& s, int id) {
  PodSpec pod;
  pod.id = PodId{id};
  pod.at = s.coord("at", s.required("at"));
  if (auto face = s.raw("face")) {
    const auto parts = split(*face, "x");
    if (parts.size() != 2) throw ConfigError(fmt::format("{}: expected 'ROWSxCOLS', got '{}'", s.path("face"), *face));
    pod.face_rows = static_cast<int>(s.parse_integer("face", parts[0]));
    pod.face_cols = static_cast<int>(s.parse_integer("face", parts[1]));
  }
  pod.capacity = static_cast<int>(s.integer("capacity", pod.capacity));
  if (auto home = s.raw("home")) pod.home = s.coord("home", *home);
  if (pod.face_rows < 1 || pod.face_cols < 1) throw ConfigError(s.path("face") + ": must be at least 1x1");
  if (pod.capacity < 1) throw ConfigError(s.path("capacity") + ": must be positive");
  if (auto contents = s.raw("contents")) {
    for (const std::string& item : split(*contents, ";")) {
      const auto parts = split(item, " \t");
      if (parts.size() != 3) {
        throw ConfigError(fmt::format("{}: expected 'row,col sku count', got '{}'", s.path("contents"), item));
      }
      const Coord c = s.coord("contents", parts[0]);
      const long count = s.parse_integer("contents", parts[2]);
      if (c.row < 0 || c.row >= pod.face_rows || c.col < 0 || c.col >= pod.face_cols) {
        throw ConfigError(fmt::format("{}: compartment ({},{}) outside the {}x{} face", s.path("contents"), c.row,
                                      c.col, pod.face_rows, pod.face_cols));
      }
      if (count < 0 || count > pod.capacity) {
        throw ConfigError(fmt::format("{}: count {} outside [0, {}]", s.path("contents"), count, pod.capacity));
      }
      for (const PodSpec::Slot& slot : pod.contents) {
        if (slot.row == c.row && slot.col == c.col) {
          throw ConfigError(fmt::format("{}: compartment ({},{}) listed twice", s.path("contents"), c.row, c.col));
        }
      }
      pod.contents.push_back(PodSpec::Slot{c.row, c.col, parts[1], static_cast<int>(count)});
    }
  }
  return pod;
}

RobotSpec parse_robot(Section& s, int id) {
  RobotSpec r;
  r.id = RobotId{id};
  r.at = s.coord("at", s.required("at"));
  r.heading = static_cast<int>(s.integer("heading", 0));
  if (r.heading < 0 || r.heading > 3) throw ConfigError(s.path("heading") + ": expected 0..3 quarter turns");
  return r;
}

std::vector<OrderLine> parse_lines(Section& s, const std::string& key, const std::string& v) {
  std::vector<OrderLine> lines;
  for (const std::string& item : split(v, ";")) {
    const auto parts = split(item, " \t");
    if (parts.size() != 2) throw ConfigError(fmt::format("{}: expected 'sku quantity', got '{}'", s.path(key), item));
    const long q = s.parse_integer(key, parts[1]);
    if (q < 1) throw ConfigError(fmt::format("{}: quantity must be positive", s.path(key)));
    lines.push_back(OrderLine{parts[0], static_cast<int>(q)});
  }
  if (lines.empty()) throw ConfigError(s.path(key) + ": no lines");
  return lines;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("line {}: {}", e.line(), e.message()));
  }

  ScenarioConfig cfg;
  cfg.layout = default_layout_config();
  bool stations_given = false;
  bool robots_given = false;
  std::set<int> stations_seen;
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty()) {
      throw ConfigError(fmt::format("key '{}' outside any section", name));
    }
    Section s(name, section);
    const auto [base, id] = section_name(name);
    if (!id) {
      if (base == "run") {
        parse_run(s, cfg);
      } else if (base == "layout") {
        parse_layout(s, cfg);
      } else if (base == "kinematics") {
        parse_kinematics(s, cfg);
      } else if (base == "robots") {
        parse_robots(s, cfg);
      } else if (base == "plugins") {
        parse_plugins(s, cfg);
      } else if (base == "orders") {
        parse_orders(s, cfg);
      } else if (base == "ledger") {
        parse_ledger(s, cfg);
      } else if (base == "wire") {
        parse_wire(s, cfg);
      } else {
        throw ConfigError(fmt::format("unknown section [{}]", name));
      }
    } else if (base == "station") {
      if (!stations_given) cfg.layout.stations.clear();
      stations_given = true;
      cfg.layout.stations.push_back(parse_station(s, *id, cfg));
    } else if (base == "pod") {
      cfg.pods.push_back(parse_pod(s, *id));
    } else if (base == "robot") {
      robots_given = true;
      cfg.robots.push_back(parse_robot(s, *id));
    } else if (base == "order") {
      FeedEvent f;
      f.time = s.number("time", 0.0);
      f.item = PickOrder{OrderId{*id}, parse_lines(s, "lines", s.required("lines"))};
      cfg.engine.scripted_feed.push_back(std::move(f));
    } else if (base == "receipt") {
      FeedEvent f;
      f.time = s.number("time", 0.0);
      const long q = s.integer("quantity", 1);
      if (q < 1) throw ConfigError(s.path("quantity") + ": must be positive");
      f.item = std::vector<ReplenishmentBundle>{ReplenishmentBundle{BundleId{*id}, s.required("item"),
                                                                    static_cast<int>(q)}};
      cfg.engine.scripted_feed.push_back(std::move(f));
    } else {
      throw ConfigError(fmt::format("unknown section [{}]", name));
    }
    s.finish();
  }
  if (!robots_given) {
    cfg.robots = {RobotSpec{RobotId{1}, Coord{1, 1}, 0}, RobotSpec{RobotId{2}, Coord{1, 2}, 0}};
  }
  for (const FeedEvent& f : cfg.engine.scripted_feed) {
    if (f.time < 0.0) throw ConfigError("scripted feed time must not be negative");
  }
  std::stable_sort(cfg.engine.scripted_feed.begin(), cfg.engine.scripted_feed.end(),
                   [](const FeedEvent& a, const FeedEvent& b) { return a.time < b.time; });
  // Generated ids start at 1 and would collide with scripted ones.
  const GeneratorConfig& g = cfg.engine.generator;
  if (!cfg.engine.scripted_feed.empty() && (g.rate_per_hour > 0.0 || g.receipt_rate_per_hour > 0.0)) {
    throw ConfigError("scripted order/receipt sections cannot be combined with generated arrivals");
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path));
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_scenario(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

World build_world(const ScenarioConfig& config) {
  Layout layout = Layout::build(config.layout);
  World world(layout, config.kinematics);
  auto place_of = [&](Coord c, const std::string& what) {
    if (!layout.contains(c)) {
      throw ConfigError(fmt::format("{}: ({},{}) outside {}x{} grid", what, c.row, c.col, layout.rows(), layout.cols()));
    }
    return layout.id(c);
  };
  for (const PodSpec& spec : config.pods) {
    const std::string what = fmt::format("pod.{}.at", spec.id.value);
    const WaypointId place = place_of(spec.at, what);
    if (layout.kind(place) != WaypointKind::Storage) {
      throw ConfigError(fmt::format("{}: {} is not a storage place", what, layout.describe(place)));
    }
    Pod pod = make_pod(spec.id, place, spec.face_rows, spec.face_cols, spec.capacity);
    if (spec.home) {
      const WaypointId home = place_of(*spec.home, fmt::format("pod.{}.home", spec.id.value));
      if (layout.kind(home) != WaypointKind::Storage) {
        throw ConfigError(fmt::format("pod.{}.home: {} is not a storage place", spec.id.value, layout.describe(home)));
      }
      pod.home = home;
    }
    for (const PodSpec::Slot& slot : spec.contents) {
      Compartment& c = pod.compartments[pod.compartment_index(slot.row, slot.col)];
      c.sku = slot.sku;
      c.count = slot.count;
    }
    world.add_pod(std::move(pod));
  }
  for (const RobotSpec& spec : config.robots) {
    Robot r;
    r.id = spec.id;
    r.waypoint = place_of(spec.at, fmt::format("robot.{}.at", spec.id.value));
    r.heading = spec.heading;
    if (!layout.is_waypoint(r.waypoint)) {
      throw ConfigError(fmt::format("robot.{}.at: {} is a hole", spec.id.value, layout.describe(r.waypoint)));
    }
    if (world.pod_stored_at(r.waypoint)) {
      throw ConfigError(fmt::format("robot.{}.at: {} holds a pod", spec.id.value, layout.describe(r.waypoint)));
    }
    world.add_robot(r);
  }
  if (world.robots().empty()) throw ConfigError("no robots");
  if (auto issues = world.check_invariants(); !issues.empty()) throw ConfigError(issues.front());
  return world;
}

}  // namespace rmfs
