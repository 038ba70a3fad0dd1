#include "rmfs/wire/codec.hpp"

#include <set>

#include <fmt/format.h>
#include <json.hpp>

namespace rmfs::wire {
namespace {

using Json = nlohmann::ordered_json;

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

// Field access on a decoded object that remembers which keys were read, so
// leftovers can be rejected.
class Fields {
 public:
  Fields(const Json& j, std::string_view line) : j_(j), line_(line) {
    if (!j.is_object()) fail("frame is not a JSON object");
  }

  [[noreturn]] void fail(const std::string& why) const { throw DecodeError(why, std::string(line_)); }

  const Json& get(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) fail(fmt::format("missing key '{}'", key));
    seen_.insert(key);
    return *it;
  }
  bool has(const char* key) const { return j_.contains(key); }

  long integer(const char* key) { return integer_of(get(key), key); }
  long integer_of(const Json& v, const char* key) const {
    if (!v.is_number_integer()) fail(fmt::format("key '{}' must be an integer", key));
    return v.get<long>();
  }
  double number(const char* key) {
    const Json& v = get(key);
    if (!v.is_number()) fail(fmt::format("key '{}' must be a number", key));
    return v.get<double>();
  }
  bool boolean(const char* key) {
    const Json& v = get(key);
    if (!v.is_boolean()) fail(fmt::format("key '{}' must be a boolean", key));
    return v.get<bool>();
  }
  std::string string(const char* key) { return string_of(get(key), key); }
  std::string string_of(const Json& v, const char* key) const {
    if (!v.is_string()) fail(fmt::format("key '{}' must be a string", key));
    return v.get<std::string>();
  }
  const Json& array(const char* key) {
    const Json& v = get(key);
    if (!v.is_array()) fail(fmt::format("key '{}' must be an array", key));
    return v;
  }
  Fields object(const char* key) {
    const Json& v = get(key);
    if (!v.is_object()) fail(fmt::format("key '{}' must be an object", key));
    return Fields(v, line_);
  }
  Fields element(const Json& v) const {
    if (!v.is_object()) fail("array element must be an object");
    return Fields(v, line_);
  }
  std::optional<double> time() {
    if (!has("time")) return std::nullopt;
    return number("time");
  }

  void done() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) fail(fmt::format("unexpected key '{}'", key));
    }
  }

 private:
  const Json& j_;
  std::string_view line_;
  std::set<std::string> seen_;
};

Json ref_json(const CompartmentRef& r) { return Json{{"row", r.row}, {"col", r.col}}; }

CompartmentRef ref_of(Fields f) {
  CompartmentRef r{static_cast<int>(f.integer("row")), static_cast<int>(f.integer("col"))};
  f.done();
  return r;
}

void put_time(Json& j, const std::optional<double>& t) {
  if (t) j["time"] = *t;
}

Json task_json(const TaskMessage& m) {
  Json j;
  j["type"] = "";
  j["robot_id"] = m.robot.value;
  j["msg_id"] = m.msg_id;
  std::visit(Overload{
                 [&](const Go& g) {
                   j["type"] = "Go";
                   j["waypoints"] = g.waypoints;
                 },
                 [&](const Turn& t) {
                   j["type"] = "Turn";
                   j["degrees"] = t.degrees;
                 },
                 [&](const Rest&) { j["type"] = "Rest"; },
                 [&](const Pickup&) { j["type"] = "Pickup"; },
                 [&](const Setdown&) { j["type"] = "Setdown"; },
                 [&](const GetItem& g) {
                   j["type"] = "GetItem";
                   j["request_id"] = g.request.value;
                 },
                 [&](const PutItem& p) {
                   j["type"] = "PutItem";
                   j["bundle_id"] = p.bundle.value;
                 },
             },
             m.payload);
  put_time(j, m.time);
  return j;
}

Json status_json(const StatusMessage& m) {
  Json j;
  j["type"] = "";
  j["robot_id"] = m.robot.value;
  j["msg_id"] = m.msg_id;
  std::visit(Overload{
                 [&](const Error& e) {
                   j["type"] = "Error";
                   j["text"] = e.text;
                 },
                 [&](const WaypointTag& w) {
                   j["type"] = "WaypointTag";
                   j["waypoint"] = w.waypoint;
                 },
                 [&](const Orientation& o) {
                   j["type"] = "Orientation";
                   j["radians"] = o.radians;
                 },
                 [&](const PickupSuccess& p) {
                   j["type"] = "PickupSuccess";
                   j["ok"] = p.ok;
                 },
                 [&](const SetdownSuccess& s) {
                   j["type"] = "SetdownSuccess";
                   j["ok"] = s.ok;
                 },
             },
             m.payload);
  put_time(j, m.time);
  return j;
}

Json info_json(const StationInfo& m) {
  Json j;
  j["type"] = m.kind == InfoKind::Picking ? "PickingInfo" : "ReplenishInfo";
  j["station_id"] = m.station.value;
  j["msg_id"] = m.msg_id;
  if (m.order) j["order_id"] = m.order->value;
  if (m.bundle) j["bundle_id"] = m.bundle->value;
  j["request_id"] = m.request.value;
  j["item_id"] = m.item;
  j["name"] = m.name;
  j["quantity"] = m.quantity;
  j["pod_id"] = m.pod.value;
  j["pod"] = Json{{"rows", m.pod_rows}, {"cols", m.pod_cols}};
  j["stock"] = Json{{"optimum", m.stock.optimum}, {"maximum", m.stock.maximum}, {"minimum", m.stock.minimum}};
  Json comps = Json::array();
  for (const CompartmentInfo& c : m.compartments) {
    comps.push_back(Json{{"row", c.row}, {"col", c.col}, {"item_id", c.item}, {"count", c.count}});
  }
  j["compartments"] = std::move(comps);
  if (m.to_pick) j["compartment_to_pick"] = ref_json(*m.to_pick);
  if (m.to_replenish) {
    Json alts = Json::array();
    for (const CompartmentRef& r : m.to_replenish->alternatives) alts.push_back(ref_json(r));
    j["compartment_to_replenish"] = Json{{"best", ref_json(m.to_replenish->best)}, {"alternatives", std::move(alts)}};
  }
  put_time(j, m.time);
  return j;
}

Json reply_json(const StationReply& m) {
  Json j;
  j["type"] = "StationReply";
  j["station_id"] = m.station.value;
  j["msg_id"] = m.msg_id;
  j["verdict"] = m.ok ? "OK" : "Error";
  if (!m.ok) j["text"] = m.error;
  if (m.order) j["order_id"] = m.order->value;
  if (m.bundle) j["bundle_id"] = m.bundle->value;
  j["item_id"] = m.item;
  put_time(j, m.time);
  return j;
}

const char* role_key(Role role) {
  switch (role) {
    case Role::Robot: return "robot_id";
    case Role::Station: return "station_id";
    case Role::Feed: return "feed_id";
  }
  return "?";
}

Json to_json(const Message& m) {
  return std::visit(
      Overload{
          [](const TaskMessage& t) { return task_json(t); },
          [](const StatusMessage& s) { return status_json(s); },
          [](const StationInfo& i) { return info_json(i); },
          [](const StationReply& r) { return reply_json(r); },
          [](const Register& r) {
            Json j;
            j["type"] = "Register";
            j[role_key(r.role)] = r.id;
            j["msg_id"] = r.msg_id;
            return j;
          },
          [](const PeerError& e) {
            Json j;
            j["type"] = "Error";
            j[role_key(e.role)] = e.id;
            j["msg_id"] = e.msg_id;
            j["text"] = e.text;
            return j;
          },
          [](const Ping& p) { return Json{{"type", "Ping"}, {"msg_id", p.msg_id}}; },
          [](const Pong& p) { return Json{{"type", "Pong"}, {"msg_id", p.msg_id}}; },
          [](const NewOrder& n) {
            Json lines = Json::array();
            for (const OrderLine& l : n.order.lines) lines.push_back(Json{{"item_id", l.sku}, {"quantity", l.quantity}});
            return Json{{"type", "NewOrder"}, {"msg_id", n.msg_id}, {"order_id", n.order.id.value}, {"lines", lines}};
          },
          [](const Receipt& r) {
            Json bundles = Json::array();
            for (const ReplenishmentBundle& b : r.bundles) {
              bundles.push_back(Json{{"bundle_id", b.id.value}, {"item_id", b.sku}, {"quantity", b.quantity}});
            }
            return Json{{"type", "Receipt"}, {"msg_id", r.msg_id}, {"bundles", bundles}};
          },
          [](const TransferState& t) {
            Json moves = Json::array();
            for (const MoveState& mv : t.moves) {
              moves.push_back(Json{{"item_id", mv.item}, {"quantity", mv.quantity}, {"done", mv.done}});
            }
            return Json{{"type", "TransferState"}, {"msg_id", t.msg_id}, {"transfer_id", t.transfer.value},
                        {"kind", t.kind},         {"state", t.state},   {"moves", moves}};
          },
      },
      m);
}

TaskMessage decode_task(Fields& f, const std::string& type) {
  TaskMessage m;
  m.robot = RobotId{static_cast<int>(f.integer("robot_id"))};
  m.msg_id = f.integer("msg_id");
  if (type == "Go") {
    Go g;
    for (const Json& w : f.array("waypoints")) g.waypoints.push_back(static_cast<WaypointId>(f.integer_of(w, "waypoints")));
    m.payload = g;
  } else if (type == "Turn") {
    m.payload = Turn{static_cast<int>(f.integer("degrees"))};
  } else if (type == "Rest") {
    m.payload = Rest{};
  } else if (type == "Pickup") {
    m.payload = Pickup{};
  } else if (type == "Setdown") {
    m.payload = Setdown{};
  } else if (type == "GetItem") {
    m.payload = GetItem{RequestId{static_cast<int>(f.integer("request_id"))}};
  } else {
    m.payload = PutItem{BundleId{static_cast<int>(f.integer("bundle_id"))}};
  }
  m.time = f.time();
  return m;
}

StatusMessage decode_status(Fields& f, const std::string& type) {
  StatusMessage m;
  m.robot = RobotId{static_cast<int>(f.integer("robot_id"))};
  m.msg_id = f.integer("msg_id");
  if (type == "Error") {
    m.payload = Error{f.string("text")};
  } else if (type == "WaypointTag") {
    m.payload = WaypointTag{static_cast<WaypointId>(f.integer("waypoint"))};
  } else if (type == "Orientation") {
    m.payload = Orientation{f.number("radians")};
  } else if (type == "PickupSuccess") {
    m.payload = PickupSuccess{f.boolean("ok")};
  } else {
    m.payload = SetdownSuccess{f.boolean("ok")};
  }
  m.time = f.time();
  return m;
}

StationInfo decode_info(Fields& f, const std::string& type) {
  StationInfo m;
  m.kind = type == "PickingInfo" ? InfoKind::Picking : InfoKind::Replenish;
  m.station = StationId{static_cast<int>(f.integer("station_id"))};
  m.msg_id = f.integer("msg_id");
  if (m.kind == InfoKind::Picking) {
    m.order = OrderId{static_cast<int>(f.integer("order_id"))};
  } else {
    m.bundle = BundleId{static_cast<int>(f.integer("bundle_id"))};
  }
  m.request = RequestId{static_cast<int>(f.integer("request_id"))};
  m.item = f.string("item_id");
  m.name = f.string("name");
  m.quantity = static_cast<int>(f.integer("quantity"));
  m.pod = PodId{static_cast<int>(f.integer("pod_id"))};
  {
    Fields pod = f.object("pod");
    m.pod_rows = static_cast<int>(pod.integer("rows"));
    m.pod_cols = static_cast<int>(pod.integer("cols"));
    pod.done();
  }
  {
    Fields stock = f.object("stock");
    m.stock.optimum = static_cast<int>(stock.integer("optimum"));
    m.stock.maximum = static_cast<int>(stock.integer("maximum"));
    m.stock.minimum = static_cast<int>(stock.integer("minimum"));
    stock.done();
  }
  for (const Json& c : f.array("compartments")) {
    Fields e = f.element(c);
    CompartmentInfo info;
    info.row = static_cast<int>(e.integer("row"));
    info.col = static_cast<int>(e.integer("col"));
    info.item = e.string("item_id");
    info.count = static_cast<int>(e.integer("count"));
    e.done();
    m.compartments.push_back(std::move(info));
  }
  if (m.kind == InfoKind::Picking) {
    m.to_pick = ref_of(f.object("compartment_to_pick"));
  } else {
    Fields target = f.object("compartment_to_replenish");
    ReplenishTarget t;
    t.best = ref_of(target.object("best"));
    for (const Json& a : target.array("alternatives")) t.alternatives.push_back(ref_of(target.element(a)));
    target.done();
    m.to_replenish = std::move(t);
  }
  auto in_face = [&](const CompartmentRef& r) {
    return r.row >= 0 && r.row < m.pod_rows && r.col >= 0 && r.col < m.pod_cols;
  };
  if (m.to_pick && !in_face(*m.to_pick)) f.fail("compartment_to_pick outside the pod face");
  if (m.to_replenish) {
    if (!in_face(m.to_replenish->best)) f.fail("compartment_to_replenish outside the pod face");
    for (const CompartmentRef& r : m.to_replenish->alternatives) {
      if (!in_face(r)) f.fail("replenish alternative outside the pod face");
    }
  }
  m.time = f.time();
  return m;
}

StationReply decode_reply(Fields& f) {
  StationReply m;
  m.station = StationId{static_cast<int>(f.integer("station_id"))};
  m.msg_id = f.integer("msg_id");
  const std::string verdict = f.string("verdict");
  if (verdict == "OK") {
    m.ok = true;
  } else if (verdict == "Error") {
    m.ok = false;
    m.error = f.string("text");
  } else {
    f.fail(fmt::format("unknown verdict '{}'", verdict));
  }
  if (f.has("order_id")) m.order = OrderId{static_cast<int>(f.integer("order_id"))};
  if (f.has("bundle_id")) m.bundle = BundleId{static_cast<int>(f.integer("bundle_id"))};
  m.item = f.string("item_id");
  m.time = f.time();
  return m;
}

std::optional<Role> role_present(const Fields& f) {
  int found = 0;
  std::optional<Role> role;
  for (Role r : {Role::Robot, Role::Station, Role::Feed}) {
    if (f.has(role_key(r))) {
      role = r;
      ++found;
    }
  }
  if (found > 1) f.fail("more than one role id");
  return role;
}

const std::set<std::string> kTaskTypes = {"Go", "Turn", "Rest", "Pickup", "Setdown", "GetItem", "PutItem"};
const std::set<std::string> kStatusTypes = {"WaypointTag", "Orientation", "PickupSuccess", "SetdownSuccess"};

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Robot: return "robot";
    case Role::Station: return "station";
    case Role::Feed: return "feed";
  }
  return "?";
}

std::string type_name(const Message& m) { return to_json(m)["type"].get<std::string>(); }

std::string encode(const Message& m) { return to_json(m).dump(); }

std::string encode_frame(const Message& m) { return encode(m) + '\n'; }

Message decode(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError(fmt::format("malformed frame: {}", e.what()), std::string(line));
  }
  Fields f(j, line);
  const std::string type = f.string("type");
  Message out;
  if (kTaskTypes.count(type)) {
    out = decode_task(f, type);
  } else if (kStatusTypes.count(type)) {
    out = decode_status(f, type);
  } else if (type == "Error") {
    const auto role = role_present(f);
    if (!role) f.fail("Error frame without an addressee");
    if (*role == Role::Robot) {
      out = decode_status(f, type);
    } else {
      PeerError e;
      e.role = *role;
      e.id = static_cast<int>(f.integer(role_key(*role)));
      e.msg_id = f.integer("msg_id");
      e.text = f.string("text");
      out = e;
    }
  } else if (type == "PickingInfo" || type == "ReplenishInfo") {
    out = decode_info(f, type);
  } else if (type == "StationReply") {
    out = decode_reply(f);
  } else if (type == "Register") {
    const auto role = role_present(f);
    if (!role) f.fail("Register without a role id");
    out = Register{*role, static_cast<int>(f.integer(role_key(*role))), f.integer("msg_id")};
  } else if (type == "Ping") {
    out = Ping{f.integer("msg_id")};
  } else if (type == "Pong") {
    out = Pong{f.integer("msg_id")};
  } else if (type == "NewOrder") {
    NewOrder n;
    n.msg_id = f.integer("msg_id");
    n.order.id = OrderId{static_cast<int>(f.integer("order_id"))};
    for (const Json& l : f.array("lines")) {
      Fields e = f.element(l);
      OrderLine line_item{e.string("item_id"), static_cast<int>(e.integer("quantity"))};
      e.done();
      if (line_item.quantity < 1) f.fail("order line quantity must be positive");
      n.order.lines.push_back(std::move(line_item));
    }
    out = std::move(n);
  } else if (type == "Receipt") {
    Receipt r;
    r.msg_id = f.integer("msg_id");
    for (const Json& b : f.array("bundles")) {
      Fields e = f.element(b);
      ReplenishmentBundle bundle{BundleId{static_cast<int>(e.integer("bundle_id"))}, e.string("item_id"),
                                 static_cast<int>(e.integer("quantity"))};
      e.done();
      if (bundle.quantity < 1) f.fail("bundle quantity must be positive");
      r.bundles.push_back(std::move(bundle));
    }
    out = std::move(r);
  } else if (type == "TransferState") {
    TransferState t;
    t.msg_id = f.integer("msg_id");
    t.transfer = TransferId{static_cast<int>(f.integer("transfer_id"))};
    t.kind = f.string("kind");
    t.state = f.string("state");
    for (const Json& mv : f.array("moves")) {
      Fields e = f.element(mv);
      t.moves.push_back(MoveState{e.string("item_id"), static_cast<int>(e.integer("quantity")),
                                  static_cast<int>(e.integer("done"))});
      e.done();
    }
    out = std::move(t);
  } else {
    f.fail(fmt::format("unknown message type '{}'", type));
  }
  f.done();
  return out;
}

}  // namespace rmfs::wire
