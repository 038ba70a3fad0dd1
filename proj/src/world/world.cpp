#include "rmfs/world/world.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "rmfs/core/error.hpp"

namespace rmfs {

std::string describe(const PodLocation& location) {
  struct Visitor {
    std::string operator()(const InStorage& s) const { return fmt::format("storage:{}", s.place); }
    std::string operator()(const CarriedBy& c) const { return fmt::format("robot:{}", c.robot.value); }
    std::string operator()(const AtStation& a) const { return fmt::format("station:{}", a.station.value); }
  };
  return std::visit(Visitor{}, location);
}

int Pod::total_units() const {
  int total = 0;
  for (const Compartment& c : compartments) total += c.count;
  return total;
}

int Pod::units_of(const SkuId& sku) const {
  int total = 0;
  for (const Compartment& c : compartments) {
    if (c.sku && *c.sku == sku) total += c.count;
  }
  return total;
}

Pod apply_inventory_delta(const Pod& pod, int index, int delta) {
  if (index < 0 || index >= static_cast<int>(pod.compartments.size())) {
    throw InventoryError(fmt::format("pod {} has no compartment {}", pod.id.value, index));
  }
  const Compartment& c = pod.compartments[index];
  const long next = static_cast<long>(c.count) + delta;
  if (next < 0) {
    throw InventoryError(fmt::format("underflow: pod {} compartment {} holds {}, delta {}", pod.id.value, index,
                                     c.count, delta));
  }
  if (next > c.capacity) {
    throw InventoryError(fmt::format("overflow: pod {} compartment {} holds {}/{}, delta {}", pod.id.value, index,
                                     c.count, c.capacity, delta));
  }
  if (delta > 0 && !c.sku) {
    throw InventoryError(fmt::format("pod {} compartment {} has no sku assigned", pod.id.value, index));
  }
  Pod out = pod;
  out.compartments[index].count = static_cast<int>(next);
  return out;
}

Pod make_pod(PodId id, WaypointId place, int face_rows, int face_cols, int capacity) {
  Pod pod;
  pod.id = id;
  pod.face_rows = face_rows;
  pod.face_cols = face_cols;
  pod.location = InStorage{place};
  pod.home = place;
  for (int r = 0; r < face_rows; ++r) {
    for (int c = 0; c < face_cols; ++c) pod.compartments.push_back(Compartment{r, c, std::nullopt, 0, capacity});
  }
  return pod;
}

double Kinematics::turn_time_degrees(double degrees) const { return t_full_turn * (std::fabs(degrees) / 360.0); }

std::string_view to_string(RobotState state) {
  switch (state) {
    case RobotState::Idle: return "Idle";
    case RobotState::Moving: return "Moving";
    case RobotState::Turning: return "Turning";
    case RobotState::PickingUp: return "PickingUp";
    case RobotState::SettingDown: return "SettingDown";
    case RobotState::AtStation: return "AtStation";
  }
  return "?";
}

void World::add_pod(Pod pod) {
  for (const Pod& p : pods_) {
    if (p.id == pod.id) throw ConfigError(fmt::format("duplicate pod id {}", pod.id.value));
  }
  pods_.push_back(std::move(pod));
  std::sort(pods_.begin(), pods_.end(), [](const Pod& a, const Pod& b) { return a.id < b.id; });
}

void World::add_robot(Robot robot) {
  for (const Robot& r : robots_) {
    if (r.id == robot.id) throw ConfigError(fmt::format("duplicate robot id {}", robot.id.value));
  }
  robots_.push_back(robot);
  std::sort(robots_.begin(), robots_.end(), [](const Robot& a, const Robot& b) { return a.id < b.id; });
}

Pod& World::pod(PodId id) { return const_cast<Pod&>(std::as_const(*this).pod(id)); }

const Pod& World::pod(PodId id) const {
  auto it = std::lower_bound(pods_.begin(), pods_.end(), id, [](const Pod& p, PodId v) { return p.id < v; });
  if (it == pods_.end() || it->id != id) throw PreconditionError(fmt::format("unknown pod {}", id.value));
  return *it;
}

Robot& World::robot(RobotId id) { return const_cast<Robot&>(std::as_const(*this).robot(id)); }

const Robot& World::robot(RobotId id) const {
  auto it = std::lower_bound(robots_.begin(), robots_.end(), id, [](const Robot& r, RobotId v) { return r.id < v; });
  if (it == robots_.end() || it->id != id) throw PreconditionError(fmt::format("unknown robot {}", id.value));
  return *it;
}

std::optional<PodId> World::pod_stored_at(WaypointId place) const {
  for (const Pod& p : pods_) {
    if (const auto* s = std::get_if<InStorage>(&p.location); s && s->place == place) return p.id;
  }
  return std::nullopt;
}

void World::pick_units(PodId id, int compartment, int quantity) {
  Pod& p = pod(id);
  Pod next = apply_inventory_delta(p, compartment, -quantity);
  picked_[*p.compartments[compartment].sku] += quantity;
  p = std::move(next);
}

void World::replenish_units(PodId id, int compartment, int quantity) {
  Pod& p = pod(id);
  Pod next = apply_inventory_delta(p, compartment, quantity);
  replenished_[*p.compartments[compartment].sku] += quantity;
  p = std::move(next);
}

long World::picked_total(const SkuId& sku) const {
  auto it = picked_.find(sku);
  return it == picked_.end() ? 0 : it->second;
}

long World::replenished_total(const SkuId& sku) const {
  auto it = replenished_.find(sku);
  return it == replenished_.end() ? 0 : it->second;
}

long World::stock(const SkuId& sku) const {
  long total = 0;
  for (const Pod& p : pods_) total += p.units_of(sku);
  return total;
}

std::vector<SkuId> World::skus() const {
  std::set<SkuId> all;
  for (const Pod& p : pods_) {
    for (const Compartment& c : p.compartments) {
      if (c.sku) all.insert(*c.sku);
    }
  }
  for (const auto& [sku, _] : picked_) all.insert(sku);
  for (const auto& [sku, _] : replenished_) all.insert(sku);
  return {all.begin(), all.end()};
}

std::map<SkuId, long> World::conservation_snapshot() const {
  std::map<SkuId, long> out;
  for (const SkuId& sku : skus()) out[sku] = stock(sku) + picked_total(sku) - replenished_total(sku);
  return out;
}

std::vector<std::string> World::check_invariants() const {
  std::vector<std::string> issues;
  std::map<WaypointId, PodId> places;
  std::map<RobotId, PodId> carried;
  for (const Pod& p : pods_) {
    for (const Compartment& c : p.compartments) {
      if (c.count < 0 || c.count > c.capacity) issues.push_back(fmt::format("pod {} count out of range", p.id.value));
      if (!c.sku && c.count != 0) issues.push_back(fmt::format("pod {} has units without sku", p.id.value));
    }
    if (const auto* s = std::get_if<InStorage>(&p.location)) {
      if (layout_.kind(s->place) != WaypointKind::Storage) {
        issues.push_back(fmt::format("pod {} stored on non-storage waypoint {}", p.id.value, s->place));
      }
      if (auto [it, fresh] = places.emplace(s->place, p.id); !fresh) {
        issues.push_back(fmt::format("pods {} and {} share place {}", it->second.value, p.id.value, s->place));
      }
    } else if (const auto* c = std::get_if<CarriedBy>(&p.location)) {
      if (auto [it, fresh] = carried.emplace(c->robot, p.id); !fresh) {
        issues.push_back(fmt::format("robot {} carries pods {} and {}", c->robot.value, it->second.value, p.id.value));
      }
      const Robot& r = robot(c->robot);
      if (!r.carrying || *r.carrying != p.id) {
        issues.push_back(fmt::format("pod {} claims robot {} which does not carry it", p.id.value, r.id.value));
      }
    }
  }
  std::set<PodId> lifted;
  for (const Robot& r : robots_) {
    if (r.carrying && !lifted.insert(*r.carrying).second) {
      issues.push_back(fmt::format("pod {} carried by more than one robot", r.carrying->value));
    }
    if (r.carrying) {
      const Pod& p = pod(*r.carrying);
      const auto* c = std::get_if<CarriedBy>(&p.location);
      const auto* a = std::get_if<AtStation>(&p.location);
      // A pod presented at a station stays on its robot.
      const bool presented = a && layout_.station(a->station).waypoint == r.waypoint;
      if (!presented && (!c || c->robot != r.id)) {
        issues.push_back(fmt::format("robot {} carries pod {} located at {}", r.id.value, p.id.value,
                                     describe(p.location)));
      }
    }
  }
  return issues;
}

}  // namespace rmfs
