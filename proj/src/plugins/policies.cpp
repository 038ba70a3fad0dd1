#include <algorithm>
#include <limits>
#include <set>

#include "rmfs/plugins/plugins.hpp"

namespace rmfs {

int free_capacity_for(const Pod& pod, const SkuId& sku, int* compartment) {
  int best = 0;
  int best_index = -1;
  for (std::size_t i = 0; i < pod.compartments.size(); ++i) {
    const Compartment& c = pod.compartments[i];
    const bool usable = c.sku ? *c.sku == sku : c.capacity > 0;
    if (usable && c.free() > best) {
      best = c.free();
      best_index = static_cast<int>(i);
    }
  }
  if (compartment) *compartment = best_index;
  return best;
}

namespace {

// Prefer a compartment already holding the sku when the whole bundle fits,
// so stock of one sku stays together.
int stocking_compartment(const Pod& pod, const ReplenishmentBundle& bundle, int fallback) {
  for (std::size_t i = 0; i < pod.compartments.size(); ++i) {
    const Compartment& c = pod.compartments[i];
    if (c.sku && *c.sku == bundle.sku && c.free() >= bundle.quantity) return static_cast<int>(i);
  }
  return fallback;
}

class FcfsLeastLoadedRoa : public ReplenishmentAssigner {
 public:
  std::vector<std::pair<BundleId, StationId>> assign(const std::vector<ReplenishmentBundle>& backlog,
                                                     std::vector<StationLoad> stations) override {
    std::vector<std::pair<BundleId, StationId>> out;
    for (const ReplenishmentBundle& b : backlog) {
      StationLoad* best = nullptr;
      for (StationLoad& s : stations) {
        if (s.kind != StationKind::Replenish || s.free_slots() <= 0) continue;
        if (!best || s.assigned < best->assigned || (s.assigned == best->assigned && s.id < best->id)) best = &s;
      }
      if (!best) break;
      ++best->assigned;
      out.emplace_back(b.id, best->id);
    }
    return out;
  }
};

StationLoad* least_loaded_pick(std::vector<StationLoad>& stations) {
  StationLoad* best = nullptr;
  for (StationLoad& s : stations) {
    if (s.kind != StationKind::Pick || s.free_slots() <= 0) continue;
    if (!best || s.assigned < best->assigned || (s.assigned == best->assigned && s.id < best->id)) best = &s;
  }
  return best;
}

class FcfsPoa : public OrderAssigner {
 public:
  std::vector<std::pair<OrderId, StationId>> assign(const std::vector<PickOrder>& backlog,
                                                    std::vector<StationLoad> stations) override {
    std::vector<std::pair<OrderId, StationId>> out;
    for (const PickOrder& o : backlog) {
      StationLoad* s = least_loaded_pick(stations);
      if (!s) break;
      ++s->assigned;
      out.emplace_back(o.id, s->id);
    }
    return out;
  }
};

// Prefers the order sharing the most SKUs with what the station already
// has queued; ties go to the earlier order.
class CommonLinesPoa : public OrderAssigner {
 public:
  std::vector<std::pair<OrderId, StationId>> assign(const std::vector<PickOrder>& backlog,
                                                    std::vector<StationLoad> stations) override {
    std::vector<std::pair<OrderId, StationId>> out;
    std::vector<bool> taken(backlog.size(), false);
    while (StationLoad* s = least_loaded_pick(stations)) {
      const std::set<SkuId> queued(s->queued_skus.begin(), s->queued_skus.end());
      int best = -1;
      int best_score = -1;
      for (std::size_t i = 0; i < backlog.size(); ++i) {
        if (taken[i]) continue;
        int score = 0;
        for (const OrderLine& l : backlog[i].lines) score += queued.count(l.sku) ? 1 : 0;
        if (score > best_score) {
          best_score = score;
          best = static_cast<int>(i);
        }
      }
      if (best < 0) break;
      taken[best] = true;
      ++s->assigned;
      for (const OrderLine& l : backlog[best].lines) s->queued_skus.push_back(l.sku);
      out.emplace_back(backlog[best].id, s->id);
    }
    return out;
  }
};

class MaxCapacityRps : public ReplenishPodSelector {
 public:
  std::vector<Placement> select(const ReplenishmentBundle& bundle, const std::vector<Pod>& pods,
                                bool allow_split) override {
    const Pod* best = nullptr;
    int best_free = 0;
    int best_comp = -1;
    for (const Pod& p : pods) {
      int comp = -1;
      const int free = free_capacity_for(p, bundle.sku, &comp);
      if (free < bundle.quantity) continue;
      if (!best || free > best_free || (free == best_free && p.id < best->id)) {
        best = &p;
        best_free = free;
        best_comp = comp;
      }
    }
    if (best) return {Placement{best->id, stocking_compartment(*best, bundle, best_comp), bundle.quantity}};
    if (!allow_split) return {};

    // Fill the roomiest compartments first until the bundle fits.
    std::vector<Pod> scratch = pods;
    std::vector<Placement> out;
    int left = bundle.quantity;
    while (left > 0) {
      Pod* pick = nullptr;
      int pick_free = 0;
      int pick_comp = -1;
      for (Pod& p : scratch) {
        int comp = -1;
        const int free = free_capacity_for(p, bundle.sku, &comp);
        if (free > pick_free || (free == pick_free && free > 0 && pick && p.id < pick->id)) {
          pick = &p;
          pick_free = free;
          pick_comp = comp;
        }
      }
      if (!pick) return {};
      const int qty = std::min(left, pick_free);
      Compartment& c = pick->compartments[pick_comp];
      c.sku = bundle.sku;
      c.count += qty;
      out.push_back(Placement{pick->id, pick_comp, qty});
      left -= qty;
    }
    return out;
  }
};

class GreedyPileOnPps : public PodPicker {
 public:
  std::vector<PpsTask> build(const Layout& layout, WaypointId station_waypoint, const std::vector<PpsRequest>& queue,
                             const std::vector<PpsPod>& pods, int max_tasks) override {
    // Requests no single pod can cover in full may be served partially.
    std::vector<bool> fully_coverable(queue.size(), false);
    for (std::size_t r = 0; r < queue.size(); ++r) {
      for (const PpsPod& p : pods) {
        auto it = p.available.find(queue[r].sku);
        if (it != p.available.end() && it->second >= queue[r].quantity) fully_coverable[r] = true;
      }
    }
    std::vector<bool> covered(queue.size(), false);
    std::vector<bool> used(pods.size(), false);
    std::vector<PpsTask> tasks;
    while (static_cast<int>(tasks.size()) < max_tasks) {
      int best = -1;
      std::vector<RequestId> best_cover;
      int best_dist = std::numeric_limits<int>::max();
      for (std::size_t i = 0; i < pods.size(); ++i) {
        if (used[i]) continue;
        std::vector<RequestId> cover = cover_of(pods[i], queue, covered, fully_coverable);
        if (cover.empty()) continue;
        const int dist = layout.distance(pods[i].place, station_waypoint);
        const bool better = best < 0 || cover.size() > best_cover.size() ||
                            (cover.size() == best_cover.size() &&
                             (dist < best_dist || (dist == best_dist && pods[i].id < pods[best].id)));
        if (better) {
          best = static_cast<int>(i);
          best_cover = std::move(cover);
          best_dist = dist;
        }
      }
      if (best < 0) break;
      used[best] = true;
      for (RequestId id : best_cover) {
        for (std::size_t r = 0; r < queue.size(); ++r) {
          if (queue[r].id == id) covered[r] = true;
        }
      }
      tasks.push_back(PpsTask{pods[best].id, std::move(best_cover)});
    }
    return tasks;
  }

 private:
  // Smallest requests first maximizes the count served per sku; the result
  // keeps queue order.
  static std::vector<RequestId> cover_of(const PpsPod& pod, const std::vector<PpsRequest>& queue,
                                         const std::vector<bool>& covered, const std::vector<bool>& fully_coverable) {
    std::vector<std::size_t> order;
    for (std::size_t r = 0; r < queue.size(); ++r)
      if (!covered[r]) order.push_back(r);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return queue[a].quantity < queue[b].quantity; });
    std::map<SkuId, int> left = pod.available;
    std::vector<std::size_t> taken;
    for (std::size_t r : order) {
      auto it = left.find(queue[r].sku);
      if (it == left.end() || it->second <= 0) continue;
      if (it->second >= queue[r].quantity) {
        it->second -= queue[r].quantity;
        taken.push_back(r);
      } else if (!fully_coverable[r]) {
        it->second = 0;
        taken.push_back(r);
      }
    }
    std::sort(taken.begin(), taken.end());
    std::vector<RequestId> out;
    for (std::size_t r : taken) out.push_back(queue[r].id);
    return out;
  }
};

class RandomPr : public StoragePolicy {
 public:
  explicit RandomPr(Rng rng) : rng_(rng) {}
  std::optional<WaypointId> choose(const Layout&, const Pod&, WaypointId,
                                   const std::vector<WaypointId>& free_places) override {
    if (free_places.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, free_places.size() - 1);
    return free_places[pick(rng_)];
  }

 private:
  Rng rng_;
};

std::optional<WaypointId> nearest_place(const Layout& layout, WaypointId from, const std::vector<WaypointId>& places) {
  std::optional<WaypointId> best;
  int best_dist = std::numeric_limits<int>::max();
  for (WaypointId w : places) {
    const int d = layout.distance(from, w);
    if (d < best_dist || (d == best_dist && w < *best)) {
      best = w;
      best_dist = d;
    }
  }
  return best;
}

class NearestPr : public StoragePolicy {
 public:
  std::optional<WaypointId> choose(const Layout& layout, const Pod&, WaypointId station_waypoint,
                                   const std::vector<WaypointId>& free_places) override {
    return nearest_place(layout, station_waypoint, free_places);
  }
};

class FixedPr : public StoragePolicy {
 public:
  std::optional<WaypointId> choose(const Layout&, const Pod& pod, WaypointId,
                                   const std::vector<WaypointId>& free_places) override {
    if (std::find(free_places.begin(), free_places.end(), pod.home) == free_places.end()) return std::nullopt;
    return pod.home;
  }
};

class NearestTa : public TaskAllocator {
 public:
  TaAllocation allocate(const Layout& layout, const std::vector<TaOpenTask>& tasks,
                        const std::vector<TaRobot>& robots, const std::vector<WaypointId>& free_dwelling) override {
    TaAllocation out;
    std::vector<bool> busy(robots.size(), false);
    for (const TaOpenTask& t : tasks) {
      int best = -1;
      int best_dist = std::numeric_limits<int>::max();
      for (std::size_t i = 0; i < robots.size(); ++i) {
        if (busy[i]) continue;
        const int d = layout.distance(robots[i].at, t.start);
        if (d < best_dist || (d == best_dist && robots[i].id < robots[best].id)) {
          best = static_cast<int>(i);
          best_dist = d;
        }
      }
      if (best < 0) break;
      busy[best] = true;
      out.assignments.emplace_back(t.id, robots[best].id);
    }
    std::vector<WaypointId> dwelling = free_dwelling;
    for (std::size_t i = 0; i < robots.size(); ++i) {
      if (busy[i] || layout.kind(robots[i].at) == WaypointKind::Dwelling) continue;
      auto target = nearest_place(layout, robots[i].at, dwelling);
      if (!target) continue;
      dwelling.erase(std::find(dwelling.begin(), dwelling.end(), *target));
      out.rests.emplace_back(robots[i].id, *target);
    }
    return out;
  }
};

class IntervalAstarPp : public PathPlanner {
 public:
  explicit IntervalAstarPp(PlannerOptions options) : options_(options) {}
  std::optional<TimedPath> plan(const Layout& layout, const Kinematics& kinematics, const ReservationTable& table,
                                const PlanRequest& request) override {
    return plan_path(layout, kinematics, table, request, options_);
  }

 private:
  PlannerOptions options_;
};

}  // namespace

std::unique_ptr<ReplenishmentAssigner> make_fcfs_least_loaded_roa() { return std::make_unique<FcfsLeastLoadedRoa>(); }
std::unique_ptr<OrderAssigner> make_fcfs_poa() { return std::make_unique<FcfsPoa>(); }
std::unique_ptr<OrderAssigner> make_common_lines_poa() { return std::make_unique<CommonLinesPoa>(); }
std::unique_ptr<ReplenishPodSelector> make_max_capacity_rps() { return std::make_unique<MaxCapacityRps>(); }
std::unique_ptr<PodPicker> make_greedy_pile_on_pps() { return std::make_unique<GreedyPileOnPps>(); }
std::unique_ptr<StoragePolicy> make_random_pr(Rng rng) { return std::make_unique<RandomPr>(rng); }
std::unique_ptr<StoragePolicy> make_nearest_pr() { return std::make_unique<NearestPr>(); }
std::unique_ptr<StoragePolicy> make_fixed_pr() { return std::make_unique<FixedPr>(); }
std::unique_ptr<TaskAllocator> make_nearest_ta() { return std::make_unique<NearestTa>(); }
std::unique_ptr<PathPlanner> make_interval_astar_pp(PlannerOptions options) {
  return std::make_unique<IntervalAstarPp>(options);
}

}  // namespace rmfs
