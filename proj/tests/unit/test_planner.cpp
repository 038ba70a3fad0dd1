#include <doctest.h>

#include <algorithm>
#include <random>

#include "rmfs/planner/conflict_scan.hpp"
#include "rmfs/planner/planner.hpp"
#include "rmfs/planner/reservation_table.hpp"

using namespace rmfs;

namespace {

const Layout& grid() {
  static const Layout layout = Layout::build(default_layout_config());
  return layout;
}

PlanRequest request(int robot, Coord start, int heading, Coord goal, double t = 0.0) {
  return PlanRequest{RobotId{robot}, grid().id(start), heading, t, grid().id(goal)};
}

TimedPath straight(int robot, std::vector<WaypointId> nodes, double start, double step) {
  TimedPath p;
  p.robot = RobotId{robot};
  p.start_time = start;
  double t = start;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    PathStep s;
    s.waypoint = nodes[i];
    s.arrival = t;
    s.departure = i + 1 < nodes.size() ? t : t;
    s.turn_start = t;
    p.steps.push_back(s);
    t += step;
  }
  return p;
}

// Interval lists kept as one flat vector, with the table's cut and overlap
// rules spelled out directly.
class NaiveTable {
 public:
  bool reserve(const TimedPath& path) {
    const auto mine = path_occupancy(path);
    for (const Occupancy& a : mine) {
      for (const Occupancy& b : held_) {
        if (b.robot == path.robot || !same_resource(a, b)) continue;
        if (a.interval.begin < b.interval.end - ReservationTable::kEps &&
            b.interval.begin < a.interval.end - ReservationTable::kEps)
          return false;
      }
    }
    cut(path.robot, path.start_time);
    held_.insert(held_.end(), mine.begin(), mine.end());
    return true;
  }
  void release(RobotId robot, WaypointId node, double now) {
    cut(robot, now);
    held_.push_back(Occupancy{robot, node, -1, Interval{now, kForever, robot}});
  }
  std::vector<Occupancy> contents() const {
    auto out = held_;
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static bool same_resource(const Occupancy& a, const Occupancy& b) {
    if (a.edge_to < 0 || b.edge_to < 0) return a.edge_to < 0 && b.edge_to < 0 && a.node == b.node;
    return (a.node == b.node && a.edge_to == b.edge_to) || (a.node == b.edge_to && a.edge_to == b.node);
  }
  void cut(RobotId robot, double at) {
    std::vector<Occupancy> kept;
    for (Occupancy o : held_) {
      if (o.robot != robot) {
        kept.push_back(o);
      } else if (o.interval.begin < at) {
        o.interval.end = std::min(o.interval.end, at);
        kept.push_back(o);
      }
    }
    held_ = std::move(kept);
  }
  std::vector<Occupancy> held_;
};

}  // namespace

TEST_CASE("start equal to goal gives an empty path") {
  ReservationTable table(grid().cell_count());
  const auto path = plan_path(grid(), Kinematics{}, table, request(1, {1, 1}, 0, {1, 1}));
  REQUIRE(path);
  CHECK(path->empty());
  CHECK(path->total_duration() == 0.0);
}

TEST_CASE("straight two-edge path takes exactly 40 s") {
  ReservationTable table(grid().cell_count());
  const auto path = plan_path(grid(), Kinematics{}, table, request(1, {1, 0}, 0, {1, 2}));
  REQUIRE(path);
  CHECK(path->moves() == 2);
  CHECK(path->total_duration() == 40.0);
  for (const PathStep& s : path->steps) CHECK(s.turn_start == s.departure);
}

TEST_CASE("one quarter turn adds exactly 0.75 s") {
  ReservationTable table(grid().cell_count());
  const auto path = plan_path(grid(), Kinematics{}, table, request(1, {1, 0}, 1, {1, 2}));
  REQUIRE(path);
  CHECK(path->moves() == 2);
  CHECK(path->total_duration() == 40.75);
}

TEST_CASE("without rotation cost the duration is hops times edge time") {
  Kinematics k;
  k.t_full_turn = 0.0;
  ReservationTable table(grid().cell_count());
  for (WaypointId a = 0; a < grid().cell_count(); ++a) {
    for (WaypointId b = 0; b < grid().cell_count(); ++b) {
      const auto path = plan_path(grid(), k, table, PlanRequest{RobotId{1}, a, 0, 0.0, b});
      REQUIRE(path);
      CHECK(path->total_duration() == doctest::Approx(grid().distance(a, b) * 20.0));
    }
  }
}

TEST_CASE("lift dwell passes the configured times through") {
  Kinematics k;
  CHECK(lift_dwell(k, LiftKind::Pickup) == 3.0);
  CHECK(lift_dwell(k, LiftKind::Setdown) == 3.0);
  k.t_pickup = 0.0;
  k.t_setdown = 0.0;
  CHECK(lift_dwell(k, LiftKind::Pickup) == 0.0);
  k.t_pickup = 2.0;
  k.t_setdown = 4.0;
  CHECK(lift_dwell(k, LiftKind::Pickup) == 2.0);
  CHECK(lift_dwell(k, LiftKind::Setdown) == 4.0);
}

TEST_CASE("turn messages use positive degrees for right turns") {
  CHECK(turn_degrees(0, 1) == -90);  // east to north is a left turn
  CHECK(turn_degrees(1, 0) == 90);
  CHECK(turn_degrees(0, 2) == 180);
  CHECK(turn_degrees(3, 3) == 0);
}

TEST_CASE("reserved paths scan clean and overlaps are rejected") {
  ReservationTable table(grid().cell_count());
  const TimedPath a = straight(1, {grid().id({1, 0}), grid().id({1, 1}), grid().id({1, 2})}, 0.0, 20.0);
  REQUIRE(table.reserve(a));
  const TimedPath b = straight(2, {grid().id({0, 1}), grid().id({1, 1}), grid().id({2, 1})}, 0.0, 20.0);
  CHECK_FALSE(table.conflicts(b).empty());
  CHECK_FALSE(table.reserve(b));

  const auto planned = plan_path(grid(), Kinematics{}, table, request(2, {0, 1}, 3, {2, 1}));
  REQUIRE(planned);
  REQUIRE(table.reserve(*planned));
  const ScanReport scan = scan_conflicts(grid(), {a, *planned}, Kinematics{}.v_max, planned->end_time() + 1.0);
  CHECK(scan.clean());
}

TEST_CASE("head-on swap is rejected") {
  ReservationTable table(grid().cell_count());
  REQUIRE(table.reserve(straight(1, {0, 1}, 0.0, 20.0)));
  CHECK_FALSE(table.reserve(straight(2, {1, 0}, 0.0, 20.0)));
}

TEST_CASE("random reserve and release ops match the naive interval lists") {
  LayoutConfig cfg = default_layout_config();
  cfg.rows = 4;
  cfg.cols = 4;
  cfg.stations = {StationSpec{StationId{1}, StationKind::Replenish, Coord{3, 0}, 2},
                  StationSpec{StationId{2}, StationKind::Pick, Coord{3, 3}, 2}};
  const Layout layout = Layout::build(cfg);
  ReservationTable table(layout.cell_count());
  NaiveTable naive;
  std::mt19937_64 rng(1000);
  std::vector<double> clock(4, 0.0);
  int accepted = 0;
  for (int op = 0; op < 1000; ++op) {
    const int r = static_cast<int>(rng() % 4);
    clock[r] += static_cast<double>(rng() % 30);
    if (rng() % 4 == 0) {
      const WaypointId at = static_cast<WaypointId>(rng() % layout.cell_count());
      table.release(RobotId{r}, at, clock[r]);
      naive.release(RobotId{r}, at, clock[r]);
    } else {
      TimedPath p;
      p.robot = RobotId{r};
      p.start_time = clock[r];
      WaypointId w = static_cast<WaypointId>(rng() % layout.cell_count());
      double t = clock[r];
      const int moves = static_cast<int>(rng() % 4);
      for (int m = 0; m <= moves; ++m) {
        PathStep s;
        s.waypoint = w;
        s.arrival = t;
        s.turn_start = t + static_cast<double>(rng() % 5);
        s.departure = m < moves ? s.turn_start + 0.75 * static_cast<double>(rng() % 2) : t;
        if (m == moves) s.turn_start = t;
        p.steps.push_back(s);
        t = s.departure + 20.0;
        const auto nb = layout.neighbors(w);
        w = nb[rng() % nb.size()];
      }
      const bool ok = table.reserve(p);
      CHECK(ok == naive.reserve(p));
      accepted += ok;
    }
    REQUIRE(table.contents() == naive.contents());
  }
  CHECK(accepted > 50);
}

TEST_CASE("prioritized planning on a small fleet stays conflict-free") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    ReservationTable table(grid().cell_count());
    std::vector<WaypointId> cells(grid().cell_count());
    for (int i = 0; i < grid().cell_count(); ++i) cells[i] = i;
    std::shuffle(cells.begin(), cells.end(), rng);
    std::vector<TimedPath> paths;
    for (int r = 0; r < 3; ++r) table.release(RobotId{r}, cells[r], 0.0);
    double until = 0.0;
    for (int r = 0; r < 3; ++r) {
      const auto p = plan_path(grid(), Kinematics{}, table, PlanRequest{RobotId{r}, cells[r], 0, 0.0, cells[3 + r]});
      if (!p) {
        TimedPath stay;
        stay.robot = RobotId{r};
        stay.steps.push_back(PathStep{cells[r], 0.0, 0.0, 0.0, 0});
        paths.push_back(stay);
        continue;
      }
      REQUIRE(table.reserve(*p));
      paths.push_back(*p);
      until = std::max(until, p->end_time());
    }
    const ScanReport scan = scan_conflicts(grid(), paths, Kinematics{}.v_max, until + 1.0);
    CHECK_MESSAGE(scan.clean(), (scan.details.empty() ? "" : scan.details.front()));
  }
}

TEST_CASE("conflict scan sees a vertex collision and a later path taking over") {
  const TimedPath a = straight(1, {0, 1}, 0.0, 20.0);
  const TimedPath b = straight(2, {2, 1}, 0.0, 20.0);
  CHECK(scan_conflicts(grid(), {a, b}, 0.05, 30.0).vertex_conflicts > 0);
  const TimedPath b_late = straight(2, {2, 1}, 30.0, 20.0);
  CHECK(scan_conflicts(grid(), {a, b_late}, 0.05, 80.0).vertex_conflicts > 0);
  const TimedPath a2 = straight(1, {1, 5}, 20.0, 20.0);  // leaves 1 before b arrives
  CHECK(scan_conflicts(grid(), {a, a2, b_late}, 0.05, 80.0).clean());
}
