#include "rmfs/planner/conflict_scan.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace rmfs {
namespace {

// Where a robot is at time t: on a node (edge_to < 0) or moving node -> edge_to.
struct Position {
  WaypointId node = -1;
  WaypointId edge_to = -1;
};

class Cursor {
 public:
  explicit Cursor(const TimedPath* path) : path_(path) {}

  Position at(double t) {
    const auto& s = path_->steps;
    while (index_ + 1 < s.size() && t >= s[index_ + 1].arrival) ++index_;
    const PathStep& here = s[index_];
    if (index_ + 1 < s.size() && t > here.departure) return {here.waypoint, s[index_ + 1].waypoint};
    return {here.waypoint, -1};
  }

 private:
  const TimedPath* path_;
  std::size_t index_ = 0;
};

// All paths of one robot; each one takes over at its start time.
class Track {
 public:
  Track(RobotId robot, std::vector<const TimedPath*> paths)
      : robot_(robot), paths_(std::move(paths)), cursor_(paths_.front()) {}

  RobotId robot() const { return robot_; }

  // Requires nondecreasing t across calls.
  Position at(double t) {
    while (current_ + 1 < paths_.size() && paths_[current_ + 1]->start_time <= t) {
      ++current_;
      cursor_ = Cursor(paths_[current_]);
    }
    if (t < paths_[current_]->start_time) return {paths_[current_]->start(), -1};
    return cursor_.at(t);
  }

 private:
  RobotId robot_;
  std::vector<const TimedPath*> paths_;
  std::size_t current_ = 0;
  Cursor cursor_;
};

}  // namespace

ScanReport scan_conflicts(const Layout& layout, const std::vector<TimedPath>& paths, double v_max, double until,
                          double resolution) {
  ScanReport report;
  auto note = [&](std::string text) {
    if (report.details.size() < 10) report.details.push_back(std::move(text));
  };

  for (const TimedPath& p : paths) {
    for (std::size_t i = 0; i + 1 < p.steps.size(); ++i) {
      const PathStep& a = p.steps[i];
      const PathStep& b = p.steps[i + 1];
      if (!layout.adjacent(a.waypoint, b.waypoint)) {
        ++report.adjacency_violations;
        note(fmt::format("robot {} jumps {} -> {}", p.robot.value, a.waypoint, b.waypoint));
      }
      const double travel = b.arrival - a.departure;
      if (travel <= 0.0 || layout.spacing_m() / travel > v_max * (1.0 + 1e-9)) {
        ++report.speed_violations;
        note(fmt::format("robot {} too fast on {} -> {} ({} s)", p.robot.value, a.waypoint, b.waypoint, travel));
      }
    }
  }

  std::map<RobotId, std::vector<const TimedPath*>> by_robot;
  for (const TimedPath& p : paths)
    if (!p.steps.empty()) by_robot[p.robot].push_back(&p);
  std::vector<Track> tracks;
  for (auto& [robot, list] : by_robot) {
    std::stable_sort(list.begin(), list.end(),
                     [](const TimedPath* a, const TimedPath* b) { return a->start_time < b->start_time; });
    tracks.emplace_back(robot, std::move(list));
  }
  std::vector<Position> pos(tracks.size());

  const long samples = static_cast<long>(std::floor(until / resolution)) + 1;
  for (long k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) * resolution;
    for (std::size_t i = 0; i < tracks.size(); ++i) pos[i] = tracks[i].at(t);
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      for (std::size_t j = i + 1; j < tracks.size(); ++j) {
        const Position& a = pos[i];
        const Position& b = pos[j];
        if (a.edge_to < 0 && b.edge_to < 0 && a.node == b.node) {
          ++report.vertex_conflicts;
          note(fmt::format("t={:.1f} robots {} and {} both on {}", t, tracks[i].robot().value,
                           tracks[j].robot().value, a.node));
        } else if (a.edge_to >= 0 && b.edge_to >= 0 && a.node == b.edge_to && a.edge_to == b.node) {
          ++report.swap_conflicts;
          note(fmt::format("t={:.1f} robots {} and {} swap {}<->{}", t, tracks[i].robot().value,
                           tracks[j].robot().value, a.node, a.edge_to));
        }
      }
    }
  }
  report.samples = samples;
  return report;
}

}  // namespace rmfs
