#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmfs/core/ids.hpp"

namespace rmfs {

enum class WaypointKind { Hole, Storage, Highway, Dwelling, PickStationQueue, ReplenishStationQueue };
enum class StationKind { Pick, Replenish };

std::string_view to_string(WaypointKind kind);
std::string_view to_string(StationKind kind);

struct Coord {
  int row = 0;
  int col = 0;
  auto operator<=>(const Coord&) const = default;
};

struct Station {
  StationId id;
  StationKind kind = StationKind::Pick;
  WaypointId waypoint = -1;
  int capacity = 2;  // pods queued or en route at once
};

struct StationSpec {
  StationId id;
  StationKind kind = StationKind::Pick;
  std::optional<Coord> at;  // placed on a random border cell when absent
  int capacity = 2;
};

struct LayoutConfig {
  int rows = 3;
  int cols = 4;
  double spacing_m = 1.0;
  std::vector<StationSpec> stations;
  std::vector<Coord> dwelling;
  std::vector<Coord> highway;
  std::vector<Coord> holes;
  std::uint64_t placement_seed = 0;
};

// Default desk layout: 3x4 grid, replenishment station bottom-left, pick
// station bottom-right, two dwelling points in the middle row.
LayoutConfig default_layout_config();

// Immutable 4-connected waypoint grid with stations and all-pairs hop
// distances.
class Layout {
 public:
  static constexpr int kUnreachable = -1;

  // Throws ConfigError on precondition violations or a disconnected graph.
  static Layout build(const LayoutConfig& config);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double spacing_m() const { return spacing_m_; }
  int cell_count() const { return rows_ * cols_; }
  int waypoint_count() const { return waypoint_count_; }

  bool contains(Coord c) const { return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_; }
  bool is_waypoint(WaypointId w) const { return w >= 0 && w < cell_count() && kinds_[w] != WaypointKind::Hole; }
  WaypointId id(Coord c) const { return c.row * cols_ + c.col; }
  Coord coord(WaypointId w) const { return {w / cols_, w % cols_}; }
  WaypointKind kind(WaypointId w) const { return kinds_.at(w); }
  std::span<const WaypointId> neighbors(WaypointId w) const { return adjacency_.at(w); }
  bool adjacent(WaypointId a, WaypointId b) const;

  const std::vector<Station>& stations() const { return stations_; }
  const Station& station(StationId id) const;
  std::optional<StationId> station_at(WaypointId w) const;
  const std::vector<WaypointId>& storage_places() const { return storage_; }
  const std::vector<WaypointId>& dwelling_points() const { return dwelling_; }

  // Hop count of a shortest path; kUnreachable when no path exists.
  int distance(WaypointId a, WaypointId b) const { return dist_[a * cell_count() + b]; }

  std::string describe(WaypointId w) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  double spacing_m_ = 1.0;
  int waypoint_count_ = 0;
  std::vector<WaypointKind> kinds_;
  std::vector<std::vector<WaypointId>> adjacency_;
  std::vector<Station> stations_;
  std::vector<WaypointId> storage_;
  std::vector<WaypointId> dwelling_;
  std::vector<int> dist_;
};

// graph_distance: shortest hop count between two waypoints.
inline int graph_distance(const Layout& layout, WaypointId a, WaypointId b) { return layout.distance(a, b); }

// Heading in quarter turns counter-clockwise from east (+col); north is -row.
int heading_between(const Layout& layout, WaypointId from, WaypointId to);
double heading_radians(int heading);

}  // namespace rmfs
