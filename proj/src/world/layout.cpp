#include "rmfs/world/layout.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "rmfs/core/error.hpp"
#include "rmfs/core/rng.hpp"

namespace rmfs {

std::string_view to_string(WaypointKind kind) {
  switch (kind) {
    case WaypointKind::Hole: return "Hole";
    case WaypointKind::Storage: return "Storage";
    case WaypointKind::Highway: return "Highway";
    case WaypointKind::Dwelling: return "Dwelling";
    case WaypointKind::PickStationQueue: return "PickStationQueue";
    case WaypointKind::ReplenishStationQueue: return "ReplenishStationQueue";
  }
  return "?";
}

std::string_view to_string(StationKind kind) { return kind == StationKind::Pick ? "Pick" : "Replenish"; }

LayoutConfig default_layout_config() {
  LayoutConfig cfg;
  cfg.rows = 3;
  cfg.cols = 4;
  cfg.spacing_m = 1.0;
  cfg.stations = {
      StationSpec{StationId{1}, StationKind::Replenish, Coord{2, 0}, 2},
      StationSpec{StationId{2}, StationKind::Pick, Coord{2, 3}, 2},
  };
  cfg.dwelling = {Coord{1, 1}, Coord{1, 2}};
  return cfg;
}

Layout Layout::build(const LayoutConfig& config) {
  if (config.rows < 2 || config.cols < 2) {
    throw ConfigError(fmt::format("layout must be at least 2x2, got {}x{}", config.rows, config.cols));
  }
  if (!(config.spacing_m > 0.0)) throw ConfigError("layout.spacing_m must be positive");
  if (config.stations.empty()) throw ConfigError("no stations");
  const bool has_pick = std::any_of(config.stations.begin(), config.stations.end(),
                                    [](const StationSpec& s) { return s.kind == StationKind::Pick; });
  const bool has_repl = std::any_of(config.stations.begin(), config.stations.end(),
                                    [](const StationSpec& s) { return s.kind == StationKind::Replenish; });
  if (!has_pick) throw ConfigError("no pick station");
  if (!has_repl) throw ConfigError("no replenishment station");

  Layout layout;
  layout.rows_ = config.rows;
  layout.cols_ = config.cols;
  layout.spacing_m_ = config.spacing_m;
  const int n = config.rows * config.cols;
  layout.kinds_.assign(n, WaypointKind::Storage);

  auto checked = [&](Coord c, const char* what) {
    if (!layout.contains(c)) {
      throw ConfigError(fmt::format("{} ({},{}) outside {}x{} grid", what, c.row, c.col, config.rows, config.cols));
    }
    return layout.id(c);
  };
  auto claim = [&](Coord c, WaypointKind kind, const char* what) {
    const WaypointId w = checked(c, what);
    if (layout.kinds_[w] != WaypointKind::Storage) {
      throw ConfigError(fmt::format("{} ({},{}) already used as {}", what, c.row, c.col, to_string(layout.kinds_[w])));
    }
    layout.kinds_[w] = kind;
    return w;
  };

  for (Coord c : config.holes) claim(c, WaypointKind::Hole, "hole");
  for (Coord c : config.highway) claim(c, WaypointKind::Highway, "highway");
  for (Coord c : config.dwelling) claim(c, WaypointKind::Dwelling, "dwelling point");

  std::set<StationId> seen;
  for (const StationSpec& spec : config.stations) {
    if (!seen.insert(spec.id).second) throw ConfigError(fmt::format("duplicate station id {}", spec.id.value));
    if (spec.capacity < 1) throw ConfigError(fmt::format("station {} capacity must be positive", spec.id.value));
  }

  // Stations without coordinates go on free border cells drawn from the placement seed.
  std::vector<WaypointId> border;
  for (int w = 0; w < n; ++w) {
    const Coord c = layout.coord(w);
    if (c.row == 0 || c.col == 0 || c.row == config.rows - 1 || c.col == config.cols - 1) border.push_back(w);
  }
  Rng rng = RngStreams(config.placement_seed).stream("layout.stations");

  for (const StationSpec& spec : config.stations) {
    const WaypointKind kind =
        spec.kind == StationKind::Pick ? WaypointKind::PickStationQueue : WaypointKind::ReplenishStationQueue;
    WaypointId w = -1;
    if (spec.at) {
      w = claim(*spec.at, kind, "station");
    } else {
      std::vector<WaypointId> free;
      for (WaypointId b : border) {
        if (layout.kinds_[b] == WaypointKind::Storage) free.push_back(b);
      }
      if (free.empty()) throw ConfigError("no free border cell for station placement");
      w = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
      layout.kinds_[w] = kind;
    }
    layout.stations_.push_back(Station{spec.id, spec.kind, w, spec.capacity});
  }
  std::sort(layout.stations_.begin(), layout.stations_.end(),
            [](const Station& a, const Station& b) { return a.id < b.id; });

  layout.adjacency_.assign(n, {});
  for (int w = 0; w < n; ++w) {
    if (layout.kinds_[w] == WaypointKind::Hole) continue;
    ++layout.waypoint_count_;
    const Coord c = layout.coord(w);
    // Fixed neighbour order (N, W, E, S) keeps search tie-breaking stable.
    const Coord around[] = {{c.row - 1, c.col}, {c.row, c.col - 1}, {c.row, c.col + 1}, {c.row + 1, c.col}};
    for (Coord o : around) {
      if (layout.contains(o) && layout.kinds_[layout.id(o)] != WaypointKind::Hole) {
        layout.adjacency_[w].push_back(layout.id(o));
      }
    }
    if (layout.kinds_[w] == WaypointKind::Storage) layout.storage_.push_back(w);
    if (layout.kinds_[w] == WaypointKind::Dwelling) layout.dwelling_.push_back(w);
  }

  layout.dist_.assign(static_cast<std::size_t>(n) * n, kUnreachable);
  std::deque<WaypointId> frontier;
  for (int src = 0; src < n; ++src) {
    if (layout.kinds_[src] == WaypointKind::Hole) continue;
    int* row = &layout.dist_[static_cast<std::size_t>(src) * n];
    row[src] = 0;
    frontier.assign(1, src);
    while (!frontier.empty()) {
      const WaypointId u = frontier.front();
      frontier.pop_front();
      for (WaypointId v : layout.adjacency_[u]) {
        if (row[v] == kUnreachable) {
          row[v] = row[u] + 1;
          frontier.push_back(v);
        }
      }
    }
  }

  // Every waypoint must be reachable from the first station.
  const WaypointId root = layout.stations_.front().waypoint;
  std::vector<std::string> unreachable;
  for (int w = 0; w < n; ++w) {
    if (layout.kinds_[w] != WaypointKind::Hole && layout.distance(root, w) == kUnreachable) {
      unreachable.push_back(layout.describe(w));
    }
  }
  if (!unreachable.empty()) {
    throw ConfigError(fmt::format("disconnected layout; unreachable waypoints: {}", fmt::join(unreachable, ", ")));
  }
  return layout;
}

bool Layout::adjacent(WaypointId a, WaypointId b) const {
  const auto nb = neighbors(a);
  return std::find(nb.begin(), nb.end(), b) != nb.end();
}

const Station& Layout::station(StationId id) const {
  for (const Station& s : stations_) {
    if (s.id == id) return s;
  }
  throw PreconditionError(fmt::format("unknown station {}", id.value));
}

std::optional<StationId> Layout::station_at(WaypointId w) const {
  for (const Station& s : stations_) {
    if (s.waypoint == w) return s.id;
  }
  return std::nullopt;
}

std::string Layout::describe(WaypointId w) const {
  const Coord c = coord(w);
  return fmt::format("({},{})", c.row, c.col);
}

int heading_between(const Layout& layout, WaypointId from, WaypointId to) {
  const Coord a = layout.coord(from);
  const Coord b = layout.coord(to);
  if (b.col > a.col) return 0;
  if (b.row < a.row) return 1;
  if (b.col < a.col) return 2;
  return 3;
}

double heading_radians(int heading) { return heading * (std::numbers::pi / 2.0); }

}  // namespace rmfs
