#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>

namespace rmfs {

// Integer identifier tagged by the entity it names, so a PodId cannot be
// passed where a RobotId is expected.
template <class Tag>
struct StrongId {
  int value = -1;

  constexpr StrongId() = default;
  constexpr explicit StrongId(int v) : value(v) {}

  constexpr bool valid() const { return value >= 0; }
  constexpr auto operator<=>(const StrongId&) const = default;
};

template <class Tag>
std::ostream& operator<<(std::ostream& os, StrongId<Tag> id) {
  return os << id.value;
}

using RobotId = StrongId<struct RobotTag>;
using PodId = StrongId<struct PodTag>;
using StationId = StrongId<struct StationTag>;
using OrderId = StrongId<struct OrderTag>;
using BundleId = StrongId<struct BundleTag>;
using RequestId = StrongId<struct RequestTag>;
using TransferId = StrongId<struct TransferTag>;
using TaskId = StrongId<struct TaskTag>;

// Index of a grid cell (row * cols + col). Holes keep their index but are
// not part of the waypoint graph.
using WaypointId = int;

using SkuId = std::string;

}  // namespace rmfs

template <class Tag>
struct std::hash<rmfs::StrongId<Tag>> {
  std::size_t operator()(rmfs::StrongId<Tag> id) const noexcept { return std::hash<int>{}(id.value); }
};
