#include "rmfs/ledger/naive_recompute.hpp"

#include <map>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "rmfs/core/error.hpp"

namespace rmfs {

namespace {

long double a_cost(const CostFunctions& c, WaypointId place, StationId station) {
  for (std::size_t p = 0; p < c.places.size(); ++p) {
    if (c.places[p] != place) continue;
    for (std::size_t s = 0; s < c.stations.size(); ++s) {
      if (c.stations[s] == station) return c.to_station[p][s];
    }
  }
  throw PreconditionError(fmt::format("no cost for place {} and station {}", place, station.value));
}

long double b_cost(const CostFunctions& c, StationId station, WaypointId place) {
  for (std::size_t s = 0; s < c.stations.size(); ++s) {
    if (c.stations[s] != station) continue;
    for (std::size_t p = 0; p < c.places.size(); ++p) {
      if (c.places[p] == place) return c.from_station[s][p];
    }
  }
  throw PreconditionError(fmt::format("no cost for station {} and place {}", station.value, place));
}

}  // namespace

NaiveStats naive_statistics(const std::vector<EpochRecord>& epochs, const CostFunctions& costs, long N) {
  if (N <= 0 || N > static_cast<long>(epochs.size())) throw PreconditionError("naive horizon out of range");
  NaiveStats out;
  out.N = N;
  std::map<StationId, long> tau_count;
  for (long t = 0; t < N; ++t) ++tau_count[epochs[t].tau];

  long double direct = 0, departed = 0, residual = 0, shifted = 0, weighted = 0, unweighted = 0;
  for (long t = 0; t < N; ++t) {
    const EpochRecord& e = epochs[t];
    const long double b = b_cost(costs, e.S, e.pi);
    const long double cost = a_cost(costs, e.P, e.tau) + b;
    direct += cost;
    const bool gone = e.D.has_value() && *e.D < N;
    if (gone) {
      departed += cost;
      shifted += a_cost(costs, e.pi, epochs[*e.D].tau) + b;
      long double w = 0, u = 0;
      for (StationId s : costs.stations) {
        const long double a = a_cost(costs, e.pi, s);
        auto it = tau_count.find(s);
        w += (it == tau_count.end() ? 0 : it->second) * a / N;
        u += a;
      }
      weighted += w + b;
      unweighted += u + b;
    } else {
      residual += cost;
      shifted += b;
      weighted += b;
      unweighted += b;
      ++out.unlinked;
    }
  }
  out.direct = direct / N;
  out.departed = departed / N;
  out.residual = residual / N;
  out.shifted = shifted / N;
  out.decomposed = weighted / N;
  out.decomposed_unweighted = unweighted / N;
  return out;
}

std::vector<EpochRecord> epochs_from_log(const std::string& log_text, long burn_in, int cols) {
  static const std::regex epoch_re(R"(\tEpoch\tt=(\d+) pod=(\d+) S=(\d+) pi=\((\d+),(\d+)\))");
  static const std::regex pickup_re(R"(\tPodPickedUp\trobot=\d+ pod=(\d+) from=\((\d+),(\d+)\) station=(\d+))");
  struct Pickup {
    WaypointId place;
    StationId station;
  };
  std::vector<Pickup> pickups;
  std::vector<EpochRecord> out;
  std::map<int, long> awaiting;
  std::istringstream in(log_text);
  std::string line;
  std::smatch m;
  while (std::getline(in, line)) {
    if (std::regex_search(line, m, pickup_re)) {
      const int pod = std::stoi(m[1]);
      const long ordinal = static_cast<long>(pickups.size());
      pickups.push_back(Pickup{std::stoi(m[2]) * cols + std::stoi(m[3]), StationId{std::stoi(m[4])}});
      if (auto it = awaiting.find(pod); it != awaiting.end()) {
        out[it->second].D = ordinal - burn_in;
        awaiting.erase(it);
      }
    } else if (std::regex_search(line, m, epoch_re)) {
      EpochRecord e;
      e.t = std::stol(m[1]);
      if (e.t != static_cast<long>(out.size())) throw PreconditionError(fmt::format("record {} missing", out.size()));
      e.S = StationId{std::stoi(m[3])};
      e.pi = std::stoi(m[4]) * cols + std::stoi(m[5]);
      const long ordinal = e.t + burn_in;
      if (ordinal >= static_cast<long>(pickups.size())) {
        throw PreconditionError(fmt::format("epoch {} precedes its departure", e.t));
      }
      e.P = pickups[ordinal].place;
      e.tau = pickups[ordinal].station;
      awaiting[std::stoi(m[2])] = e.t;
      out.push_back(e);
    }
  }
  return out;
}

}  // namespace rmfs
