#include "rmfs/ledger/cost_ledger.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rmfs/core/error.hpp"

namespace rmfs {

CostFunctions CostFunctions::from_layout(const Layout& layout, CostMetric metric, const Kinematics& kinematics) {
  CostFunctions c;
  c.places = layout.storage_places();
  for (const Station& s : layout.stations()) c.stations.push_back(s.id);
  const double scale = metric == CostMetric::Hops ? 1.0 : kinematics.edge_time(layout.spacing_m());
  c.to_station.assign(c.places.size(), std::vector<double>(c.stations.size(), 0.0));
  c.from_station.assign(c.stations.size(), std::vector<double>(c.places.size(), 0.0));
  for (std::size_t p = 0; p < c.places.size(); ++p) {
    for (std::size_t s = 0; s < c.stations.size(); ++s) {
      const WaypointId station_wp = layout.station(c.stations[s]).waypoint;
      c.to_station[p][s] = layout.distance(c.places[p], station_wp) * scale;
      c.from_station[s][p] = layout.distance(station_wp, c.places[p]) * scale;
    }
  }
  c.recompute_c_max();
  return c;
}

void CostFunctions::recompute_c_max() {
  c_max = 0.0;
  for (std::size_t p = 0; p < places.size(); ++p) {
    for (std::size_t s = 0; s < stations.size(); ++s) {
      // A and B are taken at independent pairs within one epoch.
      for (std::size_t s2 = 0; s2 < stations.size(); ++s2) {
        for (std::size_t p2 = 0; p2 < places.size(); ++p2) {
          c_max = std::max(c_max, to_station[p][s] + from_station[s2][p2]);
        }
      }
    }
  }
}

std::optional<std::size_t> CostFunctions::place_index(WaypointId place) const {
  auto it = std::find(places.begin(), places.end(), place);
  if (it == places.end()) return std::nullopt;
  return static_cast<std::size_t>(it - places.begin());
}

std::optional<std::size_t> CostFunctions::station_index(StationId station) const {
  auto it = std::find(stations.begin(), stations.end(), station);
  if (it == stations.end()) return std::nullopt;
  return static_cast<std::size_t>(it - stations.begin());
}

double CostFunctions::to(WaypointId place, StationId station) const {
  return to_station.at(place_index(place).value()).at(station_index(station).value());
}

double CostFunctions::from(StationId station, WaypointId place) const {
  return from_station.at(station_index(station).value()).at(place_index(place).value());
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x)) {
    carry_ += (sum_ - t) + x;
  } else {
    carry_ += (x - t) + sum_;
  }
  sum_ = t;
}

CostLedger::CostLedger(CostFunctions costs, int pod_count) : costs_(std::move(costs)), pod_count_(pod_count) {
  if (costs_.places.empty() || costs_.stations.empty()) throw PreconditionError("cost tables are empty");
}

long CostLedger::record_epoch(StationId S, WaypointId pi, WaypointId P, StationId tau) {
  if (!costs_.place_index(pi)) throw PreconditionError(fmt::format("assigned place {} is not a storage place", pi));
  if (!costs_.place_index(P)) throw PreconditionError(fmt::format("departure place {} is not a storage place", P));
  if (!costs_.station_index(S)) throw PreconditionError(fmt::format("unknown station {}", S.value));
  if (!costs_.station_index(tau)) throw PreconditionError(fmt::format("unknown station {}", tau.value));
  const long t = size();
  epochs_.push_back(EpochRecord{t, S, pi, P, tau, std::nullopt});
  return t;
}

void CostLedger::link_departure(long t_assign, long t_depart) {
  if (t_assign < 0 || t_assign >= size()) throw PreconditionError(fmt::format("no epoch {}", t_assign));
  if (t_depart <= t_assign) {
    throw PreconditionError(fmt::format("departure epoch {} does not follow assignment {}", t_depart, t_assign));
  }
  EpochRecord& e = epochs_[t_assign];
  if (e.D) throw PreconditionError(fmt::format("epoch {} already linked to {}", t_assign, *e.D));
  e.D = t_depart;
}

long CostLedger::unlinked_count() const {
  return std::count_if(epochs_.begin(), epochs_.end(), [](const EpochRecord& e) { return !e.D; });
}

void CostLedger::check_horizon(long N) const {
  if (N <= 0 || size() == 0) throw PreconditionError("empty ledger");
  if (N > size()) throw PreconditionError(fmt::format("horizon {} exceeds {} recorded epochs", N, size()));
}

double CostLedger::epoch_cost(const EpochRecord& e) const { return costs_.to(e.P, e.tau) + costs_.from(e.S, e.pi); }

double CostLedger::direct_average(long N) const {
  check_horizon(N);
  CompensatedSum sum;
  for (long t = 0; t < N; ++t) sum.add(epoch_cost(epochs_[t]));
  return sum.value() / static_cast<double>(N);
}

SplitSums CostLedger::split_sums(long N) const {
  check_horizon(N);
  CompensatedSum total;
  CompensatedSum departed;
  CompensatedSum residual;
  for (long t = 0; t < N; ++t) {
    const double c = epoch_cost(epochs_[t]);
    total.add(c);
    (departed_before(epochs_[t], N) ? departed : residual).add(c);
  }
  return SplitSums{total.value(), departed.value(), residual.value()};
}

std::pair<double, double> CostLedger::split_average(long N) const {
  const SplitSums s = split_sums(N);
  return {s.departed / static_cast<double>(N), s.residual / static_cast<double>(N)};
}

double CostLedger::shifted_average(long N) const {
  check_horizon(N);
  CompensatedSum sum;
  for (long t = 0; t < N; ++t) {
    const EpochRecord& e = epochs_[t];
    double term = 0.0;
    if (departed_before(e, N)) term = costs_.to(e.pi, epochs_[*e.D].tau);
    sum.add(term + costs_.from(e.S, e.pi));
  }
  return sum.value() / static_cast<double>(N);
}

std::map<StationId, double> CostLedger::station_frequencies(long N) const {
  check_horizon(N);
  std::map<StationId, long> counts;
  for (StationId s : costs_.stations) counts[s] = 0;
  for (long t = 0; t < N; ++t) ++counts[epochs_[t].tau];
  std::map<StationId, double> q;
  for (const auto& [s, c] : counts) q[s] = static_cast<double>(c) / static_cast<double>(N);
  return q;
}

double CostLedger::decomposed(long N, bool weighted) const {
  const auto q = station_frequencies(N);
  CompensatedSum sum;
  for (long t = 0; t < N; ++t) {
    const EpochRecord& e = epochs_[t];
    double term = 0.0;
    if (departed_before(e, N)) {
      for (StationId s : costs_.stations) term += (weighted ? q.at(s) : 1.0) * costs_.to(e.pi, s);
    }
    sum.add(term + costs_.from(e.S, e.pi));
  }
  return sum.value() / static_cast<double>(N);
}

double CostLedger::decomposed_estimate(long N) const { return decomposed(N, true); }
double CostLedger::decomposed_unweighted(long N) const { return decomposed(N, false); }

LedgerReport CostLedger::report(long N) const {
  LedgerReport r;
  r.N = N;
  r.direct_avg = direct_average(N);
  r.sums = split_sums(N);
  r.departed_part = r.sums.departed / static_cast<double>(N);
  r.residual_part = r.sums.residual / static_cast<double>(N);
  r.shifted_avg = shifted_average(N);
  r.decomposed_est = decomposed_estimate(N);
  r.decomposed_unweighted = decomposed_unweighted(N);
  r.q_hat = station_frequencies(N);
  r.residual_bound = pod_count_ * costs_.c_max / static_cast<double>(N);

  CompensatedSum swapped;
  for (long t = 0; t < N; ++t) {
    const EpochRecord& e = epochs_[t];
    swapped.add((departed_before(e, N) ? costs_.to(e.pi, e.tau) : 0.0) + costs_.from(e.S, e.pi));
  }
  r.swapped_avg = swapped.value() / static_cast<double>(N);
  return r;
}

std::vector<LedgerReport> CostLedger::convergence_report(std::span<const long> checkpoints) const {
  std::vector<LedgerReport> rows;
  for (long N : checkpoints) {
    if (N > 0 && N <= size()) rows.push_back(report(N));
  }
  return rows;
}

std::string convergence_csv(const std::vector<LedgerReport>& rows) {
  std::string out =
      "N,direct_avg,departed_part,residual_part,residual_bound,shifted_avg,decomposed_est,decomposed_unweighted,"
      "swapped_avg\n";
  for (const LedgerReport& r : rows) {
    out += fmt::format("{},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}\n", r.N, r.direct_avg,
                       r.departed_part, r.residual_part, r.residual_bound, r.shifted_avg, r.decomposed_est,
                       r.decomposed_unweighted, r.swapped_avg);
  }
  return out;
}

void EpochPairing::on_departure(PodId pod, WaypointId place, StationId station) {
  const long ordinal = departures_++;
  if (auto it = awaiting_.find(pod); it != awaiting_.end()) {
    ledger_.link_departure(it->second, ordinal - burn_in_);
    awaiting_.erase(it);
  }
  if (ordinal >= burn_in_) pending_.push_back(Departure{ordinal, place, station});
}

std::optional<long> EpochPairing::on_store(PodId pod, StationId station, WaypointId place) {
  const long ordinal = stores_++;
  awaiting_.erase(pod);
  if (ordinal < burn_in_) return std::nullopt;
  if (pending_head_ >= pending_.size() || pending_[pending_head_].ordinal != ordinal) {
    throw PreconditionError(fmt::format("store decision {} has no matching departure", ordinal));
  }
  const Departure d = pending_[pending_head_++];
  if (pending_head_ > 4096) {
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<long>(pending_head_));
    pending_head_ = 0;
  }
  const long t = ledger_.record_epoch(station, place, d.place, d.station);
  awaiting_[pod] = t;
  return t;
}

std::vector<PodId> EpochPairing::pods_awaiting_departure() const {
  std::vector<PodId> out;
  for (const auto& [pod, _] : awaiting_) out.push_back(pod);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rmfs
