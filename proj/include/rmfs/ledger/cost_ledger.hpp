#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rmfs/core/ids.hpp"
#include "rmfs/world/layout.hpp"
#include "rmfs/world/world.hpp"

namespace rmfs {

enum class CostMetric { Hops, TravelTime };

// Repositioning cost tables over (storage place, station) pairs.
// to_station: cost of bringing a pod from a place to a station.
// from_station: cost of returning a pod from a station to a place.
struct CostFunctions {
  std::vector<WaypointId> places;
  std::vector<StationId> stations;
  std::vector<std::vector<double>> to_station;    // [place][station]
  std::vector<std::vector<double>> from_station;  // [station][place]
  double c_max = 0.0;                             // max over pairs of to + from

  static CostFunctions from_layout(const Layout& layout, CostMetric metric = CostMetric::Hops,
                                   const Kinematics& kinematics = {});

  std::optional<std::size_t> place_index(WaypointId place) const;
  std::optional<std::size_t> station_index(StationId station) const;
  double to(WaypointId place, StationId station) const;
  double from(StationId station, WaypointId place) const;
  void recompute_c_max();
};

// One repositioning epoch: the pod released at station S is assigned place
// pi, while a pod simultaneously leaves place P for station tau. D is the
// epoch at which the pod stored here departs again, once known.
struct EpochRecord {
  long t = 0;
  StationId S;
  WaypointId pi = -1;
  WaypointId P = -1;
  StationId tau;
  std::optional<long> D;
  bool operator==(const EpochRecord&) const = default;
};

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct SplitSums {
  double total = 0.0;
  double departed = 0.0;
  double residual = 0.0;
};

struct LedgerReport {
  long N = 0;
  double direct_avg = 0.0;
  double departed_part = 0.0;
  double residual_part = 0.0;
  double shifted_avg = 0.0;
  double decomposed_est = 0.0;         // station frequencies as weights
  double decomposed_unweighted = 0.0;  // plain sum over stations
  double swapped_avg = 0.0;            // departure station taken at assignment epoch instead of D_t
  double residual_bound = 0.0;         // pods * c_max / N
  SplitSums sums;
  std::map<StationId, double> q_hat;
};

class CostLedger {
 public:
  CostLedger(CostFunctions costs, int pod_count);

  const CostFunctions& costs() const { return costs_; }
  int pod_count() const { return pod_count_; }
  long size() const { return static_cast<long>(epochs_.size()); }
  const std::vector<EpochRecord>& epochs() const { return epochs_; }

  long record_epoch(StationId S, WaypointId pi, WaypointId P, StationId tau);
  // Throws PreconditionError unless t_assign < t_depart and t_assign is an
  // existing, not yet linked epoch. t_depart may lie beyond size().
  void link_departure(long t_assign, long t_depart);
  long unlinked_count() const;

  double direct_average(long N) const;
  SplitSums split_sums(long N) const;
  std::pair<double, double> split_average(long N) const;
  double shifted_average(long N) const;
  double decomposed_estimate(long N) const;
  double decomposed_unweighted(long N) const;
  std::map<StationId, double> station_frequencies(long N) const;

  LedgerReport report(long N) const;
  // Checkpoints beyond size() are skipped.
  std::vector<LedgerReport> convergence_report(std::span<const long> checkpoints) const;

 private:
  void check_horizon(long N) const;
  double epoch_cost(const EpochRecord& e) const;
  bool departed_before(const EpochRecord& e, long N) const { return e.D && *e.D < N; }
  double decomposed(long N, bool weighted) const;

  CostFunctions costs_;
  int pod_count_;
  std::vector<EpochRecord> epochs_;
};

std::string convergence_csv(const std::vector<LedgerReport>& rows);

// Turns the engine's stream of pod departures and store decisions into
// ledger epochs. The k-th store decision is paired with the k-th departure;
// the first `burn_in` of each are dropped.
class EpochPairing {
 public:
  EpochPairing(CostLedger& ledger, long burn_in) : ledger_(ledger), burn_in_(burn_in) {}

  void on_departure(PodId pod, WaypointId place, StationId station);
  // Returns the epoch index recorded, if past burn-in.
  std::optional<long> on_store(PodId pod, StationId station, WaypointId place);

  long departures() const { return departures_; }
  long stores() const { return stores_; }
  // Pods whose latest recorded assignment has not departed yet.
  std::vector<PodId> pods_awaiting_departure() const;

 private:
  struct Departure {
    long ordinal;
    WaypointId place;
    StationId station;
  };
  CostLedger& ledger_;
  long burn_in_;
  long departures_ = 0;
  long stores_ = 0;
  std::vector<Departure> pending_;
  std::size_t pending_head_ = 0;
  std::unordered_map<PodId, long> awaiting_;
};

}  // namespace rmfs
