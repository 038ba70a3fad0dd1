#include "rmfs/ledger/epoch_dump.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "rmfs/core/error.hpp"
#include "rmfs/ledger/naive_recompute.hpp"

namespace rmfs {

namespace {

constexpr const char* kMagic = "# rmfs epoch dump v1";

std::vector<std::string> fields_of(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string f;
  while (in >> f) out.push_back(f);
  return out;
}

long to_long(const std::string& s, const std::string& line) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw PreconditionError(fmt::format("bad number '{}' in line '{}'", s, line));
}

double to_double(const std::string& s, const std::string& line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw PreconditionError(fmt::format("bad number '{}' in line '{}'", s, line));
}

double relative(long double reference, double value) {
  const long double scale = std::fabs(reference) > 0 ? std::fabs(reference) : 1.0L;
  return static_cast<double>(std::fabs(reference - static_cast<long double>(value)) / scale);
}

}  // namespace

void write_epoch_dump(std::ostream& out, const CostLedger& ledger) {
  const CostFunctions& c = ledger.costs();
  out << kMagic << '\n';
  out << "pods " << ledger.pod_count() << '\n';
  for (StationId s : c.stations) out << "station " << s.value << '\n';
  for (WaypointId p : c.places) out << "place " << p << '\n';
  for (std::size_t p = 0; p < c.places.size(); ++p) {
    for (std::size_t s = 0; s < c.stations.size(); ++s) {
      out << fmt::format("A {} {} {:.17g}\n", c.places[p], c.stations[s].value, c.to_station[p][s]);
    }
  }
  for (std::size_t s = 0; s < c.stations.size(); ++s) {
    for (std::size_t p = 0; p < c.places.size(); ++p) {
      out << fmt::format("B {} {} {:.17g}\n", c.stations[s].value, c.places[p], c.from_station[s][p]);
    }
  }
  out << "epochs " << ledger.size() << '\n';
  for (const EpochRecord& e : ledger.epochs()) {
    out << fmt::format("{} {} {} {} {} {}\n", e.t, e.S.value, e.pi, e.P, e.tau.value,
                       e.D ? std::to_string(*e.D) : std::string("-"));
  }
  if (ledger.size() > 0) out << fmt::format("check {:.17g}\n", ledger.direct_average(ledger.size()));
}

EpochDump read_epoch_dump(std::istream& in) {
  EpochDump dump;
  std::string line;
  bool any = false;
  long declared = -1;
  std::map<std::pair<WaypointId, int>, double> a;
  std::map<std::pair<int, WaypointId>, double> b;
  while (std::getline(in, line)) {
    if (in.eof() && !line.empty()) break;  // cut off mid-line
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto f = fields_of(line);
    if (f.empty()) continue;
    if (!any) {
      any = true;
      if (line != kMagic) throw PreconditionError(fmt::format("not an epoch dump: '{}'", line));
      continue;
    }
    if (f[0] == "pods" && f.size() == 2) {
      dump.pods = static_cast<int>(to_long(f[1], line));
    } else if (f[0] == "station" && f.size() == 2) {
      dump.costs.stations.push_back(StationId{static_cast<int>(to_long(f[1], line))});
    } else if (f[0] == "place" && f.size() == 2) {
      dump.costs.places.push_back(static_cast<WaypointId>(to_long(f[1], line)));
    } else if (f[0] == "A" && f.size() == 4) {
      a[{static_cast<WaypointId>(to_long(f[1], line)), static_cast<int>(to_long(f[2], line))}] = to_double(f[3], line);
    } else if (f[0] == "B" && f.size() == 4) {
      b[{static_cast<int>(to_long(f[1], line)), static_cast<WaypointId>(to_long(f[2], line))}] = to_double(f[3], line);
    } else if (f[0] == "epochs" && f.size() == 2) {
      declared = to_long(f[1], line);
    } else if (f[0] == "check" && f.size() == 2) {
      dump.check_direct_avg = to_double(f[1], line);
      dump.has_check = true;
    } else if (f.size() == 6 && declared >= 0) {
      EpochRecord e;
      e.t = to_long(f[0], line);
      if (e.t != static_cast<long>(dump.epochs.size())) {
        throw PreconditionError(fmt::format("record {} missing", dump.epochs.size()));
      }
      e.S = StationId{static_cast<int>(to_long(f[1], line))};
      e.pi = static_cast<WaypointId>(to_long(f[2], line));
      e.P = static_cast<WaypointId>(to_long(f[3], line));
      e.tau = StationId{static_cast<int>(to_long(f[4], line))};
      if (f[5] != "-") e.D = to_long(f[5], line);
      dump.epochs.push_back(e);
    } else {
      throw PreconditionError(fmt::format("unrecognised dump line '{}'", line));
    }
  }
  if (!any || declared == 0) throw PreconditionError("empty dump");
  if (declared < 0) throw PreconditionError("record 0 missing");
  if (static_cast<long>(dump.epochs.size()) < declared) {
    throw PreconditionError(fmt::format("record {} missing", dump.epochs.size()));
  }
  if (static_cast<long>(dump.epochs.size()) > declared) {
    throw PreconditionError(fmt::format("dump declares {} epochs but holds {}", declared, dump.epochs.size()));
  }
  CostFunctions& c = dump.costs;
  c.to_station.assign(c.places.size(), std::vector<double>(c.stations.size(), 0.0));
  c.from_station.assign(c.stations.size(), std::vector<double>(c.places.size(), 0.0));
  for (std::size_t p = 0; p < c.places.size(); ++p) {
    for (std::size_t s = 0; s < c.stations.size(); ++s) {
      auto ia = a.find({c.places[p], c.stations[s].value});
      auto ib = b.find({c.stations[s].value, c.places[p]});
      if (ia == a.end() || ib == b.end()) {
        throw PreconditionError(
            fmt::format("cost missing for place {} and station {}", c.places[p], c.stations[s].value));
      }
      c.to_station[p][s] = ia->second;
      c.from_station[s][p] = ib->second;
    }
  }
  c.recompute_c_max();
  return dump;
}

CostLedger rebuild_ledger(const EpochDump& dump) {
  CostLedger ledger(dump.costs, dump.pods);
  for (const EpochRecord& e : dump.epochs) ledger.record_epoch(e.S, e.pi, e.P, e.tau);
  for (const EpochRecord& e : dump.epochs) {
    if (e.D) ledger.link_departure(e.t, *e.D);
  }
  return ledger;
}

LedgerVerification verify_ledger(const EpochDump& dump) {
  const CostLedger ledger = rebuild_ledger(dump);
  const long N = ledger.size();
  const LedgerReport r = ledger.report(N);
  const NaiveStats n = naive_statistics(dump.epochs, dump.costs, N);
  LedgerVerification v;
  v.epochs = N;
  const std::pair<const char*, std::pair<long double, double>> stats[] = {
      {"direct_avg", {n.direct, r.direct_avg}},
      {"departed_part", {n.departed, r.departed_part}},
      {"residual_part", {n.residual, r.residual_part}},
      {"shifted_avg", {n.shifted, r.shifted_avg}},
      {"decomposed_est", {n.decomposed, r.decomposed_est}},
      {"decomposed_unweighted", {n.decomposed_unweighted, r.decomposed_unweighted}},
  };
  for (const auto& [name, pair] : stats) {
    const double dev = relative(pair.first, pair.second);
    v.lines.push_back(fmt::format("{} ledger={:.17g} naive={:.17g} rel_dev={:.3g}", name, pair.second,
                                  static_cast<double>(pair.first), dev));
    if (dev >= v.max_relative_deviation) {
      v.max_relative_deviation = dev;
      v.worst_statistic = name;
    }
  }
  if (dump.has_check) {
    v.check_matches = relative(dump.check_direct_avg, r.direct_avg) <= 1e-12;
    v.lines.push_back(fmt::format("check stored={:.17g} recomputed={:.17g} {}", dump.check_direct_avg, r.direct_avg,
                                  v.check_matches ? "match" : "MISMATCH"));
  }
  return v;
}

}  // namespace rmfs
