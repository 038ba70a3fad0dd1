#include "rmfs/sim/metrics.hpp"

#include <fmt/format.h>

namespace rmfs {

MetricsReport make_report(const Engine& engine, const RunMetrics& m) {
  MetricsReport r;
  r.horizon_s = engine.options().horizon_s;
  r.end_time = m.end_time;
  r.accepted_orders = m.accepted_orders;
  r.completed_orders = m.completed_orders;
  r.completed_receipts = m.completed_receipts;
  r.throughput_per_hour = m.end_time > 0.0 ? m.completed_orders * 3600.0 / m.end_time : 0.0;
  r.pile_on = m.pod_visits > 0 ? static_cast<double>(m.served_in_visits) / m.pod_visits : 0.0;
  const double robot_seconds = m.end_time * static_cast<double>(engine.world().robots().size());
  r.robot_utilization = robot_seconds > 0.0 ? m.busy_robot_seconds / robot_seconds : 0.0;
  r.pod_visits = m.pod_visits;
  r.requeues = m.requeues;
  r.parked_orders = m.parked_orders;
  r.replan_failures = m.replan_failures;
  if (const CostLedger* ledger = engine.ledger(); ledger && ledger->size() > 0) {
    r.ledger_epochs = ledger->size();
    r.ledger_direct_avg = ledger->direct_average(ledger->size());
    r.ledger_decomposed_est = ledger->decomposed_estimate(ledger->size());
  }
  r.aborted = m.aborted;
  return r;
}

std::string metrics_csv_header() {
  return "horizon_s,end_time,accepted_orders,completed_orders,completed_receipts,throughput_per_hour,pile_on,"
         "robot_utilization,pod_visits,requeues,parked_orders,replan_failures,ledger_epochs,ledger_direct_avg,"
         "ledger_decomposed_est,aborted";
}

std::string metrics_csv_row(const MetricsReport& r) {
  return fmt::format("{},{:.3f},{},{},{},{:.6f},{:.6f},{:.6f},{},{},{},{},{},{:.9g},{:.9g},{}", r.horizon_s,
                     r.end_time, r.accepted_orders, r.completed_orders, r.completed_receipts, r.throughput_per_hour,
                     r.pile_on, r.robot_utilization, r.pod_visits, r.requeues, r.parked_orders, r.replan_failures,
                     r.ledger_epochs, r.ledger_direct_avg, r.ledger_decomposed_est, r.aborted ? 1 : 0);
}

void write_metrics_csv(std::ostream& out, const MetricsReport* report) {
  out << metrics_csv_header() << '\n';
  if (report) out << metrics_csv_row(*report) << '\n';
}

}  // namespace rmfs
