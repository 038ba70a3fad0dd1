#pragma once

#include <ostream>
#include <string>

#include "rmfs/sim/engine.hpp"

namespace rmfs {

struct MetricsReport {
  double horizon_s = 0.0;
  double end_time = 0.0;
  long accepted_orders = 0;
  long completed_orders = 0;
  long completed_receipts = 0;
  double throughput_per_hour = 0.0;  // completed orders per simulated hour
  double pile_on = 0.0;              // pick requests served per pod visit
  double robot_utilization = 0.0;    // busy robot-seconds over robot-seconds
  long pod_visits = 0;
  long requeues = 0;
  long parked_orders = 0;
  long replan_failures = 0;
  long ledger_epochs = 0;
  double ledger_direct_avg = 0.0;
  double ledger_decomposed_est = 0.0;
  bool aborted = false;
};

MetricsReport make_report(const Engine& engine, const RunMetrics& metrics);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& report);
void write_metrics_csv(std::ostream& out, const MetricsReport* report);

}  // namespace rmfs
