#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "rmfs/ledger/cost_ledger.hpp"

namespace rmfs {

// Plain-text epoch dump: cost tables plus one row per epoch
// (t S pi P tau D), with "-" for a pod that has not departed again.
struct EpochDump {
  int pods = 0;
  CostFunctions costs;
  std::vector<EpochRecord> epochs;
  double check_direct_avg = 0.0;  // direct average over all epochs when written
  bool has_check = false;
};

void write_epoch_dump(std::ostream& out, const CostLedger& ledger);
// Every line ends in LF; an unterminated last line counts as cut off.
// Throws PreconditionError "empty dump" or "record t missing".
EpochDump read_epoch_dump(std::istream& in);
CostLedger rebuild_ledger(const EpochDump& dump);

struct LedgerVerification {
  long epochs = 0;
  double max_relative_deviation = 0.0;  // ledger statistics vs naive recomputation
  std::string worst_statistic;
  bool check_matches = true;  // stored direct average reproduced
  std::vector<std::string> lines;
};

LedgerVerification verify_ledger(const EpochDump& dump);

}  // namespace rmfs
