#pragma once

#include <map>
#include <string>
#include <vector>

#include "rmfs/ledger/cost_ledger.hpp"

namespace rmfs {

// Reference statistics computed with straightforward loops and long double
// accumulators, independent of CostLedger's bookkeeping.
struct NaiveStats {
  long N = 0;
  long double direct = 0;
  long double departed = 0;
  long double residual = 0;
  long double shifted = 0;
  long double decomposed = 0;
  long double decomposed_unweighted = 0;
  long unlinked = 0;
};

NaiveStats naive_statistics(const std::vector<EpochRecord>& epochs, const CostFunctions& costs, long N);

// Rebuilds epoch records from engine log text. "Epoch" records give the
// stored pod and its assignment; the departure half of each epoch and every
// D come from counting "PodPickedUp" records.
std::vector<EpochRecord> epochs_from_log(const std::string& log_text, long burn_in, int cols);

}  // namespace rmfs
