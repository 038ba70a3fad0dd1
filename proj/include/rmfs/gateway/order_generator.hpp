#pragma once

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "rmfs/core/rng.hpp"
#include "rmfs/gateway/order_gateway.hpp"

namespace rmfs {

struct GeneratorConfig {
  double rate_per_hour = 0.0;  // pick orders
  double mean_lines = 1.8;
  int max_lines = 4;
  int max_quantity = 1;
  std::vector<std::pair<SkuId, double>> sku_weights;
  double receipt_rate_per_hour = 0.0;
  int bundle_quantity = 1;
  double cutoff_s = std::numeric_limits<double>::infinity();  // no arrivals at or after
};

// Success parameter p of a geometric distribution truncated to
// {1..max_lines} whose mean is `mean`. Throws ConfigError when the mean is
// outside [1, (max_lines+1)/2].
double truncated_geometric_p(double mean, int max_lines);

// Built-in feed: Poisson pick orders and Poisson receipts (one bundle each),
// SKUs drawn from a categorical distribution. Orders and receipts use
// separate RNG streams.
class OrderGenerator {
 public:
  OrderGenerator(GeneratorConfig config, Rng order_rng, Rng receipt_rng);

  // Next arrival strictly after the previous one, or nullopt once the
  // stream is exhausted (rate 0 or past the cutoff).
  std::optional<FeedEvent> next_order();
  std::optional<FeedEvent> next_receipt();

  const GeneratorConfig& config() const { return config_; }

 private:
  SkuId draw_sku(Rng& rng);

  GeneratorConfig config_;
  Rng order_rng_;
  Rng receipt_rng_;
  std::discrete_distribution<int> sku_dist_;
  std::discrete_distribution<int> lines_dist_;
  double order_clock_ = 0.0;
  double receipt_clock_ = 0.0;
  int next_order_ = 1;
  int next_bundle_ = 1;
};

}  // namespace rmfs
