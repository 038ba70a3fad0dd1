#include "rmfs/gateway/order_generator.hpp"

#include <cmath>

#include <fmt/format.h>

#include "rmfs/core/error.hpp"

namespace rmfs {
namespace {

double truncated_mean(double p, int max_lines) {
  double mass = 0.0;
  double first = 0.0;
  double w = p;
  for (int k = 1; k <= max_lines; ++k) {
    mass += w;
    first += k * w;
    w *= 1.0 - p;
  }
  return first / mass;
}

std::vector<double> truncated_weights(double p, int max_lines) {
  std::vector<double> w;
  double x = p;
  for (int k = 1; k <= max_lines; ++k) {
    w.push_back(x);
    x *= 1.0 - p;
  }
  return w;
}

}  // namespace

double truncated_geometric_p(double mean, int max_lines) {
  if (max_lines < 1) throw ConfigError("orders.max_lines must be at least 1");
  const double upper = (max_lines + 1) / 2.0;
  if (mean < 1.0 || mean > upper) {
    throw ConfigError(fmt::format("orders.mean_lines {} outside [1, {}] for max_lines {}", mean, upper, max_lines));
  }
  if (mean == 1.0) return 1.0;
  // The truncated mean decreases monotonically in p.
  double lo = 1e-12;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (truncated_mean(mid, max_lines) > mean) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

OrderGenerator::OrderGenerator(GeneratorConfig config, Rng order_rng, Rng receipt_rng)
    : config_(std::move(config)), order_rng_(order_rng), receipt_rng_(receipt_rng) {
  if (config_.rate_per_hour < 0.0 || config_.receipt_rate_per_hour < 0.0) {
    throw ConfigError("orders.rate and orders.receipt_rate must be nonnegative");
  }
  if (config_.max_quantity < 1) throw ConfigError("orders.max_quantity must be at least 1");
  if (config_.bundle_quantity < 1) throw ConfigError("orders.bundle_quantity must be at least 1");
  const bool active = config_.rate_per_hour > 0.0 || config_.receipt_rate_per_hour > 0.0;
  if (active && config_.sku_weights.empty()) throw ConfigError("orders.sku_weights is empty");
  std::vector<double> weights;
  for (const auto& [sku, w] : config_.sku_weights) {
    if (!(w >= 0.0)) throw ConfigError(fmt::format("orders.sku_weights: negative weight for {}", sku));
    weights.push_back(w);
  }
  if (!weights.empty()) sku_dist_ = std::discrete_distribution<int>(weights.begin(), weights.end());
  if (config_.rate_per_hour > 0.0) {
    const auto w = truncated_weights(truncated_geometric_p(config_.mean_lines, config_.max_lines), config_.max_lines);
    lines_dist_ = std::discrete_distribution<int>(w.begin(), w.end());
  }
}

SkuId OrderGenerator::draw_sku(Rng& rng) { return config_.sku_weights.at(sku_dist_(rng)).first; }

std::optional<FeedEvent> OrderGenerator::next_order() {
  if (config_.rate_per_hour <= 0.0) return std::nullopt;
  std::exponential_distribution<double> gap(config_.rate_per_hour / 3600.0);
  order_clock_ += gap(order_rng_);
  if (order_clock_ >= config_.cutoff_s) return std::nullopt;

  PickOrder order;
  order.id = OrderId{next_order_++};
  int distinct = 0;
  for (const auto& [_, w] : config_.sku_weights) distinct += w > 0.0 ? 1 : 0;
  const int lines = std::min(lines_dist_(order_rng_) + 1, distinct);
  std::uniform_int_distribution<int> quantity(1, config_.max_quantity);
  while (static_cast<int>(order.lines.size()) < lines) {
    SkuId sku = draw_sku(order_rng_);
    bool dup = false;
    for (const OrderLine& l : order.lines) dup = dup || l.sku == sku;
    if (dup) continue;
    order.lines.push_back(OrderLine{std::move(sku), quantity(order_rng_)});
  }
  return FeedEvent{order_clock_, std::move(order)};
}

std::optional<FeedEvent> OrderGenerator::next_receipt() {
  if (config_.receipt_rate_per_hour <= 0.0) return std::nullopt;
  std::exponential_distribution<double> gap(config_.receipt_rate_per_hour / 3600.0);
  receipt_clock_ += gap(receipt_rng_);
  if (receipt_clock_ >= config_.cutoff_s) return std::nullopt;
  ReplenishmentBundle bundle{BundleId{next_bundle_++}, draw_sku(receipt_rng_), config_.bundle_quantity};
  return FeedEvent{receipt_clock_, std::vector<ReplenishmentBundle>{std::move(bundle)}};
}

}  // namespace rmfs
