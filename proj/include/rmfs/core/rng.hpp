#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rmfs {

using Rng = std::mt19937_64;

// One seed per run; every subsystem draws from its own stream derived from
// the run seed and a fixed label, so adding draws in one subsystem never
// shifts another.
class RngStreams {
 public:
  explicit RngStreams(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  Rng stream(std::string_view label) const;

 private:
  std::uint64_t seed_;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace rmfs
