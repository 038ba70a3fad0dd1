#include <doctest.h>

#include <algorithm>
#include <random>

#include "rmfs/core/error.hpp"
#include "rmfs/sim/event_queue.hpp"

using namespace rmfs;

TEST_CASE("events pop in time order") {
  EventQueue q;
  q.schedule(5.0, EventKind::DecisionDue, 1);
  q.schedule(3.0, EventKind::DecisionDue, 2);
  CHECK(q.pop().subject == 2);
  CHECK(q.pop().subject == 1);
  CHECK(q.now() == 5.0);
}

TEST_CASE("equal times pop in insertion order") {
  EventQueue q;
  q.schedule(3.0, EventKind::DecisionDue, 1);
  q.schedule(3.0, EventKind::DecisionDue, 2);
  CHECK(q.pop().subject == 1);
  CHECK(q.pop().subject == 2);
}

TEST_CASE("scheduling into the past is refused") {
  EventQueue q;
  q.schedule(4.0, EventKind::DecisionDue);
  q.pop();
  CHECK_THROWS_AS(q.schedule(3.0, EventKind::DecisionDue), PreconditionError);
}

TEST_CASE("random schedules pop like a stable sort") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> coarse(0, 500);  // many ties
  EventQueue q;
  std::vector<std::pair<double, long>> oracle;
  for (int i = 0; i < 10000; ++i) {
    const double t = coarse(rng) * 0.5;
    const long seq = q.schedule(t, EventKind::DecisionDue, i);
    oracle.emplace_back(t, seq);
  }
  std::stable_sort(oracle.begin(), oracle.end(), [](auto& a, auto& b) { return a.first < b.first; });
  for (const auto& [t, seq] : oracle) {
    const Event e = q.pop();
    REQUIRE(e.time == t);
    REQUIRE(e.seq == seq);
  }
  CHECK(q.empty());
}
