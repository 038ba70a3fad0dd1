#include <fmt/format.h>
#include <fmt/ranges.h>

#include "rmfs/core/error.hpp"
#include "rmfs/plugins/plugins.hpp"

namespace rmfs {

std::map<std::string, std::vector<std::string>> registered_policies() {
  return {
      {"roa", {"fcfs-least-loaded"}},
      {"poa", {"fcfs", "common-lines"}},
      {"rps", {"max-capacity"}},
      {"pps", {"greedy-pile-on"}},
      {"pr", {"random", "nearest", "fixed"}},
      {"ta", {"nearest"}},
      {"pp", {"interval-astar"}},
  };
}

namespace {

[[noreturn]] void unknown(const std::string& slot, const std::string& name) {
  throw ConfigError(fmt::format("plugins.{}: unknown policy '{}'; registered: {}", slot, name,
                                fmt::join(registered_policies().at(slot), ", ")));
}

}  // namespace

PluginSet make_plugins(const PluginBinding& binding, const RngStreams& streams) {
  PluginSet set;
  if (binding.roa == "fcfs-least-loaded") {
    set.roa = make_fcfs_least_loaded_roa();
  } else {
    unknown("roa", binding.roa);
  }
  if (binding.poa == "fcfs") {
    set.poa = make_fcfs_poa();
  } else if (binding.poa == "common-lines") {
    set.poa = make_common_lines_poa();
  } else {
    unknown("poa", binding.poa);
  }
  if (binding.rps == "max-capacity") {
    set.rps = make_max_capacity_rps();
  } else {
    unknown("rps", binding.rps);
  }
  if (binding.pps == "greedy-pile-on") {
    set.pps = make_greedy_pile_on_pps();
  } else {
    unknown("pps", binding.pps);
  }
  if (binding.pr == "random") {
    set.pr = make_random_pr(streams.stream("plugin.pr"));
  } else if (binding.pr == "nearest") {
    set.pr = make_nearest_pr();
  } else if (binding.pr == "fixed") {
    set.pr = make_fixed_pr();
  } else {
    unknown("pr", binding.pr);
  }
  if (binding.ta == "nearest") {
    set.ta = make_nearest_ta();
  } else {
    unknown("ta", binding.ta);
  }
  if (binding.pp == "interval-astar") {
    set.pp = make_interval_astar_pp();
  } else {
    unknown("pp", binding.pp);
  }
  if (binding.order_slots < 1) throw ConfigError("plugins.order_slots must be at least 1");
  return set;
}

}  // namespace rmfs
