#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fisheye/history.hpp"
#include "fisheye/net_sim.hpp"

namespace fisheye {

/// A read to tabulate across seeds, named by program position.
struct WatchSpec {
  ProcessId pid{};
  std::size_t step{0};
  std::string name;
  std::optional<std::set<MaybeValue>> allowed;  // no containment check when absent
};

struct Scenario {
  SimConfig config;
  std::vector<WatchSpec> watches;
};

/// Line-oriented scenario text:
///
///   # fisheye-scenario v1
///   n 3
///   names paris berlin new-york
///   graph empty | graph complete | edge <proc> <proc>   (edges accumulate)
///   delay <min> <max>
///   channel <from> <to> <min> <max>
///   seed <u64>
///   program <proc>
///     write <reg> <int> | read <reg> [bind] | repeat <reg> <int> | nop [ticks] | bcast <text>
///   end
///   watch <proc> <step> <name> [allow <int|_>...]
///
/// <proc> is a declared name, a bare index, or p<index>. Throws ParseError.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);

/// Versioned text form of a History; parse_history(emit_history(h)) == h.
std::string emit_history(const History& h);
History parse_history(std::istream& in);
History load_history(const std::filesystem::path& path);

/// "empty", "complete", or comma-separated edges "a-b" where a and b are
/// indices, p<index>, or process names. Throws ParseError (line 0).
ProximityGraph parse_graph_spec(const std::string& spec, std::size_t n, const std::vector<std::string>& names = {});

std::string value_to_text(const MaybeValue& v);

}  // namespace fisheye
