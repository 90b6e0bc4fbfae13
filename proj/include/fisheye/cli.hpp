#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fisheye/io.hpp"

namespace fisheye {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,          // run quiescent / history accepted / sweep within allowed sets
  kExitRejected = 1,    // history rejected / sweep observed a value outside its allowed set
  kExitBadInput = 2,    // parse error, malformed history, bad arguments
  kExitLiveness = 3,    // a run ended with programs still blocked
  kExitInconclusive = 4,  // checker search budget exhausted
};

enum class ReportFormat { Text, Json };

struct RunArgs {
  std::filesystem::path scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> graph;
  std::optional<std::filesystem::path> output;
  bool debug_checks = false;
  ReportFormat report = ReportFormat::Text;
};

struct CheckArgs {
  std::filesystem::path history;
  std::string condition = "fisheye";  // cc, sc, fisheye, broadcast
  std::string graph = "from-history";
  ReportFormat report = ReportFormat::Text;
  std::uint64_t search_budget = 2'000'000;
};

struct SweepArgs {
  std::filesystem::path scenario;
  std::uint64_t first_seed = 0;
  std::uint64_t last_seed = 0;  // inclusive
  std::vector<std::string> watches;  // extra "proc:step" watches
  std::optional<std::string> graph;
  unsigned jobs = 1;
  bool debug_checks = false;
  ReportFormat report = ReportFormat::Text;
};

/// Observations of one watched read across a sweep.
struct WatchTally {
  WatchSpec spec;
  std::map<MaybeValue, std::uint64_t> counts;
  std::map<MaybeValue, std::uint64_t> first_seed;  // smallest seed producing each value
  bool within_allowed() const;
};

struct SweepResult {
  std::vector<WatchTally> tallies;
  std::vector<std::uint64_t> liveness_failures;  // seeds
  std::uint64_t runs = 0;
};

/// Runs every seed in [first, last] on up to `jobs` threads; aggregation is
/// ordered by seed, so the result does not depend on `jobs`.
SweepResult run_sweep(const Scenario& sc, std::uint64_t first, std::uint64_t last, unsigned jobs,
                      bool debug_checks = false);

/// "A..B" (inclusive) or a single seed.
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text);

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_check(const CheckArgs& args, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);

}  // namespace fisheye
