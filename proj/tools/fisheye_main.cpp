// fisheye: run scenarios, check histories, sweep seeds.
#include <iostream>

#include <CLI11.hpp>

#include "fisheye/cli.hpp"
#include "fisheye/errors.hpp"

int main(int argc, char** argv) {
  using namespace fisheye;
  CLI::App app{"Hybrid total/causal broadcast simulator and consistency checker"};
  app.require_subcommand(1);

  const std::map<std::string, ReportFormat> formats{{"text", ReportFormat::Text}, {"json", ReportFormat::Json}};

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and emit its history");
  run_cmd->add_option("scenario", run.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--graph", run.graph, "empty, complete, or edges like 0-1,2-3");
  run_cmd->add_option("--output,-o", run.output, "Write the history here instead of stdout");
  run_cmd->add_flag("--debug-checks", run.debug_checks, "Assert clock and delivery invariants while running");
  run_cmd->add_option("--report", run.report, "Summary format when --output is given")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check", "Check a history against a consistency condition");
  check_cmd->add_option("history", check.history, "History file")->required()->check(CLI::ExistingFile);
  check_cmd->add_option("--condition", check.condition, "cc, sc, fisheye or broadcast")
      ->check(CLI::IsMember({"cc", "sc", "fisheye", "broadcast"}));
  check_cmd->add_option("--graph", check.graph, "from-history, empty, complete, or edges like 0-1,2-3");
  check_cmd->add_option("--budget", check.search_budget, "Node budget of the fallback search");
  check_cmd->add_option("--report", check.report, "text or json")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  SweepArgs sweep;
  std::string seeds = "0..999";
  auto* sweep_cmd = app.add_subcommand("sweep", "Tabulate watched reads across a seed range");
  sweep_cmd->add_option("scenario", sweep.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--seeds", seeds, "Inclusive range A..B");
  sweep_cmd->add_option("--watch", sweep.watches, "Extra watched read as proc:step");
  sweep_cmd->add_option("--graph", sweep.graph, "empty, complete, or edges like 0-1,2-3");
  sweep_cmd->add_option("--jobs,-j", sweep.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--debug-checks", sweep.debug_checks, "Assert invariants in every run");
  sweep_cmd->add_option("--report", sweep.report, "text or json")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*run_cmd) return cmd_run(run, std::cout, std::cerr);
    if (*check_cmd) return cmd_check(check, std::cout, std::cerr);
    std::tie(sweep.first_seed, sweep.last_seed) = parse_seed_range(seeds);
    return cmd_sweep(sweep, std::cout, std::cerr);
  } catch (const ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitBadInput;
  }
}
