// Command line front end: generate markets, run mechanisms, sweep the
// experiment grid, and verify the mechanism properties.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tubetap/cli.hpp"

namespace {

std::pair<std::size_t, std::size_t> parse_config_cell(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos)
    throw tubetap::InvalidConfig("sweep config must look like 50x500: " + s);
  try {
    return {std::stoull(s.substr(0, x)), std::stoull(s.substr(x + 1))};
  } catch (const std::exception&) {
    throw tubetap::InvalidConfig("sweep config must look like 50x500: " + s);
  }
}

void add_market_options(CLI::App* cmd, tubetap::RunConfig& config) {
  cmd->add_option("--requesters", config.requesters,
                  "Number of task requesters (tasks)")
      ->capture_default_str();
  cmd->add_option("--executers", config.executers, "Number of IoT devices")
      ->capture_default_str();
  cmd->add_option("--distribution", config.distribution,
                  "Bid distribution: uniform | normal")
      ->capture_default_str();
  cmd->add_option("--bid-lo", config.bid_lo, "Uniform bid lower bound")
      ->capture_default_str();
  cmd->add_option("--bid-hi", config.bid_hi, "Uniform bid upper bound")
      ->capture_default_str();
  cmd->add_option("--bid-mean", config.bid_mean, "Normal bid mean")
      ->capture_default_str();
  cmd->add_option("--bid-std", config.bid_std, "Normal bid std deviation")
      ->capture_default_str();
  cmd->add_option("--budget-lo", config.budget_lo, "Budget lower bound")
      ->capture_default_str();
  cmd->add_option("--budget-hi", config.budget_hi, "Budget upper bound")
      ->capture_default_str();
  cmd->add_option("--interest-lo", config.interest_lo,
                  "Smallest interest set size")
      ->capture_default_str();
  cmd->add_option("--interest-hi", config.interest_hi,
                  "Largest interest set size")
      ->capture_default_str();
  cmd->add_option("--seed", config.seed,
                  "Master seed (falls back to BUDGET_AUCTION_SEED, then 42)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "tubetap: budget-feasible task assignment simulator "
      "(proportional-share mechanism, peer grading, time slot coloring)"};
  app.require_subcommand(1);
  int exit_code = 0;

  tubetap::RunConfig generate_config;
  CLI::App* generate =
      app.add_subcommand("generate", "Generate a market scenario as JSON");
  add_market_options(generate, generate_config);
  generate->add_option("-o,--output", generate_config.output,
                       "Output path (default: stdout)");
  generate->callback([&] {
    exit_code = tubetap::cmd_generate(generate_config, std::cout, std::cerr);
  });

  tubetap::RunConfig run_config;
  CLI::App* run = app.add_subcommand(
      "run", "Run the full pipeline and write per-task results");
  add_market_options(run, run_config);
  run->add_option("--scenario", run_config.scenario_path,
                  "Run on a scenario JSON file instead of generating");
  run->add_option("--fixture", run_config.fixture,
                  "Run on a bundled fixture: example1 example2 example3 "
                  "fig5 bm-counterexample");
  run->add_option("--rounds", run_config.rounds, "Number of rounds")
      ->capture_default_str();
  run->add_option("--mechanism", run_config.mechanism,
                  "tubetap | benchmark | both")
      ->capture_default_str();
  run->add_option("--variation", run_config.variation,
                  "Mass bid inflation: none | small | medium | large")
      ->capture_default_str();
  run->add_option("--epsilon", run_config.epsilon,
                  "Benchmark payment increment")
      ->capture_default_str();
  run->add_option("--r", run_config.r, "Peer grading batch size (0 = default 3)");
  run->add_option("--r-prime", run_config.r_prime,
                  "Graders per batch (0 = every available peer)");
  run->add_option("--kappa", run_config.kappa,
                  "Number of time slots (0 = max degree + 1)");
  run->add_option("--noise-std", run_config.noise_std,
                  "Grader noise std (0 = truthful graders; default 0.1)");
  run->add_option("-o,--output", run_config.output,
                  "CSV output path; the aggregate summary lands next to it "
                  "(default: both to stdout)");
  run->add_option("--export-graph", run_config.export_graph,
                  "Also write the conflict graph as an edge list");
  run->callback([&] {
    exit_code = tubetap::cmd_run(run_config, std::cout, std::cerr);
  });

  tubetap::SweepConfig sweep_config;
  std::vector<std::string> sweep_cells;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run the whole experiment grid and write figure-ready CSVs");
  sweep->add_option("--configs", sweep_cells,
                    "Market sizes as NxM (default: the six-point table "
                    "50x500 .. 300x3000)")
      ->delimiter(',');
  sweep->add_option("--distribution", sweep_config.distribution,
                    "uniform | normal | both")
      ->capture_default_str();
  sweep->add_option("--rounds", sweep_config.rounds, "Rounds per cell")
      ->capture_default_str();
  sweep->add_option("--epsilon", sweep_config.epsilon,
                    "Benchmark payment increment")
      ->capture_default_str();
  sweep->add_option("--r", sweep_config.r, "Peer grading batch size")
      ->capture_default_str();
  sweep->add_option("--r-prime", sweep_config.r_prime,
                    "Graders per batch (0 = every available peer)");
  sweep->add_option("--noise-std", sweep_config.noise_std,
                    "Grader noise std (0 = truthful graders)")
      ->capture_default_str();
  sweep->add_option("--seed", sweep_config.seed, "Master seed");
  sweep->add_option("-o,--output-dir", sweep_config.output_dir,
                    "Directory for the result CSVs")
      ->capture_default_str();
  sweep->callback([&] {
    for (const std::string& cell : sweep_cells)
      sweep_config.configs.push_back(parse_config_cell(cell));
    exit_code = tubetap::cmd_sweep(sweep_config, std::cerr);
  });

  tubetap::VerifyConfig verify_config;
  CLI::App* verify = app.add_subcommand(
      "verify", "Check mechanism properties; exits non-zero on violation");
  verify
      ->add_option("suite", verify_config.suite,
                   "truthfulness | budget | approx | coloring | lemmas")
      ->required();
  verify->add_option("--mechanism", verify_config.mechanism,
                     "For the truthfulness suite: tubetap | benchmark "
                     "(benchmark passes by FINDING a profitable deviation)")
      ->capture_default_str();
  verify->add_option("--instances", verify_config.instances,
                     "Instances / graphs to test (0 = suite default)");
  verify->add_option("--deviations", verify_config.deviations,
                     "Deviations per instance")
      ->capture_default_str();
  verify->add_option("--trials", verify_config.trials,
                     "Monte Carlo trials for the lemmas suite")
      ->capture_default_str();
  verify->add_option("--seed", verify_config.seed, "Master seed");
  verify->callback([&] {
    exit_code = tubetap::cmd_verify(verify_config, std::cout);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
