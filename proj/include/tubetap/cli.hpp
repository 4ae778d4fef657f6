#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tubetap/analysis.hpp"
#include "tubetap/fixtures.hpp"
#include "tubetap/serialize.hpp"
#include "tubetap/verify.hpp"

namespace tubetap {

/// Everything the CLI subcommands need; field defaults mirror the standard
/// simulation data set (bids U[80,150], budgets U[400,600], normal bids
/// mean 110 / std 15, 50 rounds, epsilon 10).
struct RunConfig {
  std::size_t requesters = 50;
  std::size_t executers = 500;
  std::string distribution = "uniform";  // uniform | normal
  Money bid_lo = 80.0;
  Money bid_hi = 150.0;
  Money bid_mean = 110.0;
  Money bid_std = 15.0;
  Money budget_lo = 400.0;
  Money budget_hi = 600.0;
  std::size_t interest_lo = 1;
  std::size_t interest_hi = 5;
  std::size_t rounds = 50;
  Money epsilon = 10.0;
  std::size_t r = 0;        // 0 = fixture default, else 3
  std::size_t r_prime = 0;  // 0 = all available peers
  int kappa = 0;            // 0 = max degree + 1
  std::string variation = "none";
  std::string mechanism = "tubetap";  // tubetap | benchmark | both
  double noise_std = -1.0;  // < 0 = default (0.1; fixtures grade truthfully)
  std::optional<std::uint64_t> seed;  // unset = env fallback, then 42
  std::string scenario_path;          // run: load this instead of generating
  std::string fixture;                // run: bundled fixture name
  std::string output;                 // empty = stdout
  std::string export_graph;           // run: write the round-0 edge list here
};

inline std::optional<std::uint64_t> env_seed() {
  if (const char* env = std::getenv("BUDGET_AUCTION_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InvalidConfig("BUDGET_AUCTION_SEED is not an integer");
    }
  }
  return std::nullopt;
}

inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                                  std::optional<std::uint64_t> fallback = {}) {
  if (flag) return *flag;
  if (const auto env = env_seed()) return *env;
  return fallback.value_or(42);
}

inline DistributionSpec distribution_from(const RunConfig& config) {
  DistributionSpec dist;
  if (config.distribution == "uniform") {
    dist.kind = DistributionSpec::Kind::uniform;
  } else if (config.distribution == "normal") {
    dist.kind = DistributionSpec::Kind::normal;
  } else {
    throw InvalidConfig("distribution must be 'uniform' or 'normal'");
  }
  dist.uniform_lo = config.bid_lo;
  dist.uniform_hi = config.bid_hi;
  dist.normal_mean = config.bid_mean;
  dist.normal_std = config.bid_std;
  dist.budget_lo = config.budget_lo;
  dist.budget_hi = config.budget_hi;
  return dist;
}

inline ScenarioGenConfig gen_config_from(const RunConfig& config) {
  ScenarioGenConfig gen;
  gen.requesters = config.requesters;
  gen.executers = config.executers;
  gen.distribution = distribution_from(config);
  gen.interest_lo = config.interest_lo;
  gen.interest_hi = config.interest_hi;
  return gen;
}

inline Variation variation_from(const std::string& name) {
  if (name == "none") return Variation::none;
  if (name == "small") return Variation::small;
  if (name == "medium") return Variation::medium;
  if (name == "large") return Variation::large;
  throw InvalidConfig("variation must be none, small, medium, or large");
}

inline std::vector<MechanismKind> mechanisms_from(const std::string& name) {
  if (name == "tubetap") return {MechanismKind::tubetap};
  if (name == "benchmark") return {MechanismKind::benchmark};
  if (name == "both")
    return {MechanismKind::tubetap, MechanismKind::benchmark};
  throw InvalidConfig("mechanism must be tubetap, benchmark, or both");
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
}

// ---------------------------------------------------------------- generate

inline int cmd_generate(const RunConfig& config, std::ostream& out,
                        std::ostream& err) {
  const std::uint64_t seed = resolve_seed(config.seed);
  const Scenario scenario =
      generate_scenario(config.requesters, config.executers,
                        distribution_from(config), config.interest_lo,
                        std::min(config.interest_hi, config.requesters), seed);
  for (const std::string& warning : scenario_warnings(scenario))
    err << "warning: " << warning << "\n";

  std::ostringstream doc;
  save_scenario(scenario, doc);
  if (config.output.empty()) {
    out << doc.str();
  } else {
    write_text_file(config.output, doc.str());
    err << "wrote " << config.output << "\n";
  }
  err << "seed: " << seed << "\n";
  return 0;
}

// --------------------------------------------------------------------- run

struct RunArtifacts {
  std::string csv;
  std::string summary_json;
  std::string edge_list;  // round-0 conflict graph, when requested
};

inline double round_to(double v, double scale) {
  return std::round(v * scale) / scale;
}

inline RunArtifacts execute_run(const RunConfig& config) {
  if (config.rounds < 1) throw InvalidConfig("rounds must be >= 1");

  std::optional<fixtures::Fixture> fixture;
  std::optional<Scenario> fixed_scenario;
  if (!config.fixture.empty()) {
    fixture = fixtures::get_fixture(config.fixture);
    fixed_scenario = fixture->scenario;
  } else if (!config.scenario_path.empty()) {
    fixed_scenario = load_scenario_file(config.scenario_path);
  }

  const std::uint64_t seed = resolve_seed(
      config.seed, fixture ? std::optional<std::uint64_t>(fixture->seed)
                           : std::nullopt);

  PipelineParams params =
      fixture ? fixture->params : PipelineParams{};
  if (!fixture) params.model = GraderModel::noisy(0.1);
  if (config.r > 0) params.r = config.r;
  if (config.r_prime > 0) params.r_prime = config.r_prime;
  if (config.noise_std >= 0.0) {
    params.model = config.noise_std == 0.0
                       ? GraderModel::truthful()
                       : GraderModel::noisy(config.noise_std);
  }
  params.epsilon = config.epsilon;

  const Variation variation = variation_from(config.variation);
  const auto [fraction, inflation] = variation_params(variation);
  const std::vector<MechanismKind> mechanisms =
      mechanisms_from(config.mechanism);

  std::string edge_list;
  const auto capture_edge_list = [&](const ConflictGraph& graph, int kappa) {
    if (config.export_graph.empty()) return;
    std::ostringstream os;
    write_edge_list(graph, kappa, os);
    edge_list = os.str();
  };

  // fixed scenarios keep one graph and slot assignment across rounds
  std::optional<SlotAssignment> fixed_slots;
  if (fixed_scenario) {
    const ConflictGraph graph = build_conflict_graph(*fixed_scenario);
    fixed_slots = allocate_time_slots(
        graph, config.kappa > 0 ? config.kappa : default_kappa(graph));
    capture_edge_list(graph, fixed_slots->kappa);
  }

  struct Aggregate {
    std::vector<double> utilization;
    std::vector<double> utility;
    double winners = 0;
    std::size_t warnings = 0;
  };
  std::map<std::string, Aggregate> aggregates;

  std::ostringstream csv;
  csv << "round,mechanism,task,slot,winners,payment_total,budget,"
         "utilization\n";
  for (std::size_t round = 0; round < config.rounds; ++round) {
    Scenario scenario;
    SlotAssignment slots;
    if (fixed_scenario) {
      scenario = *fixed_scenario;
      slots = *fixed_slots;
    } else {
      scenario = gen_config_from(config).make(
          derive_seed(seed, 0x53434e, round));
      const ConflictGraph graph = build_conflict_graph(scenario);
      slots = allocate_time_slots(
          graph, config.kappa > 0 ? config.kappa : default_kappa(graph));
      if (round == 0) capture_edge_list(graph, slots.kappa);
    }
    const BidProfile bids =
        variation == Variation::none
            ? scenario.truthful_bids
            : apply_mass_inflation(scenario, fraction, inflation,
                                   derive_seed(seed, 0x494e46, round));

    for (MechanismKind kind : mechanisms) {
      PipelineParams round_params = params;
      round_params.mechanism = kind;
      const MechanismOutcome outcome = run_main_routine(
          scenario, bids, slots, round_params, round_seed(seed, round));
      const Metrics metrics = compute_metrics(outcome, scenario);

      for (const Task& task : scenario.tasks) {
        const TaskOutcome& result = outcome.per_task.at(task.id);
        csv << round << "," << mechanism_name(kind) << "," << task.id << ","
            << slots.slot_of.at(task.id) << "," << result.winner_count_k
            << "," << format_money(result.payment_total()) << ","
            << format_money(task.budget) << ","
            << format_ratio(metrics.per_task_utilization.at(task.id)) << "\n";
      }

      Aggregate& agg = aggregates[mechanism_name(kind)];
      agg.utilization.push_back(metrics.aggregate_utilization);
      agg.utility.push_back(metrics.total_device_utility);
      for (const auto& [task, count] : metrics.winner_counts)
        agg.winners += static_cast<double>(count);
      agg.warnings += outcome.warnings.size();
    }
  }

  nlohmann::ordered_json summary;
  summary["seed"] = seed;
  summary["rounds"] = config.rounds;
  summary["variation"] = variation_name(variation);
  if (fixture) {
    summary["source"] = "fixture:" + fixture->name;
  } else if (!config.scenario_path.empty()) {
    summary["source"] = "file:" + config.scenario_path;
  } else {
    summary["source"] = "generated";
    summary["requesters"] = config.requesters;
    summary["executers"] = config.executers;
    summary["distribution"] = config.distribution;
  }
  summary["mechanisms"] = nlohmann::ordered_json::object();
  for (const auto& [name, agg] : aggregates) {
    const auto n = static_cast<double>(agg.utilization.size());
    double mean_util = 0;
    double mean_utility = 0;
    for (double u : agg.utilization) mean_util += u / n;
    for (double u : agg.utility) mean_utility += u / n;
    summary["mechanisms"][name] = {
        {"mean_utilization", round_to(mean_util, 1e4)},
        {"std_utilization",
         round_to(detail::sample_std(agg.utilization, mean_util), 1e4)},
        {"mean_total_device_utility", round_to(mean_utility, 1e2)},
        {"std_total_device_utility",
         round_to(detail::sample_std(agg.utility, mean_utility), 1e2)},
        {"mean_winners_per_round", round_to(agg.winners / n, 1e4)},
        {"warnings", agg.warnings}};
  }

  RunArtifacts artifacts;
  artifacts.csv = csv.str();
  artifacts.summary_json = summary.dump(2) + "\n";
  artifacts.edge_list = std::move(edge_list);
  return artifacts;
}

inline std::string summary_path_for(const std::string& csv_path) {
  const std::string suffix = ".csv";
  if (csv_path.size() > suffix.size() &&
      csv_path.compare(csv_path.size() - suffix.size(), suffix.size(),
                       suffix) == 0) {
    return csv_path.substr(0, csv_path.size() - suffix.size()) +
           ".summary.json";
  }
  return csv_path + ".summary.json";
}

inline int cmd_run(const RunConfig& config, std::ostream& out,
                   std::ostream& err) {
  try {
    const RunArtifacts artifacts = execute_run(config);
    if (config.output.empty()) {
      out << artifacts.csv << artifacts.summary_json;
    } else {
      write_text_file(config.output, artifacts.csv);
      write_text_file(summary_path_for(config.output),
                      artifacts.summary_json);
      err << "wrote " << config.output << " and "
          << summary_path_for(config.output) << "\n";
    }
    if (!config.export_graph.empty()) {
      write_text_file(config.export_graph, artifacts.edge_list);
      err << "wrote " << config.export_graph << "\n";
    }
    return 0;
  } catch (const GraphNotReducible& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

// ------------------------------------------------------------------- sweep

struct SweepConfig {
  std::vector<std::pair<std::size_t, std::size_t>> configs;  // empty = table
  std::string distribution = "both";  // uniform | normal | both
  std::size_t rounds = 50;
  Money epsilon = 10.0;
  std::size_t r = 3;
  std::size_t r_prime = 0;
  double noise_std = 0.1;
  std::size_t interest_lo = 1;
  std::size_t interest_hi = 5;
  std::optional<std::uint64_t> seed;
  std::string output_dir = "sweep-results";
};

inline std::vector<std::pair<std::size_t, std::size_t>> default_sweep_table() {
  return {{50, 500},   {100, 1000}, {150, 1500},
          {200, 2000}, {250, 2500}, {300, 3000}};
}

struct SweepArtifacts {
  std::string utilization_csv;
  std::string utility_csv;
};

inline SweepArtifacts execute_sweep(const SweepConfig& config) {
  const std::uint64_t seed = resolve_seed(config.seed);
  const auto table =
      config.configs.empty() ? default_sweep_table() : config.configs;

  std::vector<DistributionSpec::Kind> dists;
  if (config.distribution == "uniform" || config.distribution == "both")
    dists.push_back(DistributionSpec::Kind::uniform);
  if (config.distribution == "normal" || config.distribution == "both")
    dists.push_back(DistributionSpec::Kind::normal);
  if (dists.empty())
    throw InvalidConfig("distribution must be uniform, normal, or both");

  struct Variant {
    const char* label;
    MechanismKind mechanism;
    Variation variation;
  };
  const Variant variants[] = {
      {"tubetap", MechanismKind::tubetap, Variation::none},
      {"bm", MechanismKind::benchmark, Variation::none},
      {"bm-s-var", MechanismKind::benchmark, Variation::small},
      {"bm-m-var", MechanismKind::benchmark, Variation::medium},
      {"bm-l-var", MechanismKind::benchmark, Variation::large}};

  std::ostringstream util_csv;
  std::ostringstream utility_csv;
  util_csv << "requesters,executers,distribution,mechanism,mean,std\n";
  utility_csv << "requesters,executers,distribution,mechanism,mean,std\n";

  for (std::size_t c = 0; c < table.size(); ++c) {
    for (std::size_t d = 0; d < dists.size(); ++d) {
      ScenarioGenConfig gen;
      gen.requesters = table[c].first;
      gen.executers = table[c].second;
      gen.distribution.kind = dists[d];
      gen.interest_lo = config.interest_lo;
      gen.interest_hi = config.interest_hi;

      const char* dist_name =
          dists[d] == DistributionSpec::Kind::uniform ? "uniform" : "normal";
      // one base seed per cell; variants run paired on it
      const std::uint64_t cell_seed =
          derive_seed(seed, 0x535750, c * 2 + (dist_name[0] == 'n'));

      for (const Variant& variant : variants) {
        ExperimentConfig experiment;
        experiment.gen = gen;
        experiment.pipeline.mechanism = variant.mechanism;
        experiment.pipeline.epsilon = config.epsilon;
        experiment.pipeline.r = config.r;
        if (config.r_prime > 0) experiment.pipeline.r_prime = config.r_prime;
        experiment.pipeline.model = config.noise_std == 0.0
                                        ? GraderModel::truthful()
                                        : GraderModel::noisy(config.noise_std);
        const AveragedMetrics avg = manipulation_experiment(
            experiment, variant.variation, config.rounds, cell_seed);

        util_csv << table[c].first << "," << table[c].second << ","
                 << dist_name << "," << variant.label << ","
                 << format_ratio(avg.mean_utilization) << ","
                 << format_ratio(avg.std_utilization) << "\n";
        utility_csv << table[c].first << "," << table[c].second << ","
                    << dist_name << "," << variant.label << ","
                    << format_money(avg.mean_total_utility) << ","
                    << format_money(avg.std_total_utility) << "\n";
      }
    }
  }

  SweepArtifacts artifacts;
  artifacts.utilization_csv = util_csv.str();
  artifacts.utility_csv = utility_csv.str();
  return artifacts;
}

inline int cmd_sweep(const SweepConfig& config, std::ostream& err) {
  const SweepArtifacts artifacts = execute_sweep(config);
  std::filesystem::create_directories(config.output_dir);
  const auto util_path =
      (std::filesystem::path(config.output_dir) / "budget_utilization.csv")
          .string();
  const auto utility_path =
      (std::filesystem::path(config.output_dir) / "device_utility.csv")
          .string();
  write_text_file(util_path, artifacts.utilization_csv);
  write_text_file(utility_path, artifacts.utility_csv);
  err << "wrote " << util_path << " and " << utility_path << "\n";
  return 0;
}

// ------------------------------------------------------------------ verify

struct VerifyConfig {
  std::string suite;  // truthfulness | budget | approx | coloring | lemmas
  std::string mechanism = "tubetap";
  std::size_t instances = 0;  // 0 = suite default
  std::size_t deviations = 50;
  std::size_t trials = 100000;
  std::optional<std::uint64_t> seed;
};

inline int cmd_verify(const VerifyConfig& config, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(config.seed);
  bool all_pass = true;
  const auto line = [&](bool ok, const std::string& text) {
    out << (ok ? "PASS" : "FAIL") << "  " << text << "\n";
    if (!ok) all_pass = false;
  };

  if (config.suite == "truthfulness") {
    const std::size_t instances =
        config.instances > 0 ? config.instances : 1000;
    const bool against_benchmark = config.mechanism == "benchmark";
    const MechanismKind kind = against_benchmark ? MechanismKind::benchmark
                                                 : MechanismKind::tubetap;
    const DeviationReport report = truthfulness_search(
        verify_market_config(), kind, instances, config.deviations, seed);
    std::ostringstream detail;
    detail << mechanism_name(kind) << ": " << report.deviations_tested
           << " deviations over " << report.instances_tested << " instances, "
           << report.profitable_found.size() << " profitable";
    if (against_benchmark) {
      const Money witness_gain = benchmark_counterexample_gain();
      detail << "; stored counterexample gain " << format_money(witness_gain);
      line(!report.profitable_found.empty() || witness_gain > 0,
           "manipulable as expected: " + detail.str());
      for (std::size_t i = 0;
           i < std::min<std::size_t>(3, report.profitable_found.size()); ++i) {
        const Deviation& dev = report.profitable_found[i];
        out << "      device " << dev.device << " on task " << dev.task
            << ": bid " << format_money(dev.original_bid) << " -> "
            << format_money(dev.deviated_bid) << " gains "
            << format_money(dev.utility_gain) << " (instance seed "
            << dev.instance_seed << ")\n";
      }
    } else {
      line(report.profitable_found.empty(),
           "no profitable deviation: " + detail.str());
      for (const Deviation& dev : report.profitable_found) {
        out << "      COUNTEREXAMPLE device " << dev.device << " task "
            << dev.task << ": " << format_money(dev.original_bid) << " -> "
            << format_money(dev.deviated_bid) << " gains "
            << format_money(dev.utility_gain) << " (instance seed "
            << dev.instance_seed << ")\n";
      }
    }
  } else if (config.suite == "budget") {
    const std::size_t instances =
        config.instances > 0 ? config.instances : 10000;
    const RandomInstanceAudit audit = audit_random_instances(instances, seed);
    line(audit.budget_violations == 0,
         "per-task payments within budget on " +
             std::to_string(audit.tasks_checked) + " tasks across " +
             std::to_string(audit.instances) + " instances (" +
             std::to_string(audit.budget_violations) + " violations)");
    line(audit.global_budget_violations == 0,
         "total payments within total budget on every instance");
    line(audit.ir_ok(),
         "individual rationality: every winner paid at least its bid, no "
         "negative utilities (" +
             std::to_string(audit.ir_violations + audit.negative_utility_devices) +
             " violations)");
  } else if (config.suite == "approx") {
    const std::size_t instances =
        config.instances > 0 ? config.instances : 10000;
    const RandomInstanceAudit audit = audit_random_instances(instances, seed);
    {
      std::ostringstream detail;
      detail << "random instances: optimum within 2x of mechanism winner "
                "count on "
             << audit.tasks_checked << " tasks (max ratio "
             << format_ratio(audit.max_opt_ratio) << ")";
      line(audit.approx_violations == 0, detail.str());
    }
    const ExhaustiveApproxResult exhaustive = exhaustive_two_approximation();
    {
      std::ostringstream detail;
      detail << "exhaustive small bid lists: " << exhaustive.cases
             << " cases, " << exhaustive.violations << " violations (max ratio "
             << format_ratio(exhaustive.max_opt_ratio) << ")";
      line(exhaustive.violations == 0, detail.str());
    }
  } else if (config.suite == "coloring") {
    const std::size_t graphs = config.instances > 0 ? config.instances : 1000;
    const ColoringAudit audit = audit_random_colorings(graphs, seed);
    line(audit.failures == 0,
         "slot allocation proper and within kappa on " +
             std::to_string(audit.graphs) + " random graphs (" +
             std::to_string(audit.failures) + " failures)");
  } else if (config.suite == "lemmas") {
    for (const WinStatsCheck& check : check_win_stats_grid(config.trials, seed)) {
      std::ostringstream detail;
      detail << "p=" << check.stats.p << " k=" << check.stats.k_i
             << ": mean wins " << format_ratio(check.stats.mean_wins)
             << " (expect " << format_ratio(check.expected_mean)
             << " ± " << format_ratio(check.mean_band) << "), P[>=1 win] "
             << format_ratio(check.stats.p_at_least_one) << " >= "
             << format_ratio(check.lower_bound - check.p_band);
      line(check.mean_ok && check.bound_ok && check.exact_ok, detail.str());
    }
    const RejectionGrowthCheck growth = check_rejection_growth(seed);
    std::ostringstream detail;
    detail << "longest rejection streak grows sublinearly in k:";
    for (double s : growth.streaks) detail << " " << format_ratio(s);
    line(growth.sublinear, detail.str());
  } else {
    throw InvalidConfig(
        "unknown suite '" + config.suite +
        "'; available: truthfulness budget approx coloring lemmas");
  }
  return all_pass ? 0 : 1;
}

}  // namespace tubetap
