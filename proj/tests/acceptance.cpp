// Acceptance suite: one line per criterion, non-zero exit if any fails.
//
// Covers the golden walkthrough outcomes, the mechanism properties at full
// scale (budget feasibility, truthfulness, 2-approximation, individual
// rationality, coloring validity), the Bernoulli win statistics, the
// directional comparison against the benchmark mechanism, and byte-level
// determinism of the CLI outputs.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tubetap/tubetap.hpp"

using namespace tubetap;
using fixtures::E;
using fixtures::T;

namespace {

constexpr std::uint64_t kSeed = 42;

struct Harness {
  int failures = 0;

  void report(int id, bool pass, double seconds, const std::string& title,
              const std::string& detail) {
    std::printf("[%2d] %s  (%6.2fs)  %s: %s\n", id, pass ? "PASS" : "FAIL",
                seconds, title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

MechanismOutcome run_fixture_pipeline(const fixtures::Fixture& fixture) {
  const ConflictGraph graph = build_conflict_graph(fixture.scenario);
  const SlotAssignment slots = allocate_time_slots(graph, 4);
  return run_main_routine(fixture.scenario, fixture.scenario.truthful_bids,
                          slots, fixture.params,
                          round_seed(fixture.seed, 0));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int main() {
  Harness harness;

  // ---- 1: golden allocation, payment 25 each, utilization 1.0
  {
    const auto start = std::chrono::steady_clock::now();
    QualitySet quality;
    quality.task = T(1);
    quality.members = {E(3), E(4), E(6)};
    quality.member_bids = {20, 10, 30};
    const AllocationResult alloc = tubetap_allocate(quality, 50.0);
    const Money pay = tubetap_payments(alloc.k, 50.0, alloc.first_losing_bid);

    const auto fixture = fixtures::get_fixture("example3");
    const MechanismOutcome outcome = run_fixture_pipeline(fixture);
    const TaskOutcome& t1 = outcome.per_task.at(T(1));
    const Metrics metrics = compute_metrics(outcome, fixture.scenario);

    const bool pass = alloc.winners == std::vector<DeviceId>{E(4), E(3)} &&
                      alloc.k == 2 && pay == 25.0 &&
                      t1.winners == std::vector<DeviceId>{E(4), E(3)} &&
                      t1.payments.at(E(4)) == 25.0 &&
                      t1.payments.at(E(3)) == 25.0 &&
                      metrics.per_task_utilization.at(T(1)) == 1.0;
    const double elapsed = seconds_since(start);
    std::ostringstream detail;
    detail << "winners {E4,E3}, payment " << format_money(pay)
           << " each, utilization "
           << format_ratio(metrics.per_task_utilization.at(T(1)));
    harness.report(1, pass && elapsed < 1.0, elapsed,
                   "golden allocation and payment", detail.str());
  }

  // ---- 2: lowered losing bid caps the payment at 21
  {
    const auto start = std::chrono::steady_clock::now();
    const Money direct = tubetap_payments(2, 50.0, 21.0);
    const auto fixture = fixtures::get_fixture("fig5");
    const TaskOutcome& t1 = run_fixture_pipeline(fixture).per_task.at(T(1));
    const bool pass = direct == 21.0 && t1.payments.at(E(4)) == 21.0 &&
                      t1.payments.at(E(3)) == 21.0;
    harness.report(2, pass, seconds_since(start),
                   "losing-bid-capped payment",
                   "payment " + format_money(direct) + " each");
  }

  // ---- 3: conflict graph and 4-slot assignment of the walkthrough market
  {
    const auto start = std::chrono::steady_clock::now();
    const auto fixture = fixtures::get_fixture("example1");
    const ConflictGraph graph = build_conflict_graph(fixture.scenario);
    bool edges_ok = true;
    for (int a = 1; a <= 5; ++a)
      for (int b = a + 1; b <= 5; ++b)
        if (graph.has_edge(T(a), T(b)) == (a == 1 && b == 3))
          edges_ok = false;
    const SlotAssignment slots = allocate_time_slots(graph, 4);
    int max_slot = 0;
    for (const auto& [task, slot] : slots.slot_of)
      max_slot = std::max(max_slot, slot);
    const bool pass = edges_ok && verify_assignment(graph, slots) &&
                      slots.slot_of.at(T(1)) == slots.slot_of.at(T(3)) &&
                      max_slot <= 4;
    std::ostringstream detail;
    detail << "T1-T3 only non-edge, proper assignment in " << max_slot
           << " slots, T1 and T3 share slot "
           << slots.slot_of.at(T(1));
    harness.report(3, pass, seconds_since(start), "time slot allocation",
                   detail.str());
  }

  // ---- 4: peer grading selects E3, E4, E6
  {
    const auto start = std::chrono::steady_clock::now();
    const auto fixture = fixtures::get_fixture("example2");
    std::map<DeviceId, double> qualities;
    for (const Device& d : fixture.scenario.devices)
      qualities[d.id] = d.latent_quality;
    const QualitySet quality = quality_determination(
        T(1), interest_set(fixture.scenario, T(1)),
        fixture.scenario.truthful_bids, qualities, 3, 6,
        GraderModel::truthful(), derive_seed(round_seed(fixture.seed, 0), T(1)));
    auto members = quality.members;
    std::sort(members.begin(), members.end());
    const bool pass = members == std::vector<DeviceId>{E(3), E(4), E(6)};
    std::ostringstream detail;
    detail << "quality set {";
    for (std::size_t i = 0; i < members.size(); ++i)
      detail << (i ? "," : "") << "E" << members[i] + 1;
    detail << "}";
    harness.report(4, pass, seconds_since(start), "peer grading quality set",
                   detail.str());
  }

  // ---- 5/7/8: one audit over 10,000 random end-to-end instances
  RandomInstanceAudit audit;
  double audit_seconds = 0.0;
  {
    const auto start = std::chrono::steady_clock::now();
    audit = audit_random_instances(10000, kSeed);
    audit_seconds = seconds_since(start);
    std::ostringstream detail;
    detail << audit.tasks_checked << " tasks over " << audit.instances
           << " instances, " << audit.budget_violations
           << " per-task violations, " << audit.global_budget_violations
           << " global violations";
    harness.report(5, audit.budget_ok() && audit_seconds < 30.0,
                   audit_seconds, "budget feasibility", detail.str());
  }

  // ---- 6: truthfulness search, and the benchmark must be manipulable
  {
    const auto start = std::chrono::steady_clock::now();
    const ScenarioGenConfig gen = verify_market_config();
    const DeviationReport honest =
        truthfulness_search(gen, MechanismKind::tubetap, 1000, 50, kSeed);
    const DeviationReport exploitable =
        truthfulness_search(gen, MechanismKind::benchmark, 1000, 50, kSeed);
    const Money witness = benchmark_counterexample_gain();
    const double elapsed = seconds_since(start);
    const bool pass = honest.profitable_found.empty() &&
                      (!exploitable.profitable_found.empty() || witness > 0) &&
                      witness == 10.0 && elapsed < 120.0;
    std::ostringstream detail;
    detail << "proportional share: 0 of " << honest.deviations_tested
           << " deviations profitable; benchmark: "
           << exploitable.profitable_found.size()
           << " profitable found, stored witness gain "
           << format_money(witness);
    harness.report(6, pass, elapsed, "truthfulness", detail.str());
  }

  // ---- 7: 2-approximation (random part shares the criterion-5 audit)
  {
    const auto start = std::chrono::steady_clock::now();
    const ExhaustiveApproxResult exhaustive = exhaustive_two_approximation();
    std::ostringstream detail;
    detail << "random max ratio " << format_ratio(audit.max_opt_ratio)
           << " over " << audit.tasks_checked << " tasks; exhaustive "
           << exhaustive.cases << " cases, " << exhaustive.violations
           << " violations (max ratio "
           << format_ratio(exhaustive.max_opt_ratio) << ")";
    harness.report(7, audit.approx_ok() && exhaustive.violations == 0,
                   audit_seconds + seconds_since(start), "2-approximation",
                   detail.str());
  }

  // ---- 8: individual rationality under truthful bids
  {
    std::ostringstream detail;
    detail << audit.ir_violations << " underpaid winners, "
           << audit.negative_utility_devices
           << " negative-utility devices across " << audit.instances
           << " truthful runs";
    harness.report(8, audit.ir_ok(), audit_seconds, "individual rationality",
                   detail.str());
  }

  // ---- 9: coloring validity on 1000 random graphs
  {
    const auto start = std::chrono::steady_clock::now();
    const ColoringAudit coloring = audit_random_colorings(1000, kSeed);
    std::ostringstream detail;
    detail << coloring.graphs << " graphs with kappa = maxdeg + 1, "
           << coloring.failures << " failures";
    harness.report(9, coloring.failures == 0, seconds_since(start),
                   "coloring validity", detail.str());
  }

  // ---- 10: Bernoulli win statistics against the closed forms
  {
    const auto start = std::chrono::steady_clock::now();
    bool pass = true;
    double worst_mean_gap = 0.0;
    for (const WinStatsCheck& check : check_win_stats_grid(100000, kSeed)) {
      if (!check.mean_ok || !check.bound_ok) pass = false;
      worst_mean_gap =
          std::max(worst_mean_gap, std::abs(check.stats.mean_wins -
                                            check.expected_mean) /
                                       check.mean_band);
    }
    std::ostringstream detail;
    detail << "9 cells (p in {0.25,0.5,0.693} x k in {5,10,20}), 1e5 trials, "
              "worst mean gap "
           << format_ratio(worst_mean_gap) << " of the 3-sigma band";
    harness.report(10, pass, seconds_since(start), "win statistics",
                   detail.str());
  }

  // ---- 11: directional comparison at reduced scale, paired seeds
  {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<std::pair<std::size_t, std::size_t>> cells{{50, 500},
                                                                 {100, 1000}};
    int utilization_cells = 0;
    int ordering_cells = 0;
    int total_cells = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      for (const auto kind : {DistributionSpec::Kind::uniform,
                              DistributionSpec::Kind::normal}) {
        ExperimentConfig config;
        config.gen.requesters = cells[c].first;
        config.gen.executers = cells[c].second;
        config.gen.distribution.kind = kind;
        config.pipeline.model = GraderModel::noisy(0.1);
        const std::uint64_t cell_seed =
            derive_seed(kSeed, 0x444952, total_cells);
        ++total_cells;

        config.pipeline.mechanism = MechanismKind::tubetap;
        const AveragedMetrics tubetap_plain =
            manipulation_experiment(config, Variation::none, 50, cell_seed);
        config.pipeline.mechanism = MechanismKind::benchmark;
        const AveragedMetrics bm_plain =
            manipulation_experiment(config, Variation::none, 50, cell_seed);
        const AveragedMetrics bm_small =
            manipulation_experiment(config, Variation::small, 50, cell_seed);
        const AveragedMetrics bm_medium =
            manipulation_experiment(config, Variation::medium, 50, cell_seed);
        const AveragedMetrics bm_large =
            manipulation_experiment(config, Variation::large, 50, cell_seed);

        if (tubetap_plain.mean_utilization >= bm_plain.mean_utilization)
          ++utilization_cells;
        if (bm_small.mean_total_utility < bm_medium.mean_total_utility &&
            bm_medium.mean_total_utility < bm_large.mean_total_utility)
          ++ordering_cells;
      }
    }
    const double elapsed = seconds_since(start);
    const bool utilization_ok =
        utilization_cells >= static_cast<int>(std::ceil(0.8 * total_cells));
    const bool ordering_ok =
        ordering_cells >= static_cast<int>(std::ceil(0.8 * total_cells));
    std::ostringstream detail;
    detail << "utilization lead in " << utilization_cells << "/" << total_cells
           << " cells, inflation ordering small<medium<large in "
           << ordering_cells << "/" << total_cells << " cells (50 rounds)";
    harness.report(11, utilization_ok && ordering_ok && elapsed < 300.0,
                   elapsed, "directional comparison", detail.str());
  }

  // ---- 12: byte-identical outputs per seed
  {
    const auto start = std::chrono::steady_clock::now();
    RunConfig run_config;
    run_config.requesters = 6;
    run_config.executers = 30;
    run_config.interest_hi = 3;
    run_config.rounds = 3;
    run_config.mechanism = "both";
    run_config.variation = "small";
    run_config.seed = 7;
    const RunArtifacts a = execute_run(run_config);
    const RunArtifacts b = execute_run(run_config);

    std::ostringstream gen_a, gen_b, err;
    RunConfig gen_config;
    gen_config.requesters = 6;
    gen_config.executers = 30;
    gen_config.seed = 7;
    cmd_generate(gen_config, gen_a, err);
    cmd_generate(gen_config, gen_b, err);

    SweepConfig sweep_config;
    sweep_config.configs = {{4, 20}};
    sweep_config.rounds = 2;
    sweep_config.interest_hi = 3;
    sweep_config.seed = 7;
    const bool in_process = a.csv == b.csv &&
                            a.summary_json == b.summary_json &&
                            gen_a.str() == gen_b.str() &&
                            execute_sweep(sweep_config).utilization_csv ==
                                execute_sweep(sweep_config).utilization_csv;

    bool binary_ok = true;
    std::string binary_note = "CLI binary not exercised (TUBETAP_CLI unset)";
    if (const char* cli = std::getenv("TUBETAP_CLI")) {
      const auto dir = std::filesystem::temp_directory_path();
      const std::string tag = std::to_string(
          static_cast<unsigned long>(::getpid()));
      const auto temp = [&](const std::string& name) {
        return (dir / ("tubetap_det_" + name + "_" + tag)).string();
      };
      const std::string quoted = std::string("\"") + cli + "\" ";

      const std::string g1 = temp("g1") + ".json";
      const std::string g2 = temp("g2") + ".json";
      const std::string gen_cmd =
          quoted + "generate --requesters 6 --executers 30 --seed 7 -o ";
      const bool gen_ok =
          std::system((gen_cmd + g1 + " 2>/dev/null").c_str()) == 0 &&
          std::system((gen_cmd + g2 + " 2>/dev/null").c_str()) == 0 &&
          !read_file(g1).empty() && read_file(g1) == read_file(g2);

      const std::string r1 = temp("r1") + ".csv";
      const std::string r2 = temp("r2") + ".csv";
      const std::string run_cmd = quoted +
                                  "run --requesters 5 --executers 25 "
                                  "--interest-hi 3 --rounds 1 "
                                  "--mechanism both --seed 7 -o ";
      const bool run_ok =
          std::system((run_cmd + r1 + " 2>/dev/null").c_str()) == 0 &&
          std::system((run_cmd + r2 + " 2>/dev/null").c_str()) == 0 &&
          !read_file(r1).empty() && read_file(r1) == read_file(r2) &&
          read_file(summary_path_for(r1)) == read_file(summary_path_for(r2));

      for (const std::string& p :
           {g1, g2, r1, r2, summary_path_for(r1), summary_path_for(r2)})
        std::filesystem::remove(p);
      binary_ok = gen_ok && run_ok;
      binary_note = binary_ok ? "CLI binary outputs byte-identical"
                              : "CLI binary outputs differ";
    }
    harness.report(12, in_process && binary_ok, seconds_since(start),
                   "determinism",
                   std::string("run/generate/sweep byte-identical; ") +
                       binary_note);
  }

  if (harness.failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", harness.failures);
  return 1;
}
