#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tubetap/analysis.hpp"
#include "tubetap/fixtures.hpp"
#include "tubetap/verify.hpp"

using namespace tubetap;
using fixtures::E;
using fixtures::T;

namespace {

MechanismOutcome run_fixture(const fixtures::Fixture& fixture,
                             MechanismKind kind = MechanismKind::tubetap) {
  const ConflictGraph graph = build_conflict_graph(fixture.scenario);
  const SlotAssignment slots =
      allocate_time_slots(graph, default_kappa(graph));
  PipelineParams params = fixture.params;
  params.mechanism = kind;
  return run_main_routine(fixture.scenario, fixture.scenario.truthful_bids,
                          slots, params, round_seed(fixture.seed, 0));
}

}  // namespace

TEST_CASE("metrics capture utilization and utility") {
  const auto fixture = fixtures::get_fixture("example3");
  const MechanismOutcome outcome = run_fixture(fixture);
  const Metrics metrics = compute_metrics(outcome, fixture.scenario);
  REQUIRE(metrics.per_task_utilization.at(T(1)) == 1.0);
  REQUIRE(metrics.winner_counts.at(T(1)) == 2);
  REQUIRE(metrics.aggregate_utilization <= 1.0);

  // winners on T1 are paid 25 for valuations 10 and 20
  Money expected_t1_utility = (25.0 - 10.0) + (25.0 - 20.0);
  Money t1_utility = device_utility(outcome, E(4), fixture.scenario) +
                     device_utility(outcome, E(3), fixture.scenario);
  REQUIRE(t1_utility == expected_t1_utility);

  SECTION("lower losing bid lowers utilization to 0.84") {
    const auto fig5 = fixtures::get_fixture("fig5");
    const Metrics m = compute_metrics(run_fixture(fig5), fig5.scenario);
    REQUIRE(m.per_task_utilization.at(T(1)) == Catch::Approx(0.84).epsilon(1e-12));
  }
  SECTION("no winners means zero utilization and utility") {
    Scenario s;
    s.tasks = {{0, 5.0}};
    s.devices.resize(4);
    for (DeviceId i = 0; i < 4; ++i) {
      s.devices[i] = {i, {0}, {{0, 50.0 + i}}, 0.2 * i};
      s.truthful_bids.set(i, 0, 50.0 + i);
    }
    const ConflictGraph g = build_conflict_graph(s);
    const MechanismOutcome o = run_main_routine(
        s, s.truthful_bids, allocate_time_slots(g, 1), PipelineParams{}, 7);
    const Metrics m = compute_metrics(o, s);
    REQUIRE(m.aggregate_utilization == 0.0);
    REQUIRE(m.total_device_utility == 0.0);
  }
}

TEST_CASE("no profitable deviation exists against the main mechanism") {
  ScenarioGenConfig gen = verify_market_config();
  const DeviationReport report =
      truthfulness_search(gen, MechanismKind::tubetap, 60, 20, 1234);
  REQUIRE(report.instances_tested == 60);
  REQUIRE(report.profitable_found.empty());
}

TEST_CASE("the benchmark search finds profitable overbids") {
  ScenarioGenConfig gen = verify_market_config();
  const DeviationReport report =
      truthfulness_search(gen, MechanismKind::benchmark, 40, 20, 1234);
  REQUIRE_FALSE(report.profitable_found.empty());

  SECTION("recorded deviations replay to the same gain") {
    for (std::size_t i = 0;
         i < std::min<std::size_t>(3, report.profitable_found.size()); ++i) {
      const Deviation& dev = report.profitable_found[i];
      REQUIRE(replay_deviation(gen, MechanismKind::benchmark, dev) ==
              dev.utility_gain);
      REQUIRE(dev.utility_gain > 0.0);
    }
  }
}

TEST_CASE("zero deviations per instance yields an empty report") {
  const DeviationReport report = truthfulness_search(
      verify_market_config(), MechanismKind::tubetap, 3, 0, 5);
  REQUIRE(report.deviations_tested == 0);
  REQUIRE(report.profitable_found.empty());
}

TEST_CASE("stored benchmark counterexample gains exactly 10") {
  REQUIRE(benchmark_counterexample_gain() == 10.0);
}

TEST_CASE("benchmark pipeline pays 30 and 40 for utilities of 20 each") {
  const auto fixture = fixtures::get_fixture("bm-counterexample");
  const MechanismOutcome outcome =
      run_fixture(fixture, MechanismKind::benchmark);
  const TaskOutcome& task = outcome.per_task.at(0);
  REQUIRE(task.payments.at(0) == 30.0);
  REQUIRE(task.payments.at(1) == 40.0);
  REQUIRE(device_utility(outcome, 0, fixture.scenario) == 20.0);
  REQUIRE(device_utility(outcome, 1, fixture.scenario) == 20.0);
  REQUIRE(device_utility(outcome, 2, fixture.scenario) == 0.0);
  REQUIRE(device_utility(outcome, 3, fixture.scenario) == 0.0);
}

TEST_CASE("variation levels map to the documented fractions") {
  REQUIRE(variation_params(Variation::none) == std::pair{0.0, 0.0});
  REQUIRE(variation_params(Variation::small) == std::pair{0.15, 0.35});
  REQUIRE(variation_params(Variation::medium) == std::pair{0.30, 0.35});
  REQUIRE(variation_params(Variation::large) == std::pair{0.40, 0.35});
}

TEST_CASE("manipulation experiment averages rounds deterministically") {
  ExperimentConfig config;
  config.gen = verify_market_config();
  config.pipeline.mechanism = MechanismKind::benchmark;

  const AveragedMetrics a =
      manipulation_experiment(config, Variation::small, 5, 77);
  const AveragedMetrics b =
      manipulation_experiment(config, Variation::small, 5, 77);
  REQUIRE(a.mean_utilization == b.mean_utilization);
  REQUIRE(a.mean_total_utility == b.mean_total_utility);
  REQUIRE(a.rounds == 5);
  REQUIRE(a.mean_utilization >= 0.0);
  REQUIRE(a.mean_utilization <= 1.0);

  SECTION("rounds must be positive") {
    REQUIRE_THROWS_AS(manipulation_experiment(config, Variation::none, 0, 1),
                      InvalidConfig);
  }
}

TEST_CASE("bernoulli win statistics match the closed forms") {
  const WinStats stats = bernoulli_win_stats(0.5, 10, 100000, 99);
  REQUIRE(stats.mean_wins ==
          Catch::Approx(5.0).margin(3.0 * std::sqrt(10 * 0.25 / 100000.0)));
  REQUIRE(stats.p_at_least_one >= 1.0 - std::exp(-5.0) - 0.005);
  REQUIRE(stats.p_at_least_one <= 1.0);
  REQUIRE(stats.mean_wins <= 10.0);

  SECTION("near-certain win probability") {
    const WinStats sure = bernoulli_win_stats(0.999, 8, 20000, 7);
    REQUIRE(sure.p_at_least_one == Catch::Approx(1.0).margin(1e-3));
  }
  SECTION("probability bounds enforced") {
    REQUIRE_THROWS_AS(bernoulli_win_stats(0.0, 5, 10, 1), InvalidProbability);
    REQUIRE_THROWS_AS(bernoulli_win_stats(1.0, 5, 10, 1), InvalidProbability);
    REQUIRE_THROWS_AS(bernoulli_win_stats(0.5, 0, 10, 1), InvalidConfig);
  }
  SECTION("exact no-win probability within Monte Carlo error") {
    const WinStats s = bernoulli_win_stats(0.25, 10, 100000, 5);
    const double exact = 1.0 - std::pow(0.75, 10);
    REQUIRE(s.p_at_least_one == Catch::Approx(exact).margin(0.005));
  }
}

TEST_CASE("longest rejection streak grows sublinearly") {
  const RejectionGrowthCheck check = check_rejection_growth(4);
  REQUIRE(check.streaks.size() == 3);
  REQUIRE(check.sublinear);
  REQUIRE(check.streaks[1] > check.streaks[0]);  // still growing
}

TEST_CASE("empirical win probability bridges outcomes and the win model") {
  const auto fixture = fixtures::get_fixture("example3");
  const MechanismOutcome outcome = run_fixture(fixture);
  const auto probabilities =
      empirical_win_probability({outcome}, fixture.scenario);
  REQUIRE(probabilities.at(E(4)) == 1.0);  // one interest, one win
  REQUIRE(probabilities.at(E(6)) == 0.0);
  REQUIRE_THROWS_AS(empirical_win_probability({}, fixture.scenario),
                    InvalidConfig);
}
