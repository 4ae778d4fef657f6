#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tubetap/analysis.hpp"
#include "tubetap/conflict_graph.hpp"
#include "tubetap/fixtures.hpp"
#include "tubetap/market.hpp"
#include "tubetap/mechanisms.hpp"

namespace tubetap {

/// Per-task and aggregate checks over a batch of random end-to-end runs:
/// budget feasibility, individual rationality under truthful bids, and the
/// 2-approximation bound against the prefix-sum optimum.
struct RandomInstanceAudit {
  std::size_t instances = 0;
  std::size_t tasks_checked = 0;
  std::size_t budget_violations = 0;
  std::size_t global_budget_violations = 0;
  std::size_t ir_violations = 0;
  std::size_t negative_utility_devices = 0;
  std::size_t approx_violations = 0;
  double max_opt_ratio = 0.0;

  bool budget_ok() const {
    return budget_violations == 0 && global_budget_violations == 0;
  }
  bool ir_ok() const {
    return ir_violations == 0 && negative_utility_devices == 0;
  }
  bool approx_ok() const { return approx_violations == 0; }
};

/// Market used by the deviation-search suites: small enough that thousands
/// of full pipeline runs stay fast, large enough that allocation boundaries
/// move around.
inline ScenarioGenConfig verify_market_config() {
  ScenarioGenConfig gen;
  gen.requesters = 8;
  gen.executers = 40;
  gen.interest_lo = 1;
  gen.interest_hi = 3;
  return gen;
}

/// Small-market generator used by the audits: 1..10 tasks, five devices per
/// task, default bid and budget ranges.
inline ScenarioGenConfig audit_market_config(std::size_t index) {
  ScenarioGenConfig config;
  config.requesters = 1 + index % 10;
  config.executers = 5 * config.requesters;
  config.interest_lo = 1;
  config.interest_hi = std::min<std::size_t>(3, config.requesters);
  return config;
}

inline RandomInstanceAudit audit_random_instances(std::size_t count,
                                                  std::uint64_t seed) {
  RandomInstanceAudit audit;
  PipelineParams params;  // proportional-share mechanism
  for (std::size_t i = 0; i < count; ++i) {
    const ScenarioGenConfig config = audit_market_config(i);
    const Scenario scenario = config.make(derive_seed(seed, 0x415544, i));
    const ConflictGraph graph = build_conflict_graph(scenario);
    const SlotAssignment slots =
        allocate_time_slots(graph, default_kappa(graph));
    const MechanismOutcome outcome = run_main_routine(
        scenario, scenario.truthful_bids, slots, params, scenario.seed);

    Money paid_all = 0;
    Money budget_all = 0;
    for (const Task& task : scenario.tasks) {
      const TaskOutcome& result = outcome.per_task.at(task.id);
      const QualitySet& quality = outcome.quality_sets.at(task.id);
      budget_all += task.budget;
      if (result.winners.empty() && quality.members.empty()) continue;
      ++audit.tasks_checked;

      const Money paid = result.payment_total();
      paid_all += paid;
      if (paid > task.budget) ++audit.budget_violations;

      for (DeviceId w : result.winners) {
        if (result.payments.at(w) <
            scenario.truthful_bids.at(w, task.id))
          ++audit.ir_violations;
      }

      const std::size_t opt =
          optimal_winner_count(quality.member_bids, task.budget);
      if (opt > 2 * result.winner_count_k) ++audit.approx_violations;
      if (result.winner_count_k > 0) {
        audit.max_opt_ratio = std::max(
            audit.max_opt_ratio, static_cast<double>(opt) /
                                     static_cast<double>(result.winner_count_k));
      }
    }
    if (paid_all > budget_all) ++audit.global_budget_violations;
    for (const Device& d : scenario.devices) {
      if (device_utility(outcome, d.id, scenario) < 0)
        ++audit.negative_utility_devices;
    }
    ++audit.instances;
  }
  return audit;
}

/// Exhaustive 2-approximation sweep over every bid list of length 1..max_len
/// with integer bids in [1, max_bid] and integer budgets in [1, max_budget].
struct ExhaustiveApproxResult {
  std::size_t cases = 0;
  std::size_t violations = 0;
  double max_opt_ratio = 0.0;
};

inline ExhaustiveApproxResult exhaustive_two_approximation(
    std::size_t max_len = 4, int max_bid = 10, int max_budget = 20) {
  ExhaustiveApproxResult result;
  std::vector<int> bids;
  const auto visit = [&](const std::vector<int>& current) {
    QualitySet quality;
    quality.task = 0;
    for (std::size_t i = 0; i < current.size(); ++i) {
      quality.members.push_back(static_cast<DeviceId>(i));
      quality.member_bids.push_back(static_cast<Money>(current[i]));
    }
    for (int budget = 1; budget <= max_budget; ++budget) {
      const AllocationResult alloc =
          tubetap_allocate(quality, static_cast<Money>(budget));
      const std::size_t opt = optimal_winner_count(
          quality.member_bids, static_cast<Money>(budget));
      ++result.cases;
      if (opt > 2 * alloc.k) ++result.violations;
      if (alloc.k > 0)
        result.max_opt_ratio =
            std::max(result.max_opt_ratio,
                     static_cast<double>(opt) / static_cast<double>(alloc.k));
    }
  };
  // iterate all bid tuples of each length
  for (std::size_t len = 1; len <= max_len; ++len) {
    bids.assign(len, 1);
    for (;;) {
      visit(bids);
      std::size_t pos = 0;
      while (pos < len && bids[pos] == max_bid) bids[pos++] = 1;
      if (pos == len) break;
      ++bids[pos];
    }
  }
  return result;
}

/// Random G(n, p) coloring audit with kappa = max degree + 1: the heuristic
/// must always succeed and produce a proper assignment within kappa slots.
struct ColoringAudit {
  std::size_t graphs = 0;
  std::size_t failures = 0;
};

inline ColoringAudit audit_random_colorings(std::size_t count,
                                            std::uint64_t seed,
                                            std::size_t max_vertices = 50,
                                            double edge_prob = 0.2) {
  ColoringAudit audit;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, 0x434f4c, i));
    const auto n = static_cast<std::size_t>(
        rng.uniform_int(1, static_cast<std::int64_t>(max_vertices)));
    ConflictGraph graph;
    for (std::size_t v = 0; v < n; ++v)
      graph.add_vertex(static_cast<TaskId>(v));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (rng.bernoulli(edge_prob))
          graph.add_edge(static_cast<TaskId>(a), static_cast<TaskId>(b));
    ++audit.graphs;
    try {
      const SlotAssignment slots =
          allocate_time_slots(graph, default_kappa(graph));
      int max_slot = 0;
      for (const auto& [v, s] : slots.slot_of) max_slot = std::max(max_slot, s);
      if (!verify_assignment(graph, slots) || max_slot > slots.kappa)
        ++audit.failures;
    } catch (const GraphNotReducible&) {
      ++audit.failures;  // kappa = maxdeg + 1 can never stall
    }
  }
  return audit;
}

/// One Bernoulli win-statistics cell checked against the closed forms:
/// E[wins] = p * k within 3 standard errors, and P[>=1 win] at least
/// 1 - e^{-p k} minus 3 standard errors (and near 1 - (1-p)^k).
struct WinStatsCheck {
  WinStats stats;
  double expected_mean = 0.0;
  double mean_band = 0.0;
  double lower_bound = 0.0;
  double exact_p_at_least_one = 0.0;
  double p_band = 0.0;
  bool mean_ok = false;
  bool bound_ok = false;
  bool exact_ok = false;
};

inline WinStatsCheck check_win_stats(double p, std::size_t k_i,
                                     std::size_t trials, std::uint64_t seed) {
  WinStatsCheck check;
  check.stats = bernoulli_win_stats(p, k_i, trials, seed);
  check.expected_mean = p * static_cast<double>(k_i);
  check.mean_band =
      3.0 * std::sqrt(static_cast<double>(k_i) * p * (1.0 - p) /
                      static_cast<double>(trials));
  check.lower_bound = 1.0 - std::exp(-p * static_cast<double>(k_i));
  check.exact_p_at_least_one =
      1.0 - std::pow(1.0 - p, static_cast<double>(k_i));
  check.p_band = 3.0 * std::sqrt(0.25 / static_cast<double>(trials));
  check.mean_ok =
      std::abs(check.stats.mean_wins - check.expected_mean) <= check.mean_band;
  check.bound_ok =
      check.stats.p_at_least_one >= check.lower_bound - check.p_band;
  check.exact_ok = std::abs(check.stats.p_at_least_one -
                            check.exact_p_at_least_one) <= check.p_band;
  return check;
}

inline std::vector<WinStatsCheck> check_win_stats_grid(std::size_t trials,
                                                       std::uint64_t seed) {
  std::vector<WinStatsCheck> checks;
  std::uint64_t cell = 0;
  for (double p : {0.25, 0.5, 0.693}) {
    for (std::size_t k_i : {5u, 10u, 20u}) {
      checks.push_back(check_win_stats(p, k_i, trials, derive_seed(seed, cell)));
      ++cell;
    }
  }
  return checks;
}

/// Doubling k_i should grow the mean longest rejection streak far slower
/// than linearly (the streak length is logarithmic in k_i).
struct RejectionGrowthCheck {
  std::vector<double> streaks;  // for k, 2k, 4k
  bool sublinear = true;
};

inline RejectionGrowthCheck check_rejection_growth(std::uint64_t seed,
                                                   double p = 0.5,
                                                   std::size_t base_k = 32,
                                                   std::size_t trials = 20000) {
  RejectionGrowthCheck check;
  for (std::size_t k = base_k; k <= 4 * base_k; k *= 2) {
    check.streaks.push_back(
        bernoulli_win_stats(p, k, trials, derive_seed(seed, k))
            .mean_longest_rejection);
  }
  for (std::size_t i = 1; i < check.streaks.size(); ++i) {
    const double ratio = check.streaks[i] / check.streaks[i - 1];
    if (!(ratio < 1.5)) check.sublinear = false;
  }
  return check;
}

/// Replays the stored benchmark counterexample: the device with true
/// valuation 10 overbids to 25 and gains exactly 10 in utility.
inline Money benchmark_counterexample_gain() {
  const fixtures::Fixture fixture = fixtures::get_fixture("bm-counterexample");
  PipelineParams params = fixture.params;
  params.mechanism = MechanismKind::benchmark;

  const ConflictGraph graph = build_conflict_graph(fixture.scenario);
  const SlotAssignment slots =
      allocate_time_slots(graph, default_kappa(graph));
  const MechanismOutcome truthful =
      run_main_routine(fixture.scenario, fixture.scenario.truthful_bids, slots,
                       params, fixture.seed);

  const TaskId task = 0;
  const DeviceId deviator = 0;
  const Money valuation =
      fixture.scenario.devices[deviator].true_valuations.at(task);
  const QualitySet& quality = truthful.quality_sets.at(task);
  const auto it =
      std::find(quality.members.begin(), quality.members.end(), deviator);
  const auto index = static_cast<std::size_t>(it - quality.members.begin());

  const TaskOutcome deviated = detail::rerun_with_bid(
      quality, index, 25.0, fixture.scenario.tasks[task].budget,
      MechanismKind::benchmark, params.epsilon);
  const Money truthful_utility =
      detail::task_utility(truthful.per_task.at(task), deviator, valuation);
  const Money deviated_utility =
      detail::task_utility(deviated, deviator, valuation);
  return deviated_utility - truthful_utility;
}

}  // namespace tubetap
