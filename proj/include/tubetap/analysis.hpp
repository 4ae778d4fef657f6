#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tubetap/conflict_graph.hpp"
#include "tubetap/errors.hpp"
#include "tubetap/market.hpp"
#include "tubetap/mechanisms.hpp"

namespace tubetap {

/// Budget utilization and device utility for one mechanism run.
struct Metrics {
  std::map<TaskId, double> per_task_utilization;
  double aggregate_utilization = 0.0;   // sum payments / sum budgets
  Money total_device_utility = 0.0;     // against true valuations
  std::map<TaskId, std::size_t> winner_counts;
};

inline Metrics compute_metrics(const MechanismOutcome& outcome,
                               const Scenario& scenario) {
  Metrics metrics;
  Money paid = 0;
  Money budgets = 0;
  for (const Task& t : scenario.tasks) {
    const auto it = outcome.per_task.find(t.id);
    if (it == outcome.per_task.end())
      throw InvalidScenario("outcome is missing task " + std::to_string(t.id));
    const Money task_paid = it->second.payment_total();
    metrics.per_task_utilization[t.id] = task_paid / t.budget;
    metrics.winner_counts[t.id] = it->second.winner_count_k;
    paid += task_paid;
    budgets += t.budget;
  }
  metrics.aggregate_utilization = budgets > 0 ? paid / budgets : 0.0;
  for (const Device& d : scenario.devices)
    metrics.total_device_utility += device_utility(outcome, d.id, scenario);
  return metrics;
}

/// Shorthand for the generate_scenario parameters used by the experiments.
struct ScenarioGenConfig {
  std::size_t requesters = 50;
  std::size_t executers = 500;
  DistributionSpec distribution;
  std::size_t interest_lo = 1;
  std::size_t interest_hi = 5;

  Scenario make(std::uint64_t seed) const {
    return generate_scenario(requesters, executers, distribution,
                             interest_lo, std::min(interest_hi, requesters),
                             seed);
  }
};

struct Deviation {
  std::uint64_t instance_seed = 0;
  DeviceId device = 0;
  TaskId task = 0;
  Money original_bid = 0;
  Money deviated_bid = 0;
  Money utility_gain = 0;
};

struct DeviationReport {
  std::size_t instances_tested = 0;
  std::size_t deviations_tested = 0;
  std::vector<Deviation> profitable_found;
};

namespace detail {

/// Utility of `device` on one task under a given outcome.
inline Money task_utility(const TaskOutcome& outcome, DeviceId device,
                          Money true_valuation) {
  const auto it = outcome.payments.find(device);
  return it == outcome.payments.end() ? 0.0 : it->second - true_valuation;
}

/// Rerun a single task's allocation with one quality-device bid replaced.
/// Peer grading never reads bids, so the quality set itself is unchanged.
inline TaskOutcome rerun_with_bid(const QualitySet& quality, std::size_t index,
                                  Money new_bid, Money budget,
                                  MechanismKind mechanism, Money epsilon) {
  QualitySet deviated = quality;
  deviated.member_bids[index] = new_bid;
  return mechanism == MechanismKind::tubetap
             ? run_tubetap_task(quality.task, deviated, budget)
             : benchmark_mechanism(quality.task, deviated.members,
                                   deviated.member_bids, budget, epsilon);
}

/// Candidate misreports for one device: multiplicative moves around the
/// true valuation plus probes just below, at, and just above every other
/// quality bid.
inline std::vector<Money> deviation_candidates(
    Money valuation, const std::vector<Money>& other_bids) {
  static constexpr double kDeltas[] = {0.05, 0.1, 0.2, 0.35,
                                       0.5,  0.75, 1.0, 1.5, 2.0};
  std::vector<Money> candidates;
  for (double delta : kDeltas) {
    candidates.push_back(valuation * (1.0 + delta));
    const Money down = valuation * (1.0 - delta);
    if (down > 0) candidates.push_back(down);
  }
  for (Money b : other_bids) {
    const Money eps = 1e-6 * std::max(1.0, b);
    if (b - eps > 0) candidates.push_back(b - eps);
    candidates.push_back(b);
    candidates.push_back(b + eps);
  }
  return candidates;
}

struct PreparedInstance {
  Scenario scenario;
  MechanismOutcome truthful;
  std::vector<TaskId> tasks_with_members;
};

inline PreparedInstance prepare_instance(const ScenarioGenConfig& config,
                                         const PipelineParams& params,
                                         std::uint64_t instance_seed) {
  PreparedInstance inst;
  inst.scenario = config.make(instance_seed);
  const ConflictGraph graph = build_conflict_graph(inst.scenario);
  const SlotAssignment slots =
      allocate_time_slots(graph, default_kappa(graph));
  inst.truthful = run_main_routine(inst.scenario, inst.scenario.truthful_bids,
                                   slots, params, instance_seed);
  for (const auto& [task, quality] : inst.truthful.quality_sets)
    if (!quality.members.empty()) inst.tasks_with_members.push_back(task);
  return inst;
}

inline Money deviation_gain(const PreparedInstance& inst,
                            const PipelineParams& params, TaskId task,
                            std::size_t member_index, Money new_bid) {
  const QualitySet& quality = inst.truthful.quality_sets.at(task);
  const DeviceId device = quality.members[member_index];
  const Money valuation =
      inst.scenario.devices[device].true_valuations.at(task);
  const Money budget = inst.scenario.tasks[task].budget;
  const TaskOutcome deviated =
      rerun_with_bid(quality, member_index, new_bid, budget, params.mechanism,
                     params.epsilon);
  const Money truthful_u =
      task_utility(inst.truthful.per_task.at(task), device, valuation);
  return task_utility(deviated, device, valuation) - truthful_u;
}

}  // namespace detail

/// Randomized search for a profitable unilateral misreport. Quality sets are
/// held fixed while a single quality device's bid is perturbed, since the
/// grading phase is independent of the reported bids.
inline DeviationReport truthfulness_search(const ScenarioGenConfig& config,
                                           MechanismKind mechanism,
                                           std::size_t instances,
                                           std::size_t deviations_per_instance,
                                           std::uint64_t seed,
                                           Money tolerance = 1e-9) {
  if (instances < 1) throw InvalidConfig("need at least one instance");

  PipelineParams params;
  params.mechanism = mechanism;

  DeviationReport report;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::uint64_t instance_seed = derive_seed(seed, 0x494e5354, i);
    const auto inst = detail::prepare_instance(config, params, instance_seed);
    report.instances_tested += 1;
    if (inst.tasks_with_members.empty()) continue;

    Rng rng(derive_seed(instance_seed, 0x444556));
    for (std::size_t d = 0; d < deviations_per_instance; ++d) {
      const TaskId task = inst.tasks_with_members[rng.uniform_index(
          inst.tasks_with_members.size())];
      const QualitySet& quality = inst.truthful.quality_sets.at(task);
      const std::size_t member_index =
          rng.uniform_index(quality.members.size());
      const DeviceId device = quality.members[member_index];
      const Money valuation =
          inst.scenario.devices[device].true_valuations.at(task);

      std::vector<Money> others;
      for (std::size_t m = 0; m < quality.member_bids.size(); ++m)
        if (m != member_index) others.push_back(quality.member_bids[m]);
      const auto candidates = detail::deviation_candidates(valuation, others);
      const Money new_bid = candidates[rng.uniform_index(candidates.size())];

      const Money gain =
          detail::deviation_gain(inst, params, task, member_index, new_bid);
      report.deviations_tested += 1;
      if (gain > tolerance) {
        report.profitable_found.push_back({instance_seed, device, task,
                                           quality.member_bids[member_index],
                                           new_bid, gain});
      }
    }
  }
  return report;
}

/// Recomputes the utility gain of a recorded deviation from its seed.
inline Money replay_deviation(const ScenarioGenConfig& config,
                              MechanismKind mechanism,
                              const Deviation& deviation) {
  PipelineParams params;
  params.mechanism = mechanism;
  const auto inst =
      detail::prepare_instance(config, params, deviation.instance_seed);
  const QualitySet& quality = inst.truthful.quality_sets.at(deviation.task);
  const auto it = std::find(quality.members.begin(), quality.members.end(),
                            deviation.device);
  if (it == quality.members.end())
    throw InvalidScenario("recorded deviator is not a quality device");
  const auto index =
      static_cast<std::size_t>(it - quality.members.begin());
  return detail::deviation_gain(inst, params, deviation.task, index,
                                deviation.deviated_bid);
}

enum class Variation { none, small, medium, large };

inline const char* variation_name(Variation v) {
  switch (v) {
    case Variation::none: return "none";
    case Variation::small: return "small";
    case Variation::medium: return "medium";
    case Variation::large: return "large";
  }
  return "none";
}

/// fraction of devices inflating, and by how much
inline std::pair<double, double> variation_params(Variation v) {
  switch (v) {
    case Variation::none: return {0.0, 0.0};
    case Variation::small: return {0.15, 0.35};
    case Variation::medium: return {0.30, 0.35};
    case Variation::large: return {0.40, 0.35};
  }
  return {0.0, 0.0};
}

struct ExperimentConfig {
  ScenarioGenConfig gen;
  PipelineParams pipeline;
  int kappa = 0;  // 0 = max degree + 1 of each round's graph
};

/// Round-averaged metrics. Round seeds depend only on (seed, round), so runs
/// with different mechanisms or variation levels see identical markets.
struct AveragedMetrics {
  std::size_t rounds = 0;
  double mean_utilization = 0.0;
  double std_utilization = 0.0;
  Money mean_total_utility = 0.0;
  Money std_total_utility = 0.0;
  double mean_winner_total = 0.0;
};

namespace detail {

inline double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace detail

inline AveragedMetrics manipulation_experiment(const ExperimentConfig& config,
                                               Variation variation,
                                               std::size_t rounds,
                                               std::uint64_t seed) {
  if (rounds < 1) throw InvalidConfig("need at least one round");
  const auto [fraction, inflation] = variation_params(variation);

  std::vector<double> utilizations;
  std::vector<double> utilities;
  double winner_total_acc = 0.0;
  for (std::size_t round = 0; round < rounds; ++round) {
    const std::uint64_t scenario_seed = derive_seed(seed, 0x53434e, round);
    const Scenario scenario = config.gen.make(scenario_seed);
    const BidProfile bids =
        variation == Variation::none
            ? scenario.truthful_bids
            : apply_mass_inflation(scenario, fraction, inflation,
                                   derive_seed(seed, 0x494e46, round));
    const ConflictGraph graph = build_conflict_graph(scenario);
    const int kappa = config.kappa > 0 ? config.kappa : default_kappa(graph);
    const SlotAssignment slots = allocate_time_slots(graph, kappa);
    const MechanismOutcome outcome = run_main_routine(
        scenario, bids, slots, config.pipeline, round_seed(seed, round));
    const Metrics metrics = compute_metrics(outcome, scenario);
    utilizations.push_back(metrics.aggregate_utilization);
    utilities.push_back(metrics.total_device_utility);
    for (const auto& [task, count] : metrics.winner_counts)
      winner_total_acc += static_cast<double>(count);
  }

  AveragedMetrics avg;
  avg.rounds = rounds;
  const auto n = static_cast<double>(rounds);
  for (double u : utilizations) avg.mean_utilization += u / n;
  for (double u : utilities) avg.mean_total_utility += u / n;
  avg.std_utilization =
      detail::sample_std(utilizations, avg.mean_utilization);
  avg.std_total_utility = detail::sample_std(utilities, avg.mean_total_utility);
  avg.mean_winner_total = winner_total_acc / n;
  return avg;
}

/// Empirical statistics of k_i independent Bernoulli(p) win draws.
struct WinStats {
  double p = 0.0;
  std::size_t k_i = 0;
  std::size_t trials = 0;
  double mean_wins = 0.0;
  double p_at_least_one = 0.0;
  double mean_longest_rejection = 0.0;
};

inline WinStats bernoulli_win_stats(double p, std::size_t k_i,
                                    std::size_t trials, std::uint64_t seed) {
  if (!(p > 0.0 && p < 1.0))
    throw InvalidProbability("win probability must lie strictly in (0, 1)");
  if (k_i < 1 || trials < 1)
    throw InvalidConfig("k_i and trials must be >= 1");

  Rng rng(derive_seed(seed, 0x42524e));
  std::uint64_t total_wins = 0;
  std::size_t at_least_one = 0;
  std::uint64_t longest_sum = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t wins = 0;
    std::size_t run = 0;
    std::size_t longest = 0;
    for (std::size_t j = 0; j < k_i; ++j) {
      if (rng.bernoulli(p)) {
        ++wins;
        run = 0;
      } else {
        ++run;
        longest = std::max(longest, run);
      }
    }
    total_wins += wins;
    if (wins >= 1) ++at_least_one;
    longest_sum += longest;
  }

  WinStats stats;
  stats.p = p;
  stats.k_i = k_i;
  stats.trials = trials;
  stats.mean_wins =
      static_cast<double>(total_wins) / static_cast<double>(trials);
  stats.p_at_least_one =
      static_cast<double>(at_least_one) / static_cast<double>(trials);
  stats.mean_longest_rejection =
      static_cast<double>(longest_sum) / static_cast<double>(trials);
  return stats;
}

/// Observed per-device win frequency across repeated runs: wins divided by
/// (interest count * rounds). Bridges the mechanism output to the Bernoulli
/// win model above.
inline std::map<DeviceId, double> empirical_win_probability(
    const std::vector<MechanismOutcome>& outcomes, const Scenario& scenario) {
  if (outcomes.empty()) throw InvalidConfig("need at least one outcome");
  std::map<DeviceId, double> probabilities;
  for (const Device& d : scenario.devices) {
    if (d.interests.empty()) {
      probabilities[d.id] = 0.0;
      continue;
    }
    std::size_t wins = 0;
    for (const MechanismOutcome& outcome : outcomes)
      for (const auto& [task, task_outcome] : outcome.per_task)
        if (task_outcome.payments.count(d.id) > 0) ++wins;
    probabilities[d.id] =
        static_cast<double>(wins) /
        (static_cast<double>(d.interests.size()) *
         static_cast<double>(outcomes.size()));
  }
  return probabilities;
}

}  // namespace tubetap
