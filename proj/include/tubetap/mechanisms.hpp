#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "tubetap/conflict_graph.hpp"
#include "tubetap/errors.hpp"
#include "tubetap/market.hpp"
#include "tubetap/peer_grading.hpp"

namespace tubetap {

enum class MechanismKind { tubetap, benchmark };

inline const char* mechanism_name(MechanismKind kind) {
  return kind == MechanismKind::tubetap ? "tubetap" : "benchmark";
}

/// Winners and payments for a single task.
struct TaskOutcome {
  TaskId task = 0;
  std::vector<DeviceId> winners;        // in allocation order
  std::map<DeviceId, Money> payments;   // keyed exactly by winners
  std::size_t winner_count_k = 0;

  Money payment_total() const {
    Money total = 0;
    for (const auto& [d, p] : payments) total += p;
    return total;
  }
};

/// Whole-market result of one mechanism run.
struct MechanismOutcome {
  std::map<TaskId, TaskOutcome> per_task;
  std::map<TaskId, QualitySet> quality_sets;
  SlotAssignment slot_assignment;
  std::vector<std::string> warnings;
};

struct AllocationResult {
  std::vector<DeviceId> winners;  // ascending by bid, ties by id
  std::size_t k = 0;
  std::optional<Money> first_losing_bid;
};

namespace detail {

/// Indices of (bids, ids) sorted ascending by bid, ties to the lower id.
inline std::vector<std::size_t> sort_by_bid(const std::vector<DeviceId>& ids,
                                            const std::vector<Money>& bids) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (bids[a] != bids[b]) return bids[a] < bids[b];
    return ids[a] < ids[b];
  });
  return order;
}

}  // namespace detail

/// Proportional-share allocation: scan the quality devices in ascending bid
/// order and accept the i-th as long as its bid is at most budget / i.
inline AllocationResult tubetap_allocate(const QualitySet& quality,
                                         Money budget) {
  if (quality.members.empty())
    throw EmptyQualitySet("allocation needs at least one quality device");
  if (!(budget > 0)) throw InvalidConfig("budget must be positive");

  const auto order = detail::sort_by_bid(quality.members, quality.member_bids);
  AllocationResult result;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Money bid = quality.member_bids[order[i]];
    if (!(bid <= budget / static_cast<double>(i + 1))) break;
    result.winners.push_back(quality.members[order[i]]);
  }
  result.k = result.winners.size();
  if (result.k < order.size())
    result.first_losing_bid = quality.member_bids[order[result.k]];
  return result;
}

/// Uniform per-winner payment: min(budget / k, first losing bid). When every
/// quality device wins there is no losing bid and the share itself is paid.
inline Money tubetap_payments(std::size_t k, Money budget,
                              std::optional<Money> first_losing_bid) {
  if (k < 1) throw NoWinners("payment rule needs at least one winner");
  const Money share = budget / static_cast<double>(k);
  Money pay = first_losing_bid ? std::min(share, *first_losing_bid) : share;
  // keep the summed payout within the budget even when the division
  // rounded up; the sum is formed the same way a caller would form it
  const auto total = [k](Money p) {
    Money sum = 0;
    for (std::size_t i = 0; i < k; ++i) sum += p;
    return sum;
  };
  while (total(pay) > budget) pay = std::nextafter(pay, 0.0);
  return pay;
}

/// Full per-task run of the allocation and payment rule. Zero winners is a
/// valid outcome (the budget may be too small for even the lowest bid).
inline TaskOutcome run_tubetap_task(TaskId task, const QualitySet& quality,
                                    Money budget) {
  TaskOutcome outcome;
  outcome.task = task;
  if (quality.members.empty()) return outcome;
  const AllocationResult alloc = tubetap_allocate(quality, budget);
  outcome.winners = alloc.winners;
  outcome.winner_count_k = alloc.k;
  if (alloc.k >= 1) {
    const Money pay =
        tubetap_payments(alloc.k, budget, alloc.first_losing_bid);
    for (DeviceId w : alloc.winners) outcome.payments[w] = pay;
  }
  return outcome;
}

/// Comparison mechanism: scan ascending bids against a depleting budget and
/// pay each winner its successor's bid plus epsilon. The last device in the
/// ordering has no successor and can never win.
inline TaskOutcome benchmark_mechanism(TaskId task,
                                       const std::vector<DeviceId>& devices,
                                       const std::vector<Money>& bids,
                                       Money budget, Money epsilon) {
  if (!(budget > 0)) throw InvalidConfig("budget must be positive");
  if (epsilon < 0) throw InvalidConfig("epsilon must be >= 0");

  TaskOutcome outcome;
  outcome.task = task;
  if (devices.empty()) return outcome;

  const auto order = detail::sort_by_bid(devices, bids);
  Money remaining = budget;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const Money pay = bids[order[i + 1]] + epsilon;
    if (pay <= remaining) {
      const DeviceId d = devices[order[i]];
      outcome.winners.push_back(d);
      outcome.payments[d] = pay;
      remaining -= pay;
    }
  }
  outcome.winner_count_k = outcome.winners.size();
  return outcome;
}

/// Budget-feasible maximum-cardinality oracle: the largest k whose k
/// smallest bids sum to at most the budget.
inline std::size_t optimal_winner_count(std::vector<Money> bids,
                                        Money budget) {
  if (!(budget > 0)) throw InvalidConfig("budget must be positive");
  std::sort(bids.begin(), bids.end());
  Money total = 0;
  std::size_t k = 0;
  for (Money b : bids) {
    total += b;
    if (total > budget) break;
    ++k;
  }
  return k;
}

/// Utility summed over all tasks: payment minus true valuation where the
/// device won, zero elsewhere. Can be negative after an overbid-then-win.
inline Money device_utility(const MechanismOutcome& outcome, DeviceId device,
                            const Scenario& scenario) {
  Money total = 0;
  for (const auto& [task, task_outcome] : outcome.per_task) {
    const auto it = task_outcome.payments.find(device);
    if (it == task_outcome.payments.end()) continue;
    total += it->second - scenario.devices[device].true_valuations.at(task);
  }
  return total;
}

struct PipelineParams {
  std::size_t r = 3;
  std::size_t r_prime = SIZE_MAX;  // clamped to the available peers
  GraderModel model = GraderModel::truthful();
  MechanismKind mechanism = MechanismKind::tubetap;
  Money epsilon = 10.0;
};

/// Seed for one experiment round. Depends only on the base seed and the
/// round index, never on the mechanism or bid profile, so paired runs see
/// identical grading randomness.
inline std::uint64_t round_seed(std::uint64_t base, std::size_t round) {
  return derive_seed(base, 0x524e44, round);
}

/// Runs every task slot by slot: peer grading first, then the allocation
/// and payment rule of the selected mechanism. Tasks whose grading cannot
/// run (nobody interested, or no peer left to grade) end up with an empty
/// outcome and a warning instead of failing the whole run.
inline MechanismOutcome run_main_routine(const Scenario& scenario,
                                         const BidProfile& bids,
                                         const SlotAssignment& slots,
                                         const PipelineParams& params,
                                         std::uint64_t seed) {
  std::map<DeviceId, double> qualities;
  for (const Device& d : scenario.devices) qualities[d.id] = d.latent_quality;

  // tasks grouped by slot, ascending within each slot
  std::map<int, std::vector<TaskId>> by_slot;
  for (const Task& t : scenario.tasks) {
    const auto it = slots.slot_of.find(t.id);
    if (it == slots.slot_of.end())
      throw InvalidScenario("task " + std::to_string(t.id) +
                            " has no assigned time slot");
    by_slot[it->second].push_back(t.id);
  }

  MechanismOutcome outcome;
  outcome.slot_assignment = slots;
  for (auto& [slot, tasks] : by_slot) {
    std::sort(tasks.begin(), tasks.end());
    for (TaskId task : tasks) {
      const Money budget = scenario.tasks[task].budget;
      QualitySet quality;
      quality.task = task;
      try {
        const auto interested = interest_set(scenario, task);
        quality = quality_determination(task, interested, bids, qualities,
                                        params.r, params.r_prime, params.model,
                                        derive_seed(seed, task));
      } catch (const EmptyBatch&) {
        outcome.warnings.push_back("task " + std::to_string(task) +
                                   ": no interested devices, skipped");
      } catch (const NoGradersAvailable& e) {
        outcome.warnings.push_back("task " + std::to_string(task) + ": " +
                                   e.what());
      }

      TaskOutcome task_outcome;
      task_outcome.task = task;
      if (!quality.members.empty()) {
        task_outcome =
            params.mechanism == MechanismKind::tubetap
                ? run_tubetap_task(task, quality, budget)
                : benchmark_mechanism(task, quality.members,
                                      quality.member_bids, budget,
                                      params.epsilon);
      }
      outcome.quality_sets[task] = std::move(quality);
      outcome.per_task[task] = std::move(task_outcome);
    }
  }
  return outcome;
}

}  // namespace tubetap
