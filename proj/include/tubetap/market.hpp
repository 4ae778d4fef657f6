#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tubetap/errors.hpp"
#include "tubetap/rng.hpp"

namespace tubetap {

using TaskId = std::uint32_t;
using DeviceId = std::uint32_t;
using Money = double;

/// One task requester with its single task and publicly known budget.
struct Task {
  TaskId id = 0;
  Money budget = 0;  // strictly positive
};

/// A task executer. Valuations are defined exactly on the interest set and
/// are private to the device; `latent_quality` drives the simulated peer
/// grading (it is never read by the mechanisms themselves).
struct Device {
  DeviceId id = 0;
  std::vector<TaskId> interests;           // ascending, no duplicates
  std::map<TaskId, Money> true_valuations; // keyed exactly by interests
  double latent_quality = 0.0;             // in [0, 1]
};

/// Reported bids, one entry per (device, task) interest pair. Deviations
/// make this differ from the devices' true valuations.
class BidProfile {
 public:
  Money at(DeviceId device, TaskId task) const {
    const auto it = bids_.find({device, task});
    if (it == bids_.end()) {
      throw UnknownPair("no bid for device " + std::to_string(device) +
                        " on task " + std::to_string(task));
    }
    return it->second;
  }

  bool contains(DeviceId device, TaskId task) const {
    return bids_.count({device, task}) > 0;
  }

  void set(DeviceId device, TaskId task, Money bid) {
    bids_[{device, task}] = bid;
  }

  std::size_t size() const { return bids_.size(); }

  const std::map<std::pair<DeviceId, TaskId>, Money>& entries() const {
    return bids_;
  }

  bool operator==(const BidProfile&) const = default;

 private:
  std::map<std::pair<DeviceId, TaskId>, Money> bids_;
};

/// How valuations and budgets are drawn.
struct DistributionSpec {
  enum class Kind { uniform, normal };
  Kind kind = Kind::uniform;
  Money uniform_lo = 80.0;
  Money uniform_hi = 150.0;
  Money normal_mean = 110.0;
  Money normal_std = 15.0;
  Money budget_lo = 400.0;
  Money budget_hi = 600.0;

  void validate() const {
    if (kind == Kind::uniform && !(uniform_lo < uniform_hi))
      throw InvalidConfig("bid range requires lo < hi");
    if (kind == Kind::normal && !(normal_std > 0))
      throw InvalidConfig("normal bid distribution requires std > 0");
    if (!(budget_lo < budget_hi))
      throw InvalidConfig("budget range requires lo < hi");
  }
};

/// A full market instance: tasks, devices, and the truthful bid profile.
struct Scenario {
  std::vector<Task> tasks;
  std::vector<Device> devices;
  BidProfile truthful_bids;  // equal to the true valuations
  std::uint64_t seed = 0;
  DistributionSpec distribution;

  std::size_t task_count() const { return tasks.size(); }
  std::size_t device_count() const { return devices.size(); }
};

/// Devices interested in `task`, ascending by id.
inline std::vector<DeviceId> interest_set(const Scenario& scenario,
                                          TaskId task) {
  if (task >= scenario.tasks.size())
    throw UnknownTask("task " + std::to_string(task) + " does not exist");
  std::vector<DeviceId> out;
  for (const Device& d : scenario.devices) {
    if (std::binary_search(d.interests.begin(), d.interests.end(), task))
      out.push_back(d.id);
  }
  return out;
}

/// Non-fatal model checks: the setting assumes many more devices than
/// tasks, and a task nobody is interested in can never be served.
inline std::vector<std::string> scenario_warnings(const Scenario& scenario) {
  std::vector<std::string> warnings;
  if (scenario.device_count() < scenario.task_count())
    warnings.push_back("device count " +
                       std::to_string(scenario.device_count()) +
                       " is below task count " +
                       std::to_string(scenario.task_count()) +
                       "; the model assumes many more devices than tasks");
  for (const Task& t : scenario.tasks) {
    if (interest_set(scenario, t.id).empty())
      warnings.push_back("task " + std::to_string(t.id) +
                         " has no interested devices (degenerate)");
  }
  return warnings;
}

namespace detail {

inline Money draw_valuation(const DistributionSpec& dist, Rng& rng) {
  if (dist.kind == DistributionSpec::Kind::uniform)
    return rng.uniform(dist.uniform_lo, dist.uniform_hi);
  // Truncate by resampling: bids must stay positive. With the default
  // mean/std the resample almost never triggers.
  for (;;) {
    const Money v = rng.normal(dist.normal_mean, dist.normal_std);
    if (v >= 1.0) return v;
  }
}

}  // namespace detail

/// Generates a reproducible random market: n tasks, m devices, each device
/// interested in a uniform [interest_lo, interest_hi]-sized subset of tasks.
inline Scenario generate_scenario(std::size_t n, std::size_t m,
                                  const DistributionSpec& dist,
                                  std::size_t interest_lo,
                                  std::size_t interest_hi,
                                  std::uint64_t seed) {
  if (n < 1) throw InvalidConfig("need at least one task requester");
  if (m < 1) throw InvalidConfig("need at least one device");
  if (interest_lo < 1 || interest_lo > interest_hi || interest_hi > n)
    throw InvalidConfig("interest set bounds must satisfy 1 <= lo <= hi <= n");
  dist.validate();

  Scenario scenario;
  scenario.seed = seed;
  scenario.distribution = dist;

  Rng budget_rng(derive_seed(seed, 0x42554447));  // budgets
  scenario.tasks.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    scenario.tasks.push_back(
        {static_cast<TaskId>(j),
         budget_rng.uniform(dist.budget_lo, dist.budget_hi)});
  }

  std::vector<TaskId> all_tasks(n);
  for (std::size_t j = 0; j < n; ++j) all_tasks[j] = static_cast<TaskId>(j);

  scenario.devices.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Rng rng(derive_seed(seed, 0x44455649, i));  // per-device stream
    Device dev;
    dev.id = static_cast<DeviceId>(i);
    const auto size = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(interest_lo),
                        static_cast<std::int64_t>(interest_hi)));
    dev.interests = rng.sample_without_replacement(all_tasks, size);
    std::sort(dev.interests.begin(), dev.interests.end());
    for (TaskId t : dev.interests) {
      const Money v = detail::draw_valuation(dist, rng);
      dev.true_valuations[t] = v;
      scenario.truthful_bids.set(dev.id, t, v);
    }
    dev.latent_quality = rng.uniform01();
    scenario.devices.push_back(std::move(dev));
  }
  return scenario;
}

/// Copy of `bids` with exactly one entry replaced.
inline BidProfile apply_deviation(const BidProfile& bids, DeviceId device,
                                  TaskId task, Money new_bid) {
  if (!bids.contains(device, task))
    throw UnknownPair("device " + std::to_string(device) +
                      " is not interested in task " + std::to_string(task));
  if (!(new_bid > 0)) throw InvalidConfig("bids must be positive");
  BidProfile out = bids;
  out.set(device, task, new_bid);
  return out;
}

/// A seeded ceil(fraction * m)-subset of devices inflates every bid to
/// v * (1 + inflation); the rest report truthfully.
inline BidProfile apply_mass_inflation(const Scenario& scenario,
                                       double fraction, double inflation,
                                       std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0)
    throw InvalidConfig("fraction must lie in [0, 1]");
  if (inflation < 0.0) throw InvalidConfig("inflation must be >= 0");

  BidProfile out = scenario.truthful_bids;
  const auto count = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(scenario.device_count())));
  if (count == 0 || inflation == 0.0) return out;

  std::vector<DeviceId> ids;
  ids.reserve(scenario.device_count());
  for (const Device& d : scenario.devices) ids.push_back(d.id);
  Rng rng(derive_seed(seed, 0x494e464c));
  const std::vector<DeviceId> inflators =
      rng.sample_without_replacement(ids, count);

  for (DeviceId id : inflators) {
    const Device& dev = scenario.devices[id];
    for (const auto& [task, v] : dev.true_valuations)
      out.set(id, task, v * (1.0 + inflation));
  }
  return out;
}

}  // namespace tubetap
