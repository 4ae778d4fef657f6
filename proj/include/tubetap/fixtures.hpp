#pragma once

#include <string>
#include <vector>

#include "tubetap/market.hpp"
#include "tubetap/mechanisms.hpp"

namespace tubetap::fixtures {

// Labels used in the bundled walkthrough market: task Tn / device En carry
// 1-based names, internal ids are 0-based.
constexpr TaskId T(int n) { return static_cast<TaskId>(n - 1); }
constexpr DeviceId E(int n) { return static_cast<DeviceId>(n - 1); }

/// Grading seed for the walkthrough market, chosen so the nine devices of
/// T1 split into batches that keep the three top-quality devices (E3, E4,
/// E6) apart; each then tops its own batch and joins the quality set.
constexpr std::uint64_t kExampleSeed = 2;

struct Fixture {
  std::string name;
  Scenario scenario;
  PipelineParams params;
  std::uint64_t seed = kExampleSeed;
};

namespace detail {

struct InterestSpec {
  int device;  // 1-based label
  Money bid;
};

inline void add_task(Scenario& scenario, int label, Money budget,
                     const std::vector<InterestSpec>& interests) {
  const TaskId task = T(label);
  scenario.tasks.push_back({task, budget});
  for (const InterestSpec& spec : interests) {
    Device& dev = scenario.devices[E(spec.device)];
    dev.interests.push_back(task);
    dev.true_valuations[task] = spec.bid;
    scenario.truthful_bids.set(dev.id, task, spec.bid);
  }
}

/// Five tasks, twenty devices. T1 and T3 share no device; every other task
/// pair shares at least one. T1 has nine interested devices whose grading
/// yields the quality set {E3, E4, E6} with bids {20, 10, 30}.
inline Scenario example_market(Money e6_bid_on_t1) {
  Scenario scenario;
  scenario.seed = kExampleSeed;
  scenario.devices.resize(20);
  for (int i = 1; i <= 20; ++i) scenario.devices[E(i)].id = E(i);

  const double qualities[20] = {0.30, 0.55, 0.95, 0.90, 0.45, 0.85, 0.62,
                                0.38, 0.71, 0.25, 0.52, 0.68, 0.33, 0.47,
                                0.58, 0.74, 0.41, 0.29, 0.66, 0.36};
  for (int i = 1; i <= 20; ++i)
    scenario.devices[E(i)].latent_quality = qualities[i - 1];

  add_task(scenario, 1, 50.0,
           {{1, 18}, {3, 20}, {4, 10}, {6, e6_bid_on_t1}, {8, 25},
            {9, 12}, {11, 40}, {15, 22}, {18, 35}});
  add_task(scenario, 2, 25.0,
           {{1, 9}, {2, 12}, {10, 15}, {12, 8}, {13, 20}, {14, 11}});
  add_task(scenario, 3, 30.0, {{12, 14}, {16, 9}, {19, 11}});
  add_task(scenario, 4, 60.0,
           {{5, 22}, {8, 18}, {13, 25}, {16, 15}, {17, 30}, {20, 12}});
  add_task(scenario, 5, 15.0,
           {{7, 6}, {9, 9}, {14, 12}, {17, 8}, {19, 10}});
  return scenario;
}

/// One task with budget 100 and four devices bidding 10/20/30/100.
/// Grading with r = 1 puts every device in the quality set, which exposes
/// the benchmark mechanism's profitable overbid (10 -> 25 gains 10).
inline Scenario benchmark_counterexample_market() {
  Scenario scenario;
  scenario.seed = kExampleSeed;
  scenario.devices.resize(4);
  const Money bids[4] = {10, 20, 30, 100};
  const double qualities[4] = {0.9, 0.7, 0.5, 0.3};
  for (int i = 0; i < 4; ++i) {
    Device& dev = scenario.devices[i];
    dev.id = static_cast<DeviceId>(i);
    dev.latent_quality = qualities[i];
  }
  add_task(scenario, 1, 100.0, {{1, bids[0]}, {2, bids[1]}, {3, bids[2]},
                                {4, bids[3]}});
  return scenario;
}

}  // namespace detail

inline std::vector<std::string> fixture_names() {
  return {"example1", "example2", "example3", "fig5", "bm-counterexample"};
}

/// Bundled test markets, addressable from the CLI by name. The example1/2/3
/// names all resolve to the same walkthrough market (graph, grading, and
/// allocation views of it); fig5 lowers E6's bid so the first losing bid
/// caps the payment; bm-counterexample is the benchmark overbid witness.
inline Fixture get_fixture(const std::string& name) {
  Fixture fixture;
  fixture.name = name;
  fixture.params.model = GraderModel::truthful();
  fixture.params.r = 3;
  if (name == "example1" || name == "example2" || name == "example3") {
    fixture.scenario = detail::example_market(30.0);
  } else if (name == "fig5") {
    fixture.scenario = detail::example_market(21.0);
  } else if (name == "bm-counterexample") {
    fixture.scenario = detail::benchmark_counterexample_market();
    fixture.params.r = 1;
  } else {
    throw InvalidConfig("unknown fixture '" + name +
                        "'; available: example1 example2 example3 fig5 "
                        "bm-counterexample");
  }
  return fixture;
}

}  // namespace tubetap::fixtures
