#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "tubetap/errors.hpp"
#include "tubetap/market.hpp"
#include "tubetap/rng.hpp"

namespace tubetap {

/// One peer's ranking over a batch of executed tasks, best first.
struct RankedList {
  DeviceId grader = 0;
  std::vector<DeviceId> ranking;
};

/// Per-task result of peer grading: the devices judged best per batch,
/// in batch order, together with their bids on the task. The batches
/// themselves are kept for diagnostics; they partition the interested set.
struct QualitySet {
  TaskId task = 0;
  std::vector<DeviceId> members;
  std::vector<Money> member_bids;  // aligned with members
  std::vector<std::vector<DeviceId>> batches;
};

/// How simulated peers grade. Truthful peers rank by latent quality;
/// noisy peers rank by quality plus an independent Gaussian perturbation.
struct GraderModel {
  enum class Kind { truthful, noisy };
  Kind kind = Kind::truthful;
  double noise_std = 0.0;

  static GraderModel truthful() { return {Kind::truthful, 0.0}; }
  static GraderModel noisy(double std) { return {Kind::noisy, std}; }
};

/// One ranking per grader over `batch`. Perturbations are seeded per grader
/// so the set of graders, not their order, determines the outcome.
inline std::vector<RankedList> simulate_rankings(
    const std::vector<DeviceId>& batch, const std::vector<DeviceId>& graders,
    const std::map<DeviceId, double>& qualities, const GraderModel& model,
    std::uint64_t seed) {
  if (batch.empty()) throw EmptyBatch("cannot rank an empty batch");

  std::vector<DeviceId> canonical = batch;
  std::sort(canonical.begin(), canonical.end());
  for (DeviceId g : graders) {
    if (std::binary_search(canonical.begin(), canonical.end(), g))
      throw InvalidConfig("grader " + std::to_string(g) +
                          " appears in the batch it grades");
  }

  std::vector<RankedList> out;
  out.reserve(graders.size());
  for (DeviceId g : graders) {
    Rng rng(derive_seed(seed, g));
    std::vector<std::pair<double, DeviceId>> scored;
    scored.reserve(canonical.size());
    for (DeviceId d : canonical) {
      double score = qualities.at(d);
      if (model.kind == GraderModel::Kind::noisy && model.noise_std > 0.0)
        score += rng.normal(0.0, model.noise_std);
      scored.emplace_back(score, d);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;  // ties to the lower id
    });
    RankedList list;
    list.grader = g;
    for (const auto& [score, d] : scored) list.ranking.push_back(d);
    out.push_back(std::move(list));
  }
  return out;
}

/// The device ranked first by the most graders; ties go to the lower id.
inline DeviceId plurality_winner(const std::vector<RankedList>& rankings) {
  if (rankings.empty()) throw NoRankings("no rankings to aggregate");
  std::map<DeviceId, int> first_places;
  for (const RankedList& r : rankings) first_places[r.ranking.front()] += 1;
  DeviceId winner = first_places.begin()->first;
  int best = first_places.begin()->second;
  for (const auto& [device, count] : first_places) {
    if (count > best) {  // map order already prefers the lower id on ties
      winner = device;
      best = count;
    }
  }
  return winner;
}

/// Iterative peer grading for one task: seeded batches of up to r ungraded
/// devices are ranked by up to r_prime peers drawn from the rest of the
/// interested set; each batch contributes its plurality winner.
inline QualitySet quality_determination(TaskId task,
                                        const std::vector<DeviceId>& interested,
                                        const BidProfile& bids,
                                        const std::map<DeviceId, double>& qualities,
                                        std::size_t r, std::size_t r_prime,
                                        const GraderModel& model,
                                        std::uint64_t seed) {
  if (interested.empty())
    throw EmptyBatch("no interested devices for task " + std::to_string(task));
  if (r < 1 || r_prime < 1)
    throw InvalidConfig("batch size r and grader count r_prime must be >= 1");

  std::vector<DeviceId> pool = interested;
  std::sort(pool.begin(), pool.end());
  const std::set<DeviceId> everyone(pool.begin(), pool.end());

  QualitySet result;
  result.task = task;
  Rng rng(derive_seed(seed, 0x51444d));
  std::uint64_t iteration = 0;
  while (!pool.empty()) {
    std::vector<DeviceId> batch =
        rng.sample_without_replacement(pool, std::min(r, pool.size()));
    std::sort(batch.begin(), batch.end());

    std::vector<DeviceId> candidates;
    std::set_difference(everyone.begin(), everyone.end(), batch.begin(),
                        batch.end(), std::back_inserter(candidates));
    if (candidates.empty())
      throw NoGradersAvailable(
          "task " + std::to_string(task) + ": the batch covers all " +
          std::to_string(interested.size()) +
          " interested devices, leaving no peer to grade it");
    std::vector<DeviceId> graders = rng.sample_without_replacement(
        candidates, std::min(r_prime, candidates.size()));
    std::sort(graders.begin(), graders.end());

    const auto rankings = simulate_rankings(batch, graders, qualities, model,
                                            derive_seed(seed, iteration));
    const DeviceId winner = plurality_winner(rankings);
    result.members.push_back(winner);
    result.member_bids.push_back(bids.at(winner, task));
    result.batches.push_back(batch);

    std::vector<DeviceId> rest;
    std::set_difference(pool.begin(), pool.end(), batch.begin(), batch.end(),
                        std::back_inserter(rest));
    pool = std::move(rest);
    ++iteration;
  }
  return result;
}

}  // namespace tubetap
