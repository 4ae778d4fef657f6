#pragma once

#include <stdexcept>
#include <string>

namespace tubetap {

struct InvalidConfig : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidScenario : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownTask : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct UnknownPair : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Phase 1 of the slot heuristic stalled: every remaining task has at least
/// `kappa` live neighbours. Carries a kappa that is guaranteed to work.
struct GraphNotReducible : std::runtime_error {
  GraphNotReducible(int kappa, int suggested)
      : std::runtime_error("time slot allocation stalled with kappa=" +
                           std::to_string(kappa) +
                           "; every remaining task has >= kappa neighbours "
                           "(try kappa=" +
                           std::to_string(suggested) + ")"),
        kappa_used(kappa),
        suggested_kappa(suggested) {}
  int kappa_used;
  int suggested_kappa;
};

struct EmptyBatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NoRankings : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NoGradersAvailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyQualitySet : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NoWinners : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidProbability : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace tubetap
