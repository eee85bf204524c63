#pragma once

#include <cstddef>
#include <optional>

#include "riskcb/types.hpp"

namespace rcb {

/// One online interaction.
struct RoundRecord {
  std::size_t t = 0;           ///< 1-based round
  std::size_t context_id = 0;  ///< dataset row served this round
  Action action;
  /// Probability (finite), density w.r.t. the reference measure (interval,
  /// accepted draw) or atom mass (interval, atom draw).
  double weight = 1.0;
  bool atom = false;
  double reward = 0.0;  ///< natural reward scale of the environment
  double loss = 0.0;    ///< reward mapped to [0, 1]
  double fhat = 0.0;    ///< predicted loss at the chosen action
  Action ahat;
  double gamma = 0.0;
  double label = 0.0;  ///< ground truth (label, price or demand) when the environment has one
  std::size_t num_actions = 0;  ///< 0 for interval actions
  /// sum_a p(a) rho(a) - min_a rho(a), when the environment knows its true risks.
  std::optional<double> expected_regret;
};

}  // namespace rcb
