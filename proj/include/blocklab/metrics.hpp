#pragma once

#include <optional>
#include <span>

namespace blocklab {

// Mean of the per-iteration mean rewards over the final min(window, length)
// iterations. Throws std::invalid_argument on an empty series or window < 1.
double training_reward(std::span<const double> mean_rewards, int window = 50);

// Smallest 1-based iteration index i such that iterations i, i+1, i+2 all
// have mean reward >= max_reward - eps; absent when no such run exists.
std::optional<int> convergence_iteration(std::span<const double> mean_rewards, double max_reward,
                                         double eps = 0.0);

}  // namespace blocklab
