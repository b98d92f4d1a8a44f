#include "blocklab/metrics.hpp"

#include <stdexcept>

namespace blocklab {

double training_reward(std::span<const double> mean_rewards, int window) {
  if (mean_rewards.empty()) throw std::invalid_argument("training_reward: empty series");
  if (window < 1) throw std::invalid_argument("training_reward: window must be >= 1");
  int n = static_cast<int>(mean_rewards.size());
  int take = std::min(window, n);
  double sum = 0.0;
  for (int i = n - take; i < n; ++i) sum += mean_rewards[i];
  return sum / take;
}

std::optional<int> convergence_iteration(std::span<const double> mean_rewards, double max_reward,
                                         double eps) {
  if (max_reward <= 0.0) throw std::invalid_argument("convergence_iteration: max_reward must be > 0");
  const double bar = max_reward - eps;
  int run = 0;
  for (size_t i = 0; i < mean_rewards.size(); ++i) {
    run = mean_rewards[i] >= bar ? run + 1 : 0;
    if (run == 3) return static_cast<int>(i) - 1;  // 1-based start of the run
  }
  return std::nullopt;
}

}  // namespace blocklab
