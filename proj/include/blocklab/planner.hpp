#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blocklab/engine.hpp"
#include "blocklab/evaluator.hpp"

namespace blocklab {

struct SearchConfig {
  int simulations = 16;       // n: total simulation budget per move
  int max_candidates = 4;     // m: root candidates for Gumbel-Top-k
  double c_visit = 50.0;
  double c_scale = 1.0;
  int max_tree_depth = 0;     // 0 = 10 * board area
  double gumbel_scale = 1.0;  // test hook: 0 zeroes the root noise
  bool collect_tree_stats = false;
};

struct HalvingPhase {
  int candidates = 0;
  int visits_per_candidate = 0;
};

// ceil(log2(m)) phases; each phase gives every surviving candidate
// floor(n / (phases * count)) visits, at least 1 while budget remains;
// survivors halve (ceil) each phase; leftover budget goes to the final
// phase. Total never exceeds n.
std::vector<HalvingPhase> sequential_halving_schedule(int n, int m);

// (c_visit + max_child_visits) * c_scale * q_norm; monotone in q_norm.
double sigma_transform(double q_norm, int max_child_visits, const SearchConfig& cfg);

// Indices of the min(m, #finite) largest entries of logits + Gumbel noise,
// best first. Entries of -inf are never selected; throws if all are.
std::vector<int> gumbel_top_m(std::span<const double> masked_logits, int m, Rng& rng,
                              double gumbel_scale = 1.0,
                              std::vector<double>* gumbels_out = nullptr);

// Core of the deterministic non-root selection rule: argmax over actions of
// improved_policy[i] - visits[i] / (1 + sum(visits)), lowest index on ties.
int visit_matching_argmax(std::span<const double> improved_policy, std::span<const int> visits);

struct RootActionInfo {
  int action_index = 0;
  double logit = 0.0;
  double gumbel = 0.0;
  int visits = 0;
  double q = 0.0;           // backed-up mean, in reward_cap units (0 when unvisited)
  double completed_q = 0.0; // min-max normalized; root value estimate when unvisited
  bool candidate = false;   // selected by Gumbel-Top-k
};

struct TreeStats {
  int decision_nodes = 0;
  int chance_nodes = 0;
  bool alternation_ok = true;
  double max_backup_error = 0.0;  // |Q - mean(logged backups)| over all edges
};

struct SearchResult {
  Action chosen;
  int chosen_index = 0;
  std::vector<double> policy_target;  // action_space entries, zeros on illegal
  double root_value = 0.0;            // completed-Q weighted, reward_cap units
  std::vector<RootActionInfo> root_actions;
  std::vector<HalvingPhase> schedule;
  int simulations = 0;      // leaf evaluations performed (== schedule total)
  int evaluator_calls = 0;
  std::optional<TreeStats> tree_stats;
};

// One Gumbel root-selection search over the exact afterstate/chance tree.
// Chance outcomes are sampled with their exact probabilities; rewards and
// values are normalized by reward_cap and backed up with gamma = 1;
// terminal leaves back up exactly 0. The chosen action is deterministic
// given (state, evaluator, cfg, rng state). Appends a per-move text trace
// when `trace` is non-null.
SearchResult search(const GameState& state, const Evaluator& evaluator, const GameEnv& env,
                    const SearchConfig& cfg, Rng& rng, std::string* trace = nullptr);

}  // namespace blocklab
