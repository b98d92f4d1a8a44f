#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "blocklab/engine.hpp"

namespace blocklab {

struct OracleEntry {
  uint64_t state_hash = 0;
  double value = 0.0;  // exact expected remaining return, in [0, cap - score]
  std::optional<Action> best;
  std::vector<std::pair<Action, double>> action_values;
};

// Exact expectimax over the stochastic game, memoized by state hash. Only
// usable on tiny configurations; the memo budget aborts the solve when the
// state space is larger than expected. Hash collisions are the only
// correctness caveat: at the default budget of 1e7 entries the collision
// probability is below 1e-5 and the reference worlds stay far under it.
class ExpectimaxSolver {
 public:
  explicit ExpectimaxSolver(const GameEnv& env, size_t memo_budget = 10'000'000);

  double value(const GameState& state);
  OracleEntry solve(const GameState& state);  // per-action values and best action
  size_t memo_size() const { return memo_.size(); }

  // CSV: state_hash,value,best_slot,best_row,best_col (sorted by hash).
  std::string export_csv() const;

 private:
  struct MemoEntry {
    double value = 0.0;
    int8_t best_slot = -1, best_row = -1, best_col = -1;
  };

  const MemoEntry& solve_entry(const GameState& state);

  const GameEnv& env_;
  size_t budget_;
  std::unordered_map<uint64_t, MemoEntry> memo_;
};

// Named tiny worlds solvable exactly, cited by tests and the CLI.
//   oracle-2x2-mono : 2x2 board, single 1x1 block, h=1, p=0, cap 1
//   oracle-4x4-mixed: 4x4 board, {1x2, 2x1, 2x2}, h=1, p=0, cap 3
RuleSet oracle_world(std::string_view name);

// Uniformly random legal play; returns (mean, population std) of final
// scores over the given number of episodes.
std::pair<double, double> random_baseline(const GameEnv& env, int episodes, uint64_t seed);

}  // namespace blocklab
