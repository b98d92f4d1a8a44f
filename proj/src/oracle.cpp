#include "blocklab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace blocklab {

ExpectimaxSolver::ExpectimaxSolver(const GameEnv& env, size_t memo_budget)
    : env_(env), budget_(memo_budget) {}

const ExpectimaxSolver::MemoEntry& ExpectimaxSolver::solve_entry(const GameState& state) {
  uint64_t key = env_.hash_state(state);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  if (memo_.size() >= budget_)
    throw std::runtime_error("expectimax memo budget exhausted at " +
                             std::to_string(memo_.size()) + " entries");

  MemoEntry entry;
  if (!state.terminal) {
    std::vector<Action> actions = env_.legal_actions(state);
    std::vector<ChanceOutcome> outcomes;
    double best = -1.0;
    for (const Action& a : actions) {
      auto [after, reward] = env_.apply_action(state, a);
      if (outcomes.empty()) outcomes = env_.chance_outcomes(after);
      double v = reward;
      for (const ChanceOutcome& o : outcomes)
        v += o.probability * solve_entry(env_.apply_chance(after, o)).value;
      if (v > best) {
        best = v;
        entry.value = v;
        entry.best_slot = static_cast<int8_t>(a.slot);
        entry.best_row = static_cast<int8_t>(a.row);
        entry.best_col = static_cast<int8_t>(a.col);
      }
    }
  }
  return memo_.emplace(key, entry).first->second;
}

double ExpectimaxSolver::value(const GameState& state) { return solve_entry(state).value; }

OracleEntry ExpectimaxSolver::solve(const GameState& state) {
  OracleEntry out;
  out.state_hash = env_.hash_state(state);
  const MemoEntry& e = solve_entry(state);
  out.value = e.value;
  if (e.best_slot >= 0) out.best = Action{e.best_slot, e.best_row, e.best_col};
  if (!state.terminal) {
    for (const Action& a : env_.legal_actions(state)) {
      auto [after, reward] = env_.apply_action(state, a);
      double v = reward;
      for (const ChanceOutcome& o : env_.chance_outcomes(after))
        v += o.probability * solve_entry(env_.apply_chance(after, o)).value;
      out.action_values.emplace_back(a, v);
    }
  }
  return out;
}

std::string ExpectimaxSolver::export_csv() const {
  std::vector<std::pair<uint64_t, MemoEntry>> rows(memo_.begin(), memo_.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::ostringstream os;
  os << "state_hash,value,best_slot,best_row,best_col\n";
  for (const auto& [hash, e] : rows) {
    os << hash << ",";
    char buf[32];
    snprintf(buf, sizeof buf, "%.12g", e.value);
    os << buf << "," << int(e.best_slot) << "," << int(e.best_row) << "," << int(e.best_col)
       << "\n";
  }
  return os.str();
}

RuleSet oracle_world(std::string_view name) {
  RuleSet r;
  r.h = 1;
  r.p = 0;
  if (name == "oracle-2x2-mono") {
    r.board_rows = r.board_cols = 2;
    r.reward_cap = 1;
    r.catalog = "mono1";
  } else if (name == "oracle-4x4-mixed") {
    r.board_rows = r.board_cols = 4;
    r.reward_cap = 3;
    r.catalog = "mixed3";
  } else {
    throw std::invalid_argument("unknown oracle world '" + std::string(name) + "'");
  }
  return validate_ruleset(r);
}

std::pair<double, double> random_baseline(const GameEnv& env, int episodes, uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("random_baseline: episodes must be >= 1");
  double sum = 0.0, sum_sq = 0.0;
  for (int e = 0; e < episodes; ++e) {
    Rng rng(derive_seed(seed, e));
    GameState s = env.new_game(rng);
    while (!s.terminal) {
      std::vector<Action> actions = env.legal_actions(s);
      const Action& a = actions[uniform_index(rng, actions.size())];
      s = env.step(s, a, rng).state;
    }
    sum += s.score;
    sum_sq += static_cast<double>(s.score) * s.score;
  }
  double mean = sum / episodes;
  double var = std::max(0.0, sum_sq / episodes - mean * mean);
  return {mean, std::sqrt(var)};
}

}  // namespace blocklab
