#include "support/engine_check.hpp"

#include <bit>
#include <sstream>

#include "support/naive_sim.hpp"

namespace blocklab::testutil {

ExactnessReport check_engine_exactness(const GameEnv& env, long min_transitions, uint64_t seed) {
  ExactnessReport rep;
  const Catalog& cat = env.catalog();
  Rng rng(seed);
  auto fail = [&rep](const std::string& msg) {
    ++rep.mismatches;
    if (rep.first_error.empty()) rep.first_error = msg;
  };

  while (rep.transitions < min_transitions) {
    GameState s = env.new_game(rng());
    int episode_reward = 0;
    while (!s.terminal) {
      naive::Grid grid = naive::grid_from_bitboard(s.board, env.rows(), env.cols());

      std::vector<Action> fast = env.legal_actions(s);
      std::vector<Action> slow = naive::legal_actions(grid, s.holding, cat);
      if (fast != slow) {
        fail("legal action sets differ");
        break;
      }
      if (fast.empty()) {
        fail("non-terminal state with no legal action");
        break;
      }

      const Action a = fast[uniform_index(rng, fast.size())];
      int before_cells = std::popcount(s.board);
      int shape_size = cat.shapes[s.holding[a.slot]].size();
      naive::PlaceOutcome expected = naive::place_and_clear(
          grid, cat.shapes[s.holding[a.slot]], a.row, a.col, env.rules().clear_axes);

      auto [after, reward] = env.apply_action(s, a);
      int uncapped = expected.lines;
      int capped = std::min(s.score + uncapped, env.rules().reward_cap) - s.score;
      if (reward != capped) fail("reward mismatch");
      if (after.board != naive::bitboard_from_grid(expected.grid)) fail("cleared board mismatch");
      if (std::popcount(after.board) != before_cells + shape_size - expected.cells_removed)
        fail("conservation violated");
      // No-residue: a cleared afterstate board holds no full line.
      {
        naive::Grid g2 = naive::grid_from_bitboard(after.board, env.rows(), env.cols());
        for (int r = 0; r < env.rows(); ++r) {
          bool full = true;
          for (int c = 0; c < env.cols(); ++c)
            if (!g2[r][c]) full = false;
          if (full && env.rules().clear_axes != ClearAxes::kCols) fail("full row in afterstate");
        }
        for (int c = 0; c < env.cols(); ++c) {
          bool full = true;
          for (int r = 0; r < env.rows(); ++r)
            if (!g2[r][c]) full = false;
          if (full && env.rules().clear_axes != ClearAxes::kRows) fail("full column in afterstate");
        }
      }

      // Queue discipline across apply_action + apply_chance.
      std::vector<ChanceOutcome> outs = env.chance_outcomes(after);
      double psum = 0.0;
      for (size_t i = 0; i < outs.size(); ++i) {
        psum += outs[i].probability;
        if (outs[i].shape_id != static_cast<int>(i)) fail("chance outcome ids not dense");
        if (outs[i].probability != cat.draw_weights[i]) fail("chance probability mismatch");
      }
      if (std::abs(psum - 1.0) > 1e-12) fail("chance probabilities do not sum to 1");

      int drawn = env.sample_shape(rng);
      GameState next = env.apply_chance(after, outs[drawn]);
      if (static_cast<int>(next.holding.size()) != env.rules().h) fail("holding size broken");
      if (static_cast<int>(next.preview.size()) != env.rules().p) fail("preview size broken");
      if (env.rules().p > 0) {
        // FIFO: old preview[0] moved into the back of holding, drawn at back of preview.
        if (!s.preview.empty() && next.holding.back() != s.preview.front())
          fail("preview head did not enter holding");
        if (next.preview.back() != static_cast<uint8_t>(drawn)) fail("drawn not at preview back");
      } else if (next.holding.back() != static_cast<uint8_t>(drawn)) {
        fail("drawn not appended to holding");
      }
      episode_reward += reward;
      if (next.score != s.score + reward) fail("score ledger mismatch");
      if (next.score > env.rules().reward_cap) fail("score exceeds cap");
      if (next.score >= env.rules().reward_cap && !next.terminal) fail("cap did not end episode");

      ++rep.transitions;
      s = std::move(next);
      if (rep.mismatches > 0) break;
    }
    if (rep.mismatches == 0 && s.score != episode_reward)
      fail("episode score != sum of rewards");
    if (rep.mismatches > 0) break;
  }
  return rep;
}

}  // namespace blocklab::testutil
