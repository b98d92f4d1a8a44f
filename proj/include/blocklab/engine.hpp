#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "blocklab/rng.hpp"
#include "blocklab/ruleset.hpp"

namespace blocklab {

using Bitboard = uint64_t;  // bit r*cols+c set = cell occupied

struct GameState {
  Bitboard board = 0;
  std::vector<uint8_t> holding;  // h shape ids, the blocks placeable now
  std::vector<uint8_t> preview;  // p shape ids, FIFO (front enters holding next)
  int score = 0;
  bool terminal = false;

  bool operator==(const GameState&) const = default;
};

struct Action {
  int slot = 0;  // index into holding
  int row = 0;   // anchor for the shape's (0,0) offset
  int col = 0;

  bool operator==(const Action&) const = default;
};

// Post-placement, post-clear position with exactly one random draw pending.
struct Afterstate {
  Bitboard board = 0;
  std::vector<uint8_t> holding;  // used slot removed; preview head appended when p > 0
  std::vector<uint8_t> preview;  // shifted left by one when p > 0
  int score = 0;
  int pending_draws = 1;
};

struct ChanceOutcome {
  int shape_id = 0;
  double probability = 0.0;
};

struct StepResult {
  GameState state;
  int reward = 0;
  int drawn_shape = 0;
};

// Exact game dynamics for one (rules, catalog) pair. Immutable after
// construction; placement masks and hash keys are precomputed. Safe for
// shared read access across threads.
class GameEnv {
 public:
  GameEnv(RuleSet rules, Catalog catalog);
  explicit GameEnv(const RuleSet& rules) : GameEnv(validate_ruleset(rules), catalog_for(rules)) {}

  const RuleSet& rules() const { return rules_; }
  const Catalog& catalog() const { return catalog_; }
  int rows() const { return rules_.board_rows; }
  int cols() const { return rules_.board_cols; }
  int board_cells() const { return rows() * cols(); }
  int action_space() const { return rules_.h * board_cells(); }
  int feature_length() const {
    return board_cells() + (rules_.h + rules_.p) * catalog_.size();
  }

  int action_index(const Action& a) const {
    return a.slot * board_cells() + a.row * cols() + a.col;
  }
  Action action_from_index(int idx) const;

  // Empty board, holding and preview filled by h+p draws from the rng.
  GameState new_game(Rng& rng) const;
  GameState new_game(uint64_t seed) const;

  std::vector<Action> legal_actions(const GameState& state) const;
  bool has_legal_action(const GameState& state) const;
  bool is_legal(const GameState& state, const Action& a) const;

  // Places the block, clears all simultaneously full rows/columns (per
  // clear_axes), removes the used holding slot and shifts the preview.
  // Reward = lines cleared, truncated so score never exceeds reward_cap.
  // Throws std::invalid_argument on an illegal action.
  std::pair<Afterstate, int> apply_action(const GameState& state, const Action& a) const;

  // One entry per catalog shape with its draw weight.
  std::vector<ChanceOutcome> chance_outcomes(const Afterstate& as) const;

  // Appends the drawn shape (to preview, or directly to holding when p = 0)
  // and recomputes the terminal flag.
  GameState apply_chance(const Afterstate& as, const ChanceOutcome& o) const;

  int sample_shape(Rng& rng) const;  // draw from the catalog weights

  // apply_action + a sampled chance draw.
  StepResult step(const GameState& state, const Action& a, Rng& rng) const;

  // Board occupancy (0/1) followed by one-hot catalog encodings of each
  // holding slot and each preview slot.
  std::vector<double> encode_features(const GameState& state) const;

  // Zobrist hash over board cells, slot contents and score.
  uint64_t hash_state(const GameState& state) const;

  Bitboard placement_mask(int shape_id, int row, int col) const;

  // Board symmetries usable for training augmentation. Rotation by 180
  // degrees always maps the catalog onto itself (orientation sets are closed
  // under rotation); transposition additionally requires a square board and
  // a reflection-closed catalog (the standard families include both J/L and
  // S/Z, and the pentomino families are mirror-symmetric).
  int rot180_shape(int shape_id) const { return rot180_ids_[shape_id]; }
  GameState rotate180(const GameState& state) const;
  Action rotate180_action(const Action& a, int shape_id) const;
  bool has_transpose_symmetry() const { return transpose_ok_; }
  int transpose_shape(int shape_id) const { return transpose_ids_[shape_id]; }
  GameState transpose(const GameState& state) const;
  Action transpose_action(const Action& a, int shape_id) const;

 private:
  struct ShapePlacement {
    int max_row = -1;  // inclusive anchor bounds
    int max_col = -1;
    std::vector<Bitboard> masks;  // indexed row*cols+col, valid anchors only
  };

  bool board_has_legal(Bitboard board, const std::vector<uint8_t>& holding) const;
  std::pair<Bitboard, int> clear_lines(Bitboard board) const;

  RuleSet rules_;
  Catalog catalog_;
  std::vector<ShapePlacement> placements_;  // per shape id
  std::vector<Bitboard> row_masks_;
  std::vector<Bitboard> col_masks_;
  std::vector<uint64_t> cell_keys_;     // board_cells
  std::vector<uint64_t> holding_keys_;  // h * catalog size
  std::vector<uint64_t> preview_keys_;  // p * catalog size
  std::vector<int> rot180_ids_;         // per shape id
  std::vector<int> transpose_ids_;      // per shape id; valid iff transpose_ok_
  bool transpose_ok_ = false;
};

// Line-delimited episode record: header (rule set, seed, catalog hash) then
// one "slot,row,col,drawn_shape_id,reward" line per move. Round-trips
// byte-exactly through write/read.
struct EpisodeMove {
  int slot = 0, row = 0, col = 0, drawn_shape = 0, reward = 0;
};
struct EpisodeRecord {
  RuleSet rules;
  uint64_t seed = 0;
  uint64_t catalog_hash = 0;
  std::vector<EpisodeMove> moves;
  int final_score = 0;
};

std::string write_episode(const EpisodeRecord& rec);
EpisodeRecord read_episode(std::string_view text);

}  // namespace blocklab
