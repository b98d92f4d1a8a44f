#include "blocklab/engine.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace blocklab {

namespace {
constexpr uint64_t kZobristSeed = 0x7c9f0b1d4e5a6ull;
constexpr uint64_t kScoreSalt = 0x3b1e8d2c9a74f056ull;
}  // namespace

GameEnv::GameEnv(RuleSet rules, Catalog catalog)
    : rules_(std::move(rules)), catalog_(std::move(catalog)) {
  const int R = rows(), C = cols();
  placements_.resize(catalog_.size());
  for (int sid = 0; sid < catalog_.size(); ++sid) {
    const Shape& s = catalog_.shapes[sid];
    ShapePlacement& pl = placements_[sid];
    pl.max_row = R - s.rows;
    pl.max_col = C - s.cols;
    pl.masks.assign(board_cells(), 0);
    for (int r = 0; r <= pl.max_row; ++r) {
      for (int c = 0; c <= pl.max_col; ++c) {
        Bitboard m = 0;
        for (Cell cell : s.cells) m |= Bitboard{1} << ((r + cell.row) * C + (c + cell.col));
        pl.masks[r * C + c] = m;
      }
    }
  }
  row_masks_.assign(R, 0);
  col_masks_.assign(C, 0);
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      row_masks_[r] |= Bitboard{1} << (r * C + c);
      col_masks_[c] |= Bitboard{1} << (r * C + c);
    }

  uint64_t z = splitmix64(kZobristSeed ^ splitmix64((uint64_t)R << 48 ^ (uint64_t)C << 32 ^
                                                    (uint64_t)rules_.h << 16 ^ (uint64_t)rules_.p));
  z = splitmix64(z ^ catalog_.hash());
  auto next_key = [&z]() { return z = splitmix64(z); };
  cell_keys_.resize(board_cells());
  for (auto& k : cell_keys_) k = next_key();
  holding_keys_.resize(static_cast<size_t>(rules_.h) * catalog_.size());
  for (auto& k : holding_keys_) k = next_key();
  preview_keys_.resize(static_cast<size_t>(rules_.p) * catalog_.size());
  for (auto& k : preview_keys_) k = next_key();

  rot180_ids_.assign(catalog_.size(), -1);
  for (int sid = 0; sid < catalog_.size(); ++sid) {
    const Shape& s = catalog_.shapes[sid];
    std::vector<Cell> flipped;
    for (Cell c : s.cells)
      flipped.push_back({static_cast<int8_t>(s.rows - 1 - c.row),
                         static_cast<int8_t>(s.cols - 1 - c.col)});
    std::sort(flipped.begin(), flipped.end());
    for (int other = 0; other < catalog_.size(); ++other)
      if (catalog_.shapes[other].cells == flipped) {
        rot180_ids_[sid] = other;
        break;
      }
    if (rot180_ids_[sid] < 0)
      throw std::logic_error("catalog is not closed under 180-degree rotation");
  }

  transpose_ids_.assign(catalog_.size(), -1);
  transpose_ok_ = rules_.board_rows == rules_.board_cols;
  for (int sid = 0; transpose_ok_ && sid < catalog_.size(); ++sid) {
    const Shape& s = catalog_.shapes[sid];
    std::vector<Cell> flipped;
    for (Cell c : s.cells) flipped.push_back({c.col, c.row});
    std::sort(flipped.begin(), flipped.end());
    transpose_ids_[sid] = -1;
    for (int other = 0; other < catalog_.size(); ++other)
      if (catalog_.shapes[other].cells == flipped) {
        transpose_ids_[sid] = other;
        break;
      }
    if (transpose_ids_[sid] < 0) transpose_ok_ = false;
  }
}

Action GameEnv::action_from_index(int idx) const {
  const int bc = board_cells();
  return Action{idx / bc, (idx % bc) / cols(), idx % cols()};
}

GameState GameEnv::new_game(Rng& rng) const {
  GameState s;
  s.holding.reserve(rules_.h);
  s.preview.reserve(rules_.p);
  for (int i = 0; i < rules_.h; ++i) s.holding.push_back(static_cast<uint8_t>(sample_shape(rng)));
  for (int i = 0; i < rules_.p; ++i) s.preview.push_back(static_cast<uint8_t>(sample_shape(rng)));
  s.terminal = !board_has_legal(s.board, s.holding);  // false: every shape fits an empty board
  return s;
}

GameState GameEnv::new_game(uint64_t seed) const {
  Rng rng(seed);
  return new_game(rng);
}

std::vector<Action> GameEnv::legal_actions(const GameState& state) const {
  std::vector<Action> out;
  const int C = cols();
  for (int slot = 0; slot < static_cast<int>(state.holding.size()); ++slot) {
    const ShapePlacement& pl = placements_[state.holding[slot]];
    for (int r = 0; r <= pl.max_row; ++r)
      for (int c = 0; c <= pl.max_col; ++c)
        if ((pl.masks[r * C + c] & state.board) == 0) out.push_back({slot, r, c});
  }
  return out;
}

bool GameEnv::board_has_legal(Bitboard board, const std::vector<uint8_t>& holding) const {
  const int C = cols();
  for (uint8_t sid : holding) {
    const ShapePlacement& pl = placements_[sid];
    for (int r = 0; r <= pl.max_row; ++r)
      for (int c = 0; c <= pl.max_col; ++c)
        if ((pl.masks[r * C + c] & board) == 0) return true;
  }
  return false;
}

bool GameEnv::has_legal_action(const GameState& state) const {
  return board_has_legal(state.board, state.holding);
}

bool GameEnv::is_legal(const GameState& state, const Action& a) const {
  if (a.slot < 0 || a.slot >= static_cast<int>(state.holding.size())) return false;
  const ShapePlacement& pl = placements_[state.holding[a.slot]];
  if (a.row < 0 || a.row > pl.max_row || a.col < 0 || a.col > pl.max_col) return false;
  return (pl.masks[a.row * cols() + a.col] & state.board) == 0;
}

Bitboard GameEnv::placement_mask(int shape_id, int row, int col) const {
  return placements_[shape_id].masks[row * cols() + col];
}

std::pair<Bitboard, int> GameEnv::clear_lines(Bitboard board) const {
  Bitboard cleared = 0;
  int lines = 0;
  if (rules_.clear_axes != ClearAxes::kCols) {
    for (Bitboard rm : row_masks_)
      if ((board & rm) == rm) {
        cleared |= rm;
        ++lines;
      }
  }
  if (rules_.clear_axes != ClearAxes::kRows) {
    for (Bitboard cm : col_masks_)
      if ((board & cm) == cm) {
        cleared |= cm;
        ++lines;
      }
  }
  return {board & ~cleared, lines};
}

std::pair<Afterstate, int> GameEnv::apply_action(const GameState& state, const Action& a) const {
  if (state.terminal || !is_legal(state, a))
    throw std::invalid_argument("illegal action (slot " + std::to_string(a.slot) + ", row " +
                                std::to_string(a.row) + ", col " + std::to_string(a.col) + ")");
  Afterstate as;
  auto [board, lines] = clear_lines(state.board | placement_mask(state.holding[a.slot], a.row, a.col));
  as.board = board;
  int reward = std::min(state.score + lines, rules_.reward_cap) - state.score;
  as.score = state.score + reward;
  as.holding = state.holding;
  as.holding.erase(as.holding.begin() + a.slot);
  as.preview = state.preview;
  if (!as.preview.empty()) {
    as.holding.push_back(as.preview.front());
    as.preview.erase(as.preview.begin());
  }
  as.pending_draws = 1;
  return {std::move(as), reward};
}

std::vector<ChanceOutcome> GameEnv::chance_outcomes(const Afterstate& as) const {
  if (as.pending_draws != 1) throw std::logic_error("afterstate has no pending draw");
  std::vector<ChanceOutcome> out;
  out.reserve(catalog_.size());
  for (int i = 0; i < catalog_.size(); ++i) out.push_back({i, catalog_.draw_weights[i]});
  return out;
}

GameState GameEnv::apply_chance(const Afterstate& as, const ChanceOutcome& o) const {
  if (o.shape_id < 0 || o.shape_id >= catalog_.size())
    throw std::invalid_argument("chance outcome shape id out of range");
  GameState s;
  s.board = as.board;
  s.score = as.score;
  s.holding = as.holding;
  s.preview = as.preview;
  if (rules_.p > 0 && static_cast<int>(s.holding.size()) == rules_.h)
    s.preview.push_back(static_cast<uint8_t>(o.shape_id));
  else
    s.holding.push_back(static_cast<uint8_t>(o.shape_id));
  s.terminal = s.score >= rules_.reward_cap || !board_has_legal(s.board, s.holding);
  return s;
}

int GameEnv::sample_shape(Rng& rng) const {
  double u = uniform_double(rng);
  double acc = 0.0;
  for (int i = 0; i < catalog_.size(); ++i) {
    acc += catalog_.draw_weights[i];
    if (u < acc) return i;
  }
  return catalog_.size() - 1;
}

StepResult GameEnv::step(const GameState& state, const Action& a, Rng& rng) const {
  auto [as, reward] = apply_action(state, a);
  int drawn = sample_shape(rng);
  return {apply_chance(as, {drawn, catalog_.draw_weights[drawn]}), reward, drawn};
}

std::vector<double> GameEnv::encode_features(const GameState& state) const {
  std::vector<double> f(feature_length(), 0.0);
  for (int i = 0; i < board_cells(); ++i)
    if (state.board >> i & 1) f[i] = 1.0;
  const int K = catalog_.size();
  int base = board_cells();
  for (size_t i = 0; i < state.holding.size(); ++i) f[base + i * K + state.holding[i]] = 1.0;
  base += rules_.h * K;
  for (size_t i = 0; i < state.preview.size(); ++i) f[base + i * K + state.preview[i]] = 1.0;
  return f;
}

uint64_t GameEnv::hash_state(const GameState& state) const {
  uint64_t h = splitmix64(kScoreSalt ^ static_cast<uint64_t>(state.score));
  Bitboard b = state.board;
  while (b) {
    h ^= cell_keys_[std::countr_zero(b)];
    b &= b - 1;
  }
  const int K = catalog_.size();
  for (size_t i = 0; i < state.holding.size(); ++i) h ^= holding_keys_[i * K + state.holding[i]];
  for (size_t i = 0; i < state.preview.size(); ++i) h ^= preview_keys_[i * K + state.preview[i]];
  return h;
}

GameState GameEnv::rotate180(const GameState& state) const {
  GameState out;
  const int cells = board_cells();
  for (int i = 0; i < cells; ++i)
    if (state.board >> i & 1) out.board |= Bitboard{1} << (cells - 1 - i);
  out.holding.reserve(state.holding.size());
  for (uint8_t sid : state.holding) out.holding.push_back(static_cast<uint8_t>(rot180_ids_[sid]));
  out.preview.reserve(state.preview.size());
  for (uint8_t sid : state.preview) out.preview.push_back(static_cast<uint8_t>(rot180_ids_[sid]));
  out.score = state.score;
  out.terminal = state.terminal;
  return out;
}

Action GameEnv::rotate180_action(const Action& a, int shape_id) const {
  const Shape& s = catalog_.shapes[shape_id];
  return {a.slot, rules_.board_rows - s.rows - a.row, rules_.board_cols - s.cols - a.col};
}

GameState GameEnv::transpose(const GameState& state) const {
  GameState out;
  const int R = rows(), C = cols();
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c)
      if (state.board >> (r * C + c) & 1) out.board |= Bitboard{1} << (c * R + r);
  out.holding.reserve(state.holding.size());
  for (uint8_t sid : state.holding) out.holding.push_back(static_cast<uint8_t>(transpose_ids_[sid]));
  out.preview.reserve(state.preview.size());
  for (uint8_t sid : state.preview) out.preview.push_back(static_cast<uint8_t>(transpose_ids_[sid]));
  out.score = state.score;
  out.terminal = state.terminal;
  return out;
}

Action GameEnv::transpose_action(const Action& a, int) const {
  return {a.slot, a.col, a.row};
}

namespace {

uint64_t parse_u64(std::string_view tok, const char* what) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw std::invalid_argument(std::string("episode: bad ") + what + " '" + std::string(tok) + "'");
  return v;
}

int parse_int(std::string_view tok, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw std::invalid_argument(std::string("episode: bad ") + what + " '" + std::string(tok) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t pos = 0;
  while (true) {
    size_t nxt = s.find(sep, pos);
    if (nxt == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, nxt - pos));
    pos = nxt + 1;
  }
}

}  // namespace

std::string write_episode(const EpisodeRecord& rec) {
  std::ostringstream os;
  const RuleSet& r = rec.rules;
  os << "blocklab-episode v1\n";
  os << "rules " << r.board_rows << " " << r.board_cols << " h " << r.h << " p " << r.p
     << " extra " << r.extra_blocks.str() << " cap " << r.reward_cap << " axes "
     << clear_axes_str(r.clear_axes) << " catalog " << r.catalog << "\n";
  os << "seed " << rec.seed << "\n";
  os << "catalog_hash " << rec.catalog_hash << "\n";
  os << "moves " << rec.moves.size() << "\n";
  for (const EpisodeMove& m : rec.moves)
    os << m.slot << "," << m.row << "," << m.col << "," << m.drawn_shape << "," << m.reward << "\n";
  os << "final_score " << rec.final_score << "\n";
  return os.str();
}

EpisodeRecord read_episode(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  size_t at = 0;
  auto next_line = [&]() -> std::string_view {
    while (at < lines.size() && lines[at].empty()) ++at;
    if (at >= lines.size()) throw std::invalid_argument("episode: unexpected end of input");
    return lines[at++];
  };
  if (next_line() != "blocklab-episode v1")
    throw std::invalid_argument("episode: bad header line");

  EpisodeRecord rec;
  std::vector<std::string_view> rt = split(next_line(), ' ');
  if (rt.size() != 15 || rt[0] != "rules" || rt[3] != "h" || rt[5] != "p" || rt[7] != "extra" ||
      rt[9] != "cap" || rt[11] != "axes" || rt[13] != "catalog")
    throw std::invalid_argument("episode: bad rules line");
  rec.rules.board_rows = parse_int(rt[1], "board_rows");
  rec.rules.board_cols = parse_int(rt[2], "board_cols");
  rec.rules.h = parse_int(rt[4], "h");
  rec.rules.p = parse_int(rt[6], "p");
  rec.rules.extra_blocks = ExtraBlocks::parse(rt[8]);
  rec.rules.reward_cap = parse_int(rt[10], "reward_cap");
  rec.rules.clear_axes = parse_clear_axes(rt[12]);
  rec.rules.catalog = std::string(rt[14]);

  std::vector<std::string_view> st = split(next_line(), ' ');
  if (st.size() != 2 || st[0] != "seed") throw std::invalid_argument("episode: bad seed line");
  rec.seed = parse_u64(st[1], "seed");

  std::vector<std::string_view> ct = split(next_line(), ' ');
  if (ct.size() != 2 || ct[0] != "catalog_hash")
    throw std::invalid_argument("episode: bad catalog_hash line");
  rec.catalog_hash = parse_u64(ct[1], "catalog_hash");

  std::vector<std::string_view> mt = split(next_line(), ' ');
  if (mt.size() != 2 || mt[0] != "moves") throw std::invalid_argument("episode: bad moves line");
  int n_moves = parse_int(mt[1], "move count");
  rec.moves.reserve(n_moves);
  for (int i = 0; i < n_moves; ++i) {
    std::vector<std::string_view> f = split(next_line(), ',');
    if (f.size() != 5)
      throw std::invalid_argument("episode: move line " + std::to_string(i + 1) +
                                  " must have 5 fields");
    rec.moves.push_back({parse_int(f[0], "slot"), parse_int(f[1], "row"), parse_int(f[2], "col"),
                         parse_int(f[3], "drawn_shape_id"), parse_int(f[4], "reward")});
  }
  std::vector<std::string_view> ft = split(next_line(), ' ');
  if (ft.size() != 2 || ft[0] != "final_score")
    throw std::invalid_argument("episode: bad final_score line");
  rec.final_score = parse_int(ft[1], "final_score");
  return rec;
}

}  // namespace blocklab
