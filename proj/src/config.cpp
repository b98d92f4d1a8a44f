#include "blocklab/config.hpp"

#include <charconv>
#include <stdexcept>

#include "blocklab/csv.hpp"

namespace blocklab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

int to_int(std::string_view v, std::string_view key) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw std::invalid_argument("config: bad integer for " + std::string(key) + ": '" +
                                std::string(v) + "'");
  return out;
}

uint64_t to_u64(std::string_view v, std::string_view key) {
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw std::invalid_argument("config: bad unsigned integer for " + std::string(key) + ": '" +
                                std::string(v) + "'");
  return out;
}

double to_double(std::string_view v, std::string_view key) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw std::invalid_argument("config: bad number for " + std::string(key) + ": '" +
                                std::string(v) + "'");
  return out;
}

bool to_bool(std::string_view v, std::string_view key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean for " + std::string(key) + ": '" +
                              std::string(v) + "'");
}

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (start <= v.size()) {
    size_t comma = v.find(',', start);
    std::string_view item =
        trim(v.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

void apply_override(AppConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "board_rows") cfg.rules.board_rows = to_int(value, key);
  else if (key == "board_cols") cfg.rules.board_cols = to_int(value, key);
  else if (key == "h") cfg.rules.h = to_int(value, key);
  else if (key == "p") cfg.rules.p = to_int(value, key);
  else if (key == "extra_blocks") cfg.rules.extra_blocks = ExtraBlocks::parse(value);
  else if (key == "reward_cap") cfg.rules.reward_cap = to_int(value, key);
  else if (key == "clear_axes") cfg.rules.clear_axes = parse_clear_axes(value);
  else if (key == "catalog") cfg.rules.catalog = std::string(value);
  else if (key == "seed") cfg.seed = to_u64(value, key);
  else if (key == "threads") cfg.threads = to_int(value, key);
  else if (key == "deterministic") cfg.deterministic = to_bool(value, key);
  else if (key == "simulations") cfg.search.simulations = to_int(value, key);
  else if (key == "max_candidates") cfg.search.max_candidates = to_int(value, key);
  else if (key == "c_visit") cfg.search.c_visit = to_double(value, key);
  else if (key == "c_scale") cfg.search.c_scale = to_double(value, key);
  else if (key == "max_tree_depth") cfg.search.max_tree_depth = to_int(value, key);
  else if (key == "iterations") cfg.train.iterations = to_int(value, key);
  else if (key == "games_per_iter") cfg.train.games_per_iter = to_int(value, key);
  else if (key == "opt_steps") cfg.train.opt_steps = to_int(value, key);
  else if (key == "batch_size") cfg.train.batch_size = to_int(value, key);
  else if (key == "lr") cfg.train.lr = to_double(value, key);
  else if (key == "momentum") cfg.train.momentum = to_double(value, key);
  else if (key == "value_loss_weight") cfg.train.value_loss_weight = to_double(value, key);
  else if (key == "augment_rot180") cfg.train.augment_rot180 = to_bool(value, key);
  else if (key == "buffer_games") cfg.train.buffer_games = to_int(value, key);
  else if (key == "checkpoint_every") cfg.train.checkpoint_every = to_int(value, key);
  else if (key == "eval_episodes") cfg.train.eval_episodes = to_int(value, key);
  else if (key == "convergence_eps") cfg.train.convergence_eps = to_double(value, key);
  else if (key == "metric_window") cfg.train.metric_window = to_int(value, key);
  else if (key == "hidden") {
    cfg.train.hidden.clear();
    for (std::string_view item : split_list(value))
      cfg.train.hidden.push_back(to_int(item, key));
  } else if (key == "sweep_h") {
    cfg.sweep.hs.clear();
    for (std::string_view item : split_list(value)) cfg.sweep.hs.push_back(to_int(item, key));
  } else if (key == "sweep_p") {
    cfg.sweep.ps.clear();
    for (std::string_view item : split_list(value)) cfg.sweep.ps.push_back(to_int(item, key));
  } else if (key == "sweep_blocks") {
    // comma list of block sets, e.g. "-,U,V,X,T,UT"
    cfg.sweep.block_sets.clear();
    for (std::string_view item : split_list(value))
      cfg.sweep.block_sets.push_back(ExtraBlocks::parse(item));
  } else {
    throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
  }
}

AppConfig parse_config(std::string_view text) {
  AppConfig cfg;
  size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not 'key = value'");
    try {
      apply_override(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string(e.what()) + " (line " + std::to_string(line_no) +
                                  ")");
    }
  }
  return cfg;
}

AppConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

}  // namespace blocklab
