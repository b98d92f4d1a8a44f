#include "blocklab/ruleset.hpp"

#include <stdexcept>

namespace blocklab {

std::string_view clear_axes_str(ClearAxes a) {
  switch (a) {
    case ClearAxes::kBoth: return "both";
    case ClearAxes::kRows: return "rows";
    case ClearAxes::kCols: return "cols";
  }
  return "both";
}

ClearAxes parse_clear_axes(std::string_view s) {
  if (s == "both") return ClearAxes::kBoth;
  if (s == "rows") return ClearAxes::kRows;
  if (s == "cols") return ClearAxes::kCols;
  throw std::invalid_argument("clear_axes must be both, rows or cols (got '" +
                              std::string(s) + "')");
}

std::string RuleSet::id() const {
  std::string s = std::to_string(board_rows) + "x" + std::to_string(board_cols);
  s += "-h" + std::to_string(h) + "-p" + std::to_string(p);
  s += "-b" + extra_blocks.str();
  s += "-cap" + std::to_string(reward_cap);
  if (catalog != "standard") s += "-" + catalog;
  if (clear_axes != ClearAxes::kBoth) s += "-" + std::string(clear_axes_str(clear_axes));
  return s;
}

RuleSet classic_rules() { return RuleSet{}; }

Catalog catalog_for(const RuleSet& rules) {
  if (rules.catalog == "standard") return build_catalog(rules.extra_blocks);
  return preset_catalog(rules.catalog);
}

RuleSet validate_ruleset(const RuleSet& raw) {
  if (raw.h < 1) throw std::invalid_argument("h must be >= 1");
  if (raw.p < 0) throw std::invalid_argument("p must be >= 0");
  if (raw.reward_cap < 1) throw std::invalid_argument("reward_cap must be >= 1");
  if (raw.board_rows < 1 || raw.board_cols < 1)
    throw std::invalid_argument("board dimensions must be >= 1");
  if (raw.board_rows * raw.board_cols > 64)
    throw std::invalid_argument("board has " +
                                std::to_string(raw.board_rows * raw.board_cols) +
                                " cells; the engine supports at most 64");
  if (raw.rng_scheme != "splitmix-v1")
    throw std::invalid_argument("unknown rng_scheme '" + raw.rng_scheme + "'");
  Catalog cat = catalog_for(raw);  // throws on unknown catalog name
  for (const Shape& s : cat.shapes) {
    if (s.rows > raw.board_rows || s.cols > raw.board_cols)
      throw std::invalid_argument(
          "shape " + s.name + " (" + std::to_string(s.rows) + "x" +
          std::to_string(s.cols) + ") does not fit the " +
          std::to_string(raw.board_rows) + "x" + std::to_string(raw.board_cols) +
          " board");
  }
  return raw;
}

}  // namespace blocklab
