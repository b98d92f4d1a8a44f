#pragma once

#include <string>
#include <string_view>

#include "blocklab/shapes.hpp"

namespace blocklab {

enum class ClearAxes { kBoth, kRows, kCols };

std::string_view clear_axes_str(ClearAxes a);
ClearAxes parse_clear_axes(std::string_view s);

// Full variant configuration. The classic game is 8x8, h=3, p=0, no extra
// blocks, reward cap 6750.
struct RuleSet {
  int board_rows = 8;
  int board_cols = 8;
  int h = 3;  // holding blocks
  int p = 0;  // preview holding blocks
  ExtraBlocks extra_blocks;
  int reward_cap = 6750;
  ClearAxes clear_axes = ClearAxes::kBoth;
  std::string catalog = "standard";
  std::string rng_scheme = "splitmix-v1";

  std::string id() const;  // e.g. "8x8-h3-p0-b---cap6750"

  bool operator==(const RuleSet&) const = default;
};

RuleSet classic_rules();

// Catalog implied by the rule set: "standard" honors extra_blocks, other
// names come from preset_catalog.
Catalog catalog_for(const RuleSet& rules);

// Returns the rule set unchanged if every invariant holds, otherwise throws
// std::invalid_argument naming the violated constraint. Checks that every
// catalog shape's bounding box fits the board.
RuleSet validate_ruleset(const RuleSet& raw);

}  // namespace blocklab
