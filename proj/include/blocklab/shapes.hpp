#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace blocklab {

struct Cell {
  int8_t row = 0;
  int8_t col = 0;
  auto operator<=>(const Cell&) const = default;
};

// One oriented block. Cells are normalized (min row = min col = 0) and
// sorted row-major, so two shapes are equal iff their cell lists are.
struct Shape {
  int id = -1;
  std::string name;
  std::vector<Cell> cells;
  int rows = 0;  // bounding box
  int cols = 0;

  int size() const { return static_cast<int>(cells.size()); }
};

// Optional pentomino families on top of the 7 standard tetromino families.
struct ExtraBlocks {
  bool u5 = false;
  bool v5 = false;
  bool x5 = false;
  bool t5 = false;

  bool any() const { return u5 || v5 || x5 || t5; }
  // Canonical form: letters in U,V,X,T order, or "-" when empty.
  std::string str() const;
  // Accepts the canonical form plus separators/case, e.g. "UX", "u,x", "-".
  static ExtraBlocks parse(std::string_view text);

  bool operator==(const ExtraBlocks&) const = default;
};

struct Catalog {
  std::string name;
  std::vector<Shape> shapes;
  std::vector<double> draw_weights;

  int size() const { return static_cast<int>(shapes.size()); }
  // Stable digest of the shape cell sets and weights, used in episode
  // headers so replays can detect a mismatched catalog.
  uint64_t hash() const;
};

// All distinct orientations of the 7 standard tetromino families, plus all
// distinct orientations of each requested pentomino family. Canonical order:
// families I,O,T,S,Z,J,L,U5,V5,X5,T5; rotations 0,90,180,270 deduplicated.
// Draw weights are uniform over the oriented shapes.
Catalog build_catalog(const ExtraBlocks& extra);

// Named catalogs for the tiny solver worlds: "mono1" (single 1x1 block) and
// "mixed3" (1x2, 2x1, 2x2). "standard" maps to build_catalog with no extras.
Catalog preset_catalog(std::string_view name);

}  // namespace blocklab
