#include "blocklab/shapes.hpp"

#include <algorithm>
#include <stdexcept>

#include "blocklab/rng.hpp"

namespace blocklab {

std::string ExtraBlocks::str() const {
  std::string s;
  if (u5) s += 'U';
  if (v5) s += 'V';
  if (x5) s += 'X';
  if (t5) s += 'T';
  return s.empty() ? "-" : s;
}

ExtraBlocks ExtraBlocks::parse(std::string_view text) {
  ExtraBlocks e;
  for (char c : text) {
    switch (c) {
      case 'U': case 'u': e.u5 = true; break;
      case 'V': case 'v': e.v5 = true; break;
      case 'X': case 'x': e.x5 = true; break;
      case 'T': case 't': e.t5 = true; break;
      case '-': case ',': case ' ': case '5': break;
      default:
        throw std::invalid_argument("extra_blocks: unknown block letter '" +
                                    std::string(1, c) + "' (expected subset of U,V,X,T)");
    }
  }
  return e;
}

uint64_t Catalog::hash() const {
  uint64_t h = 0x42b0c1a5u;
  for (const Shape& s : shapes) {
    h = splitmix64(h ^ static_cast<uint64_t>(s.id));
    for (Cell c : s.cells) {
      h = splitmix64(h ^ (static_cast<uint64_t>(static_cast<uint8_t>(c.row)) << 8 |
                          static_cast<uint64_t>(static_cast<uint8_t>(c.col))));
    }
  }
  h = splitmix64(h ^ static_cast<uint64_t>(shapes.size()));
  return h;
}

namespace {

void normalize(std::vector<Cell>& cells) {
  int8_t min_r = 127, min_c = 127;
  for (Cell c : cells) {
    min_r = std::min(min_r, c.row);
    min_c = std::min(min_c, c.col);
  }
  for (Cell& c : cells) {
    c.row = static_cast<int8_t>(c.row - min_r);
    c.col = static_cast<int8_t>(c.col - min_c);
  }
  std::sort(cells.begin(), cells.end());
}

std::vector<Cell> rotate_cw(const std::vector<Cell>& cells) {
  int8_t max_r = 0;
  for (Cell c : cells) max_r = std::max(max_r, c.row);
  std::vector<Cell> out;
  out.reserve(cells.size());
  for (Cell c : cells) out.push_back({c.col, static_cast<int8_t>(max_r - c.row)});
  normalize(out);
  return out;
}

struct Family {
  const char* tag;
  std::vector<Cell> base;
};

void append_family(Catalog& cat, const Family& fam) {
  std::vector<std::vector<Cell>> orients;
  std::vector<int> degs;
  std::vector<Cell> cur = fam.base;
  normalize(cur);
  for (int deg = 0; deg < 360; deg += 90) {
    if (std::find(orients.begin(), orients.end(), cur) == orients.end()) {
      orients.push_back(cur);
      degs.push_back(deg);
    }
    cur = rotate_cw(cur);
  }
  for (size_t i = 0; i < orients.size(); ++i) {
    Shape s;
    s.id = cat.size();
    s.name = fam.tag;
    if (orients.size() > 1) s.name += "-rot" + std::to_string(degs[i]);
    s.cells = orients[i];
    for (Cell c : s.cells) {
      s.rows = std::max(s.rows, c.row + 1);
      s.cols = std::max(s.cols, c.col + 1);
    }
    cat.shapes.push_back(std::move(s));
  }
}

void finish(Catalog& cat) {
  const double w = 1.0 / cat.size();
  cat.draw_weights.assign(cat.size(), w);
}

const Family kI4{"I4", {{0, 0}, {0, 1}, {0, 2}, {0, 3}}};
const Family kO4{"O4", {{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
const Family kT4{"T4", {{0, 0}, {0, 1}, {0, 2}, {1, 1}}};
const Family kS4{"S4", {{0, 1}, {0, 2}, {1, 0}, {1, 1}}};
const Family kZ4{"Z4", {{0, 0}, {0, 1}, {1, 1}, {1, 2}}};
const Family kJ4{"J4", {{0, 0}, {1, 0}, {1, 1}, {1, 2}}};
const Family kL4{"L4", {{0, 2}, {1, 0}, {1, 1}, {1, 2}}};
// Pentomino cell tables: U = 3x2 minus the middle-top cell, V = 3x3 corner,
// X = plus, T = 3x3 tee.
const Family kU5{"U5", {{0, 0}, {0, 2}, {1, 0}, {1, 1}, {1, 2}}};
const Family kV5{"V5", {{0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}}};
const Family kX5{"X5", {{0, 1}, {1, 0}, {1, 1}, {1, 2}, {2, 1}}};
const Family kT5{"T5", {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {2, 1}}};

}  // namespace

Catalog build_catalog(const ExtraBlocks& extra) {
  Catalog cat;
  cat.name = "standard";
  if (extra.any()) cat.name += "+" + extra.str();
  for (const Family* fam : {&kI4, &kO4, &kT4, &kS4, &kZ4, &kJ4, &kL4})
    append_family(cat, *fam);
  if (extra.u5) append_family(cat, kU5);
  if (extra.v5) append_family(cat, kV5);
  if (extra.x5) append_family(cat, kX5);
  if (extra.t5) append_family(cat, kT5);
  finish(cat);
  return cat;
}

Catalog preset_catalog(std::string_view name) {
  if (name == "standard") return build_catalog({});
  Catalog cat;
  cat.name = std::string(name);
  if (name == "mono1") {
    append_family(cat, Family{"M1", {{0, 0}}});
  } else if (name == "mixed3") {
    append_family(cat, Family{"D2", {{0, 0}, {0, 1}}});
    append_family(cat, kO4);
  } else {
    throw std::invalid_argument("unknown catalog preset '" + std::string(name) +
                                "' (expected standard, mono1 or mixed3)");
  }
  finish(cat);
  return cat;
}

}  // namespace blocklab
