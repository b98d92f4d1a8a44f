#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "blocklab/config.hpp"

namespace blocklab {

struct SweepCell {
  int h = 0;
  int p = 0;
  ExtraBlocks extra;
};

struct SweepResult {
  std::string variant_id;
  int h = 0;
  int p = 0;
  ExtraBlocks extra;
  std::optional<double> training_reward;
  std::optional<int> convergence_iteration;
  uint64_t seed = 0;
  std::string stats_path;
  std::string error;  // non-empty marks a failed cell

  bool failed() const { return !error.empty(); }
};

std::vector<SweepCell> sweep_cells(const AppConfig& cfg);

// Trains every cell independently (seeds derive from the cell coordinates,
// never from execution order), computes both difficulty metrics from the
// written stats CSV, and records failures without aborting the sweep.
// Writes <out_dir>/sweep_results.csv and per-cell subdirectories.
std::vector<SweepResult> run_sweep(const AppConfig& cfg, const std::string& out_dir,
                                   const std::function<void(const std::string&)>& log = {});

std::string sweep_csv(const std::vector<SweepResult>& results);
std::vector<SweepResult> parse_sweep_csv(std::string_view text);

// Seed stream for one cell, a pure function of the master seed and the
// cell coordinates.
uint64_t cell_seed(uint64_t master_seed, const SweepCell& cell);

}  // namespace blocklab
