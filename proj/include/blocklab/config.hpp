#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blocklab/planner.hpp"
#include "blocklab/ruleset.hpp"

namespace blocklab {

struct TrainSettings {
  int iterations = 30;
  int games_per_iter = 40;
  int opt_steps = 100;
  int batch_size = 64;
  double lr = 0.02;
  double momentum = 0.9;
  double value_loss_weight = 1.0;
  bool augment_rot180 = true;
  std::vector<int> hidden = {128, 128};
  int buffer_games = 500;
  int checkpoint_every = 10;
  int eval_episodes = 200;
  double convergence_eps = 0.0;
  int metric_window = 50;
};

struct SweepSettings {
  std::vector<int> hs;
  std::vector<int> ps;
  std::vector<ExtraBlocks> block_sets;
};

struct AppConfig {
  RuleSet rules;
  SearchConfig search;
  TrainSettings train;
  SweepSettings sweep;
  uint64_t seed = 1;
  int threads = 1;
  bool deterministic = false;
};

// "key = value" lines, '#' comments. Unknown keys are rejected with the
// offending line number. Keys mirror AppConfig fields; see README.
AppConfig parse_config(std::string_view text);
AppConfig load_config(const std::string& path);
void apply_override(AppConfig& cfg, std::string_view key, std::string_view value);

}  // namespace blocklab
