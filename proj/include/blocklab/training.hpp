#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "blocklab/config.hpp"
#include "blocklab/engine.hpp"
#include "blocklab/evaluator.hpp"
#include "blocklab/planner.hpp"

namespace blocklab {

struct MoveRecord {
  GameState state;  // before the move; features are reconstructed on demand
  int action_index = 0;
  int drawn_shape = 0;
  int reward = 0;
  std::vector<std::pair<int, double>> policy_target;  // sparse over legal actions
};

struct GameRecord {
  std::string variant_id;
  uint64_t seed = 0;
  std::vector<MoveRecord> moves;
  int final_score = 0;

  int length() const { return static_cast<int>(moves.size()); }
};

// Bounded FIFO of games; eviction is strictly oldest-first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity_games);

  void push(GameRecord rec);
  size_t size() const { return games_.size(); }
  size_t total_positions() const { return total_positions_; }
  size_t total_added() const { return total_added_; }
  const GameRecord& game(size_t i) const { return games_[i]; }

  // Uniform over all buffered positions.
  std::pair<const GameRecord*, const MoveRecord*> sample_position(Rng& rng) const;

 private:
  size_t capacity_;
  std::deque<GameRecord> games_;
  size_t total_positions_ = 0;
  size_t total_added_ = 0;
};

struct IterationStats {
  int iteration = 0;
  int games = 0;
  std::optional<double> mean_reward;
  std::optional<double> std_reward;
  std::optional<double> mean_length;
  std::optional<double> policy_loss;
  std::optional<double> value_loss;
  double seconds = 0.0;
};

// CSV with columns iteration,games,mean_reward,std_reward,mean_length,
// policy_loss,value_loss,seconds; absent values written as "-".
std::string stats_csv(const std::vector<IterationStats>& series);
std::vector<IterationStats> parse_stats_csv(std::string_view text);
std::vector<double> mean_reward_series(const std::vector<IterationStats>& series);

// Plays one episode with the deterministic Gumbel search move, recording
// policy targets and rewards. Reproducible from (evaluator, seed).
GameRecord self_play_game(const Evaluator& evaluator, const GameEnv& env,
                          const SearchConfig& scfg, uint64_t seed);

// Per move t: policy target as recorded; value target = suffix reward sum
// divided by reward_cap, clipped to [0,1].
TrainBatch make_targets(const GameRecord& rec, const GameEnv& env);

MlpArch default_arch(const GameEnv& env, const std::vector<int>& hidden);

// Self-play (parallelizable, seeds derived from game index) followed by
// optimization on uniform position samples. The evaluator snapshot is
// frozen during self-play and updated only between the two stages.
IterationStats run_iteration(MlpEvaluator& evaluator, ReplayBuffer& buffer, const GameEnv& env,
                             const AppConfig& cfg, int iteration);

struct TrainRunResult {
  std::vector<IterationStats> series;
  std::string stats_path;
  std::string final_checkpoint;
};

// Full training run: iterations, stats CSV, periodic checkpoints.
// `out_dir` must exist. Progress lines go through `log` when provided.
TrainRunResult train_run(const GameEnv& env, const AppConfig& cfg, const std::string& out_dir,
                         const std::function<void(const std::string&)>& log = {});

// Greedy evaluation episodes with a frozen evaluator; returns final scores,
// seeded per episode so runs with equal seeds pair up across variants.
std::vector<double> evaluate_episodes(const Evaluator& evaluator, const GameEnv& env,
                                      const SearchConfig& scfg, int episodes, uint64_t seed,
                                      int threads = 1);

}  // namespace blocklab
