#include <stdexcept>
#include <filesystem>

#include "blocklab/csv.hpp"
#include "blocklab/training.hpp"
#include "doctest.h"
#include "support/stats_util.hpp"

using namespace blocklab;

namespace {

GameEnv small_env(int cap = 10) {
  RuleSet r = classic_rules();
  r.reward_cap = cap;
  return GameEnv(validate_ruleset(r), catalog_for(r));
}

AppConfig small_config() {
  AppConfig cfg;
  cfg.rules.reward_cap = 10;
  cfg.search.simulations = 4;
  cfg.search.max_candidates = 2;
  cfg.train.iterations = 2;
  cfg.train.games_per_iter = 3;
  cfg.train.opt_steps = 4;
  cfg.train.batch_size = 8;
  cfg.train.hidden = {16};
  cfg.train.buffer_games = 20;
  cfg.train.checkpoint_every = 0;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("replay buffer evicts strictly oldest-first") {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) {
    GameRecord g;
    g.seed = i;
    g.moves.resize(i + 1);
    buf.push(std::move(g));
  }
  CHECK(buf.size() == 3);
  CHECK(buf.total_added() == 5);
  CHECK(buf.game(0).seed == 2);  // games 0 and 1 evicted
  CHECK(buf.total_positions() == 3 + 4 + 5);
}

TEST_CASE("position sampling is uniform over buffered positions") {
  ReplayBuffer buf(10);
  std::vector<size_t> lens = {5, 20, 10, 40, 25};
  for (size_t i = 0; i < lens.size(); ++i) {
    GameRecord g;
    g.seed = i;
    g.moves.resize(lens[i]);
    buf.push(std::move(g));
  }
  Rng rng(42);
  std::vector<long> per_game(lens.size(), 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    auto [game, move] = buf.sample_position(rng);
    ++per_game[game->seed];
  }
  std::vector<double> expected;
  for (size_t l : lens) expected.push_back(static_cast<double>(l) / buf.total_positions());
  double stat = testutil::chi_square_stat(per_game, expected);
  CHECK(stat < testutil::chi_square_critical(static_cast<int>(lens.size()) - 1, 0.01));
}

TEST_CASE("self-play records are reproducible and internally consistent") {
  GameEnv env = small_env(5);
  UniformEvaluator ev(env.action_space());
  SearchConfig scfg;
  scfg.simulations = 4;
  scfg.max_candidates = 2;
  GameRecord a = self_play_game(ev, env, scfg, 99);
  GameRecord b = self_play_game(ev, env, scfg, 99);
  REQUIRE(a.moves.size() == b.moves.size());
  CHECK(a.final_score == b.final_score);
  for (size_t i = 0; i < a.moves.size(); ++i) {
    CHECK(a.moves[i].action_index == b.moves[i].action_index);
    CHECK(a.moves[i].drawn_shape == b.moves[i].drawn_shape);
    CHECK(a.moves[i].policy_target == b.moves[i].policy_target);
  }
  int sum = 0;
  for (const MoveRecord& m : a.moves) sum += m.reward;
  CHECK(sum == a.final_score);
  CHECK(a.final_score <= env.rules().reward_cap);
  for (const MoveRecord& m : a.moves) {
    double psum = 0.0;
    for (auto [idx, p] : m.policy_target) psum += p;
    CHECK(psum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("reward_cap = 1 ends the episode at the first clear") {
  RuleSet r = classic_rules();
  r.reward_cap = 1;
  GameEnv env(validate_ruleset(r), catalog_for(r));
  UniformEvaluator ev(env.action_space());
  SearchConfig scfg;
  scfg.simulations = 4;
  scfg.max_candidates = 2;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    GameRecord g = self_play_game(ev, env, scfg, seed);
    CHECK((g.final_score == 0 || g.final_score == 1));
  }
}

TEST_CASE("make_targets computes suffix-sum value targets") {
  GameEnv env = small_env(10);
  GameRecord rec;
  rec.final_score = 3;
  GameState s = env.new_game(uint64_t{1});
  for (int reward : {1, 0, 2}) {
    MoveRecord m;
    m.state = s;
    m.reward = reward;
    m.policy_target = {{0, 1.0}};
    rec.moves.push_back(m);
  }
  TrainBatch batch = make_targets(rec, env);
  REQUIRE(batch.size() == 3);
  CHECK(batch[0].value_target == doctest::Approx(0.3));
  CHECK(batch[1].value_target == doctest::Approx(0.2));
  CHECK(batch[2].value_target == doctest::Approx(0.2));
}

TEST_CASE("value targets at the boundaries") {
  GameEnv env = small_env(10);
  GameRecord rec;
  rec.final_score = 0;
  MoveRecord m;
  m.state = env.new_game(uint64_t{2});
  m.reward = 0;
  m.policy_target = {{0, 1.0}};
  rec.moves.push_back(m);
  CHECK(make_targets(rec, env)[0].value_target == 0.0);  // dead board, no remaining return

  GameRecord capped;
  capped.final_score = 10;
  capped.moves.push_back(m);
  capped.moves.back().reward = 10;
  CHECK(make_targets(capped, env)[0].value_target == 1.0);  // cap normalization
}

TEST_CASE("run_iteration modes") {
  GameEnv env = small_env(10);
  AppConfig cfg = small_config();
  MlpEvaluator ev(default_arch(env, cfg.train.hidden), 1);
  ReplayBuffer buffer(cfg.train.buffer_games);

  SUBCASE("S = 0 leaves the evaluator unchanged but reports rewards") {
    cfg.train.opt_steps = 0;
    MlpEvaluator before = ev;
    IterationStats st = run_iteration(ev, buffer, env, cfg, 1);
    CHECK(st.mean_reward.has_value());
    CHECK_FALSE(st.policy_loss.has_value());
    for (size_t i = 0; i < ev.param_count(); ++i) CHECK(ev.param(i) == before.param(i));
  }
  SUBCASE("G = 0 with a nonempty buffer is pure optimization") {
    IterationStats warmup = run_iteration(ev, buffer, env, cfg, 1);
    (void)warmup;
    cfg.train.games_per_iter = 0;
    IterationStats st = run_iteration(ev, buffer, env, cfg, 2);
    CHECK_FALSE(st.mean_reward.has_value());
    CHECK(st.policy_loss.has_value());
  }
  SUBCASE("optimization with an empty buffer is rejected") {
    cfg.train.games_per_iter = 0;
    CHECK_THROWS_AS(run_iteration(ev, buffer, env, cfg, 1), std::invalid_argument);
  }
}

TEST_CASE("deterministic runs reproduce the stats CSV byte-for-byte") {
  std::filesystem::create_directories("test_tmp/det_a");
  std::filesystem::create_directories("test_tmp/det_b");
  GameEnv env = small_env(10);
  AppConfig cfg = small_config();
  cfg.deterministic = true;
  TrainRunResult a = train_run(env, cfg, "test_tmp/det_a");
  TrainRunResult b = train_run(env, cfg, "test_tmp/det_b");
  CHECK(read_file(a.stats_path) == read_file(b.stats_path));
  CHECK(stats_csv(a.series) == stats_csv(b.series));
}

TEST_CASE("multi-threaded self-play matches single-threaded results") {
  GameEnv env = small_env(10);
  AppConfig cfg = small_config();
  cfg.train.games_per_iter = 6;
  MlpEvaluator ev1(default_arch(env, cfg.train.hidden), 1);
  MlpEvaluator ev2 = ev1;
  ReplayBuffer b1(20), b2(20);
  cfg.threads = 1;
  IterationStats s1 = run_iteration(ev1, b1, env, cfg, 1);
  cfg.threads = 2;
  IterationStats s2 = run_iteration(ev2, b2, env, cfg, 1);
  CHECK(s1.mean_reward == s2.mean_reward);
  CHECK(s1.std_reward == s2.std_reward);
  CHECK(s1.mean_length == s2.mean_length);
  CHECK(s1.policy_loss == s2.policy_loss);
}

TEST_CASE("stats CSV round-trips") {
  std::vector<IterationStats> series;
  IterationStats a;
  a.iteration = 1;
  a.games = 3;
  a.mean_reward = 2.5;
  a.std_reward = 0.5;
  a.mean_length = 17.25;
  a.policy_loss = 3.0123456789;
  a.value_loss = 0.25;
  a.seconds = 0.0;
  IterationStats b;
  b.iteration = 2;
  b.games = 0;  // pure optimization: reward columns absent
  b.policy_loss = 2.5;
  b.value_loss = 0.125;
  series = {a, b};
  std::string csv = stats_csv(series);
  std::vector<IterationStats> back = parse_stats_csv(csv);
  CHECK(stats_csv(back) == csv);  // lossless round-trip
  REQUIRE(back.size() == 2);
  CHECK(back[0].policy_loss == a.policy_loss);
  CHECK_FALSE(back[1].mean_reward.has_value());
}
