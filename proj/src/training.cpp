#include "blocklab/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "blocklab/csv.hpp"

namespace blocklab {

ReplayBuffer::ReplayBuffer(int capacity_games) : capacity_(capacity_games) {
  if (capacity_games < 1) throw std::invalid_argument("replay buffer capacity must be >= 1");
}

void ReplayBuffer::push(GameRecord rec) {
  total_positions_ += rec.moves.size();
  ++total_added_;
  games_.push_back(std::move(rec));
  while (games_.size() > capacity_) {
    total_positions_ -= games_.front().moves.size();
    games_.pop_front();
  }
}

std::pair<const GameRecord*, const MoveRecord*> ReplayBuffer::sample_position(Rng& rng) const {
  if (total_positions_ == 0) throw std::logic_error("replay buffer has no positions");
  size_t k = uniform_index(rng, total_positions_);
  for (const GameRecord& g : games_) {
    if (k < g.moves.size()) return {&g, &g.moves[k]};
    k -= g.moves.size();
  }
  throw std::logic_error("replay buffer position index out of range");
}

GameRecord self_play_game(const Evaluator& evaluator, const GameEnv& env,
                          const SearchConfig& scfg, uint64_t seed) {
  Rng rng(seed);
  GameRecord rec;
  rec.variant_id = env.rules().id();
  rec.seed = seed;
  GameState s = env.new_game(rng);
  while (!s.terminal) {
    SearchResult r = search(s, evaluator, env, scfg, rng);
    MoveRecord m;
    m.state = s;
    m.action_index = r.chosen_index;
    for (const RootActionInfo& info : r.root_actions)
      m.policy_target.emplace_back(info.action_index, r.policy_target[info.action_index]);
    StepResult step = env.step(s, r.chosen, rng);
    m.drawn_shape = step.drawn_shape;
    m.reward = step.reward;
    rec.final_score += step.reward;
    rec.moves.push_back(std::move(m));
    s = std::move(step.state);
  }
  return rec;
}

TrainBatch make_targets(const GameRecord& rec, const GameEnv& env) {
  TrainBatch batch;
  batch.reserve(rec.moves.size());
  const double cap = env.rules().reward_cap;
  int suffix = rec.final_score;
  std::vector<int> targets(rec.moves.size());
  for (size_t t = 0; t < rec.moves.size(); ++t) {
    targets[t] = suffix;
    suffix -= rec.moves[t].reward;
  }
  for (size_t t = 0; t < rec.moves.size(); ++t) {
    TrainSample s;
    s.features = env.encode_features(rec.moves[t].state);
    s.policy_target = rec.moves[t].policy_target;
    s.value_target = std::clamp(targets[t] / cap, 0.0, 1.0);
    batch.push_back(std::move(s));
  }
  return batch;
}

MlpArch default_arch(const GameEnv& env, const std::vector<int>& hidden) {
  return MlpArch{env.feature_length(), hidden, env.action_space()};
}

namespace {

// symmetry: 0 = identity, 1 = rot180, 2 = transpose, 3 = rot180 + transpose
TrainSample sample_to_train(const GameEnv& env, const MoveRecord& move, int suffix_reward,
                            int reward_cap, int symmetry) {
  TrainSample s;
  s.value_target = std::clamp(static_cast<double>(suffix_reward) / reward_cap, 0.0, 1.0);
  if (symmetry == 0) {
    s.features = env.encode_features(move.state);
    s.policy_target = move.policy_target;
    return s;
  }
  GameState st = move.state;
  if (symmetry & 1) st = env.rotate180(st);
  if (symmetry & 2) st = env.transpose(st);
  s.features = env.encode_features(st);
  s.policy_target.reserve(move.policy_target.size());
  for (auto [idx, p] : move.policy_target) {
    Action a = env.action_from_index(idx);
    int sid = move.state.holding[a.slot];
    if (symmetry & 1) {
      a = env.rotate180_action(a, sid);
      sid = env.rot180_shape(sid);
    }
    if (symmetry & 2) a = env.transpose_action(a, sid);
    s.policy_target.emplace_back(env.action_index(a), p);
  }
  return s;
}

// Suffix return of a sampled move, recomputed from the record tail.
int suffix_reward_at(const GameRecord& g, const MoveRecord* move) {
  int suffix = 0;
  bool seen = false;
  for (const MoveRecord& m : g.moves) {
    if (&m == move) seen = true;
    if (seen) suffix += m.reward;
  }
  return suffix;
}

void run_games(const Evaluator& evaluator, const GameEnv& env, const SearchConfig& scfg,
               uint64_t iter_seed, int count, int threads, std::vector<GameRecord>& out) {
  out.resize(count);
  auto work = [&](int begin, int end) {
    for (int g = begin; g < end; ++g)
      out[g] = self_play_game(evaluator, env, scfg, derive_seed(iter_seed, g));
  };
  if (threads <= 1 || count <= 1) {
    work(0, count);
    return;
  }
  int workers = std::min(threads, count);
  std::vector<std::thread> pool;
  int per = (count + workers - 1) / workers;
  for (int t = 0; t < workers; ++t)
    pool.emplace_back(work, t * per, std::min(count, (t + 1) * per));
  for (auto& th : pool) th.join();
}

}  // namespace

IterationStats run_iteration(MlpEvaluator& evaluator, ReplayBuffer& buffer, const GameEnv& env,
                             const AppConfig& cfg, int iteration) {
  auto t0 = std::chrono::steady_clock::now();
  const TrainSettings& ts = cfg.train;
  if (ts.opt_steps > 0 && ts.games_per_iter == 0 && buffer.total_positions() == 0)
    throw std::invalid_argument("run_iteration: optimization requested with an empty buffer");

  uint64_t iter_seed = derive_seed(cfg.seed, iteration);
  IterationStats stats;
  stats.iteration = iteration;
  stats.games = ts.games_per_iter;

  if (ts.games_per_iter > 0) {
    std::vector<GameRecord> records;
    run_games(evaluator, env, cfg.search, iter_seed, ts.games_per_iter,
              cfg.deterministic ? 1 : cfg.threads, records);
    double sum = 0.0, sum_sq = 0.0, len = 0.0;
    for (GameRecord& r : records) {
      sum += r.final_score;
      sum_sq += static_cast<double>(r.final_score) * r.final_score;
      len += r.length();
      buffer.push(std::move(r));
    }
    double mean = sum / ts.games_per_iter;
    stats.mean_reward = mean;
    stats.std_reward = std::sqrt(std::max(0.0, sum_sq / ts.games_per_iter - mean * mean));
    stats.mean_length = len / ts.games_per_iter;
  }

  if (ts.opt_steps > 0) {
    Rng opt_rng(derive_seed(iter_seed, 0x0bad5eedull));
    double ploss = 0.0, vloss = 0.0;
    for (int s = 0; s < ts.opt_steps; ++s) {
      TrainBatch batch;
      batch.reserve(ts.batch_size);
      const int n_sym = ts.augment_rot180 ? (env.has_transpose_symmetry() ? 4 : 2) : 1;
      for (int b = 0; b < ts.batch_size; ++b) {
        auto [game, move] = buffer.sample_position(opt_rng);
        int symmetry = n_sym == 1 ? 0 : static_cast<int>(uniform_index(opt_rng, n_sym));
        batch.push_back(sample_to_train(env, *move, suffix_reward_at(*game, move),
                                        env.rules().reward_cap, symmetry));
      }
      TrainStats st = evaluator.train_batch(batch, ts.lr, ts.momentum, ts.value_loss_weight);
      ploss += st.policy_loss;
      vloss += st.value_loss;
    }
    stats.policy_loss = ploss / ts.opt_steps;
    stats.value_loss = vloss / ts.opt_steps;
  }

  auto t1 = std::chrono::steady_clock::now();
  stats.seconds =
      cfg.deterministic ? 0.0 : std::chrono::duration<double>(t1 - t0).count();
  return stats;
}

namespace {

std::string opt_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("-");
}

}  // namespace

std::string stats_csv(const std::vector<IterationStats>& series) {
  std::ostringstream os;
  os << "iteration,games,mean_reward,std_reward,mean_length,policy_loss,value_loss,seconds\n";
  for (const IterationStats& s : series) {
    os << s.iteration << "," << s.games << "," << opt_cell(s.mean_reward) << ","
       << opt_cell(s.std_reward) << "," << opt_cell(s.mean_length) << ","
       << opt_cell(s.policy_loss) << "," << opt_cell(s.value_loss) << ","
       << format_double(s.seconds) << "\n";
  }
  return os.str();
}

std::vector<IterationStats> parse_stats_csv(std::string_view text) {
  CsvTable t = parse_csv(text);
  int c_it = t.column("iteration"), c_g = t.column("games"), c_mr = t.column("mean_reward"),
      c_sr = t.column("std_reward"), c_ml = t.column("mean_length"),
      c_pl = t.column("policy_loss"), c_vl = t.column("value_loss"), c_s = t.column("seconds");
  std::vector<IterationStats> out;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    IterationStats s;
    s.iteration = static_cast<int>(*parse_optional_double(row[c_it], r + 2, c_it));
    s.games = static_cast<int>(*parse_optional_double(row[c_g], r + 2, c_g));
    s.mean_reward = parse_optional_double(row[c_mr], r + 2, c_mr);
    s.std_reward = parse_optional_double(row[c_sr], r + 2, c_sr);
    s.mean_length = parse_optional_double(row[c_ml], r + 2, c_ml);
    s.policy_loss = parse_optional_double(row[c_pl], r + 2, c_pl);
    s.value_loss = parse_optional_double(row[c_vl], r + 2, c_vl);
    s.seconds = *parse_optional_double(row[c_s], r + 2, c_s);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> mean_reward_series(const std::vector<IterationStats>& series) {
  std::vector<double> out;
  out.reserve(series.size());
  for (const IterationStats& s : series)
    if (s.mean_reward) out.push_back(*s.mean_reward);
  return out;
}

TrainRunResult train_run(const GameEnv& env, const AppConfig& cfg, const std::string& out_dir,
                         const std::function<void(const std::string&)>& log) {
  MlpEvaluator evaluator(default_arch(env, cfg.train.hidden), derive_seed(cfg.seed, 0x1717));
  ReplayBuffer buffer(cfg.train.buffer_games);
  TrainRunResult res;
  res.stats_path = out_dir + "/iteration_stats.csv";
  for (int it = 1; it <= cfg.train.iterations; ++it) {
    IterationStats s = run_iteration(evaluator, buffer, env, cfg, it);
    res.series.push_back(s);
    write_file(res.stats_path, stats_csv(res.series));  // rewritten each iteration
    if (cfg.train.checkpoint_every > 0 && it % cfg.train.checkpoint_every == 0) {
      char name[64];
      snprintf(name, sizeof name, "/checkpoint_%04d.ckpt", it);
      evaluator.save(out_dir + name);
    }
    if (log) {
      std::ostringstream msg;
      msg << "iter " << it << "/" << cfg.train.iterations;
      if (s.mean_reward) msg << "  reward " << *s.mean_reward << " +- " << *s.std_reward;
      if (s.policy_loss) msg << "  ploss " << *s.policy_loss << "  vloss " << *s.value_loss;
      msg << "  (" << s.seconds << "s)";
      log(msg.str());
    }
  }
  res.final_checkpoint = out_dir + "/final.ckpt";
  evaluator.save(res.final_checkpoint);
  return res;
}

std::vector<double> evaluate_episodes(const Evaluator& evaluator, const GameEnv& env,
                                      const SearchConfig& scfg, int episodes, uint64_t seed,
                                      int threads) {
  std::vector<double> scores(episodes);
  auto work = [&](int begin, int end) {
    for (int e = begin; e < end; ++e) {
      Rng rng(derive_seed(seed, 0xe7a1u + e));
      GameState s = env.new_game(rng);
      while (!s.terminal) {
        SearchResult r = search(s, evaluator, env, scfg, rng);
        s = env.step(s, r.chosen, rng).state;
      }
      scores[e] = s.score;
    }
  };
  if (threads <= 1 || episodes <= 1) {
    work(0, episodes);
  } else {
    int workers = std::min(threads, episodes);
    std::vector<std::thread> pool;
    int per = (episodes + workers - 1) / workers;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back(work, t * per, std::min(episodes, (t + 1) * per));
    for (auto& th : pool) th.join();
  }
  return scores;
}

}  // namespace blocklab
