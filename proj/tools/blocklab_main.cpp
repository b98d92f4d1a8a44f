#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blocklab/config.hpp"
#include "blocklab/csv.hpp"
#include "blocklab/metrics.hpp"
#include "blocklab/oracle.hpp"
#include "blocklab/plots.hpp"
#include "blocklab/sweep.hpp"
#include "blocklab/training.hpp"

namespace {

using namespace blocklab;

struct SharedOpts {
  std::string config_path;
  std::string out_dir = "runs/out";
  std::vector<std::string> sets;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  bool deterministic = false;
  // rule-set overrides
  std::optional<int> board_rows, board_cols, h, p, reward_cap;
  std::optional<std::string> extra_blocks, catalog, clear_axes;
};

void add_shared(CLI::App* cmd, SharedOpts& o) {
  cmd->add_option("--config", o.config_path, "config file (key = value lines)");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
  cmd->add_option("--set", o.sets, "override any config key, e.g. --set lr=0.05")
      ->type_name("KEY=VALUE");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_flag("--deterministic", o.deterministic,
                "single-threaded bit-reproducible mode (zeroes the seconds column)");
  cmd->add_option("--board-rows", o.board_rows, "board rows");
  cmd->add_option("--board-cols", o.board_cols, "board cols");
  cmd->add_option("--holding", o.h, "holding blocks (config key: h)");
  cmd->add_option("--preview", o.p, "preview holding blocks (config key: p)");
  cmd->add_option("--extra-blocks", o.extra_blocks, "pentomino subset of U,V,X,T ('-' for none)");
  cmd->add_option("--reward-cap", o.reward_cap, "episode score cap");
  cmd->add_option("--catalog", o.catalog, "catalog name (standard, mono1, mixed3)");
  cmd->add_option("--clear-axes", o.clear_axes, "both, rows or cols");
}

AppConfig build_config(const SharedOpts& o) {
  AppConfig cfg = o.config_path.empty() ? AppConfig{} : load_config(o.config_path);
  for (const std::string& kv : o.sets) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects KEY=VALUE, got '" + kv + "'");
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.board_rows) cfg.rules.board_rows = *o.board_rows;
  if (o.board_cols) cfg.rules.board_cols = *o.board_cols;
  if (o.h) cfg.rules.h = *o.h;
  if (o.p) cfg.rules.p = *o.p;
  if (o.extra_blocks) cfg.rules.extra_blocks = ExtraBlocks::parse(*o.extra_blocks);
  if (o.reward_cap) cfg.rules.reward_cap = *o.reward_cap;
  if (o.catalog) cfg.rules.catalog = *o.catalog;
  if (o.clear_axes) cfg.rules.clear_axes = parse_clear_axes(*o.clear_axes);
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.deterministic) cfg.deterministic = true;
  return cfg;
}

GameEnv make_env(const AppConfig& cfg) {
  RuleSet rules = validate_ruleset(cfg.rules);
  return GameEnv(rules, catalog_for(rules));
}

void log_line(const std::string& s) { std::cout << s << "\n" << std::flush; }

int cmd_train(const SharedOpts& o) {
  AppConfig cfg = build_config(o);
  GameEnv env = make_env(cfg);
  std::filesystem::create_directories(o.out_dir);
  std::cout << "training " << env.rules().id() << " seed " << cfg.seed << "\n";
  TrainRunResult res = train_run(env, cfg, o.out_dir, log_line);
  std::vector<double> rewards = mean_reward_series(res.series);
  if (!rewards.empty()) {
    double tr = training_reward(rewards, cfg.train.metric_window);
    auto ci = convergence_iteration(rewards, cfg.rules.reward_cap, cfg.train.convergence_eps);
    std::cout << "training_reward(window=" << cfg.train.metric_window << ") " << format_double(tr)
              << "\n";
    std::cout << "convergence_iteration " << (ci ? std::to_string(*ci) : "-") << "\n";
  }
  std::cout << "stats: " << res.stats_path << "\ncheckpoint: " << res.final_checkpoint << "\n";
  return 0;
}

int cmd_sweep(const SharedOpts& o) {
  AppConfig cfg = build_config(o);
  std::vector<SweepResult> results = run_sweep(cfg, o.out_dir, log_line);
  int failed = 0;
  for (const SweepResult& r : results) failed += r.failed();
  std::cout << "sweep finished: " << results.size() << " cells, " << failed << " failed\n";
  std::cout << "results: " << o.out_dir << "/sweep_results.csv\n";
  return failed == 0 ? 0 : 1;
}

int cmd_eval(const SharedOpts& o, const std::string& checkpoint, int episodes) {
  AppConfig cfg = build_config(o);
  GameEnv env = make_env(cfg);
  MlpEvaluator evaluator = MlpEvaluator::load(checkpoint);
  if (evaluator.arch().input != env.feature_length() ||
      evaluator.arch().actions != env.action_space())
    throw std::invalid_argument("checkpoint arch does not match the rule set");
  std::vector<double> scores =
      evaluate_episodes(evaluator, env, cfg.search, episodes, cfg.seed, cfg.threads);
  double sum = 0.0, sq = 0.0;
  for (double s : scores) {
    sum += s;
    sq += s * s;
  }
  double mean = sum / episodes;
  double sd = std::sqrt(std::max(0.0, sq / episodes - mean * mean));
  std::cout << "episodes " << episodes << " mean " << format_double(mean) << " std "
            << format_double(sd) << "\n";
  return 0;
}

int cmd_oracle(const SharedOpts& o, const std::string& world, const std::string& csv_out) {
  RuleSet rules = o.config_path.empty() && world.rfind("oracle-", 0) == 0
                      ? oracle_world(world)
                      : validate_ruleset(build_config(o).rules);
  GameEnv env(rules, catalog_for(rules));
  ExpectimaxSolver solver(env);
  GameState empty = env.new_game(uint64_t{0});
  // Exact value of the empty board: average the root value over all initial
  // holding/preview fills, weighting by the draw probabilities.
  OracleEntry e = solver.solve(empty);
  std::cout << "world " << rules.id() << "\n";
  std::cout << "V(seed-0 initial state) = " << format_double(e.value) << "\n";
  std::cout << "memo entries " << solver.memo_size() << "\n";
  if (!csv_out.empty()) {
    write_file(csv_out, solver.export_csv());
    std::cout << "table: " << csv_out << "\n";
  }
  return 0;
}

int cmd_plot(const SharedOpts& o, const std::vector<std::string>& stats_files,
             const std::string& sweep_file) {
  std::filesystem::create_directories(o.out_dir);
  for (const std::string& path : stats_files) {
    std::vector<IterationStats> series = parse_stats_csv(read_file(path));
    std::string name = std::filesystem::path(path).stem().string();
    std::string out = o.out_dir + "/" + name + "_curve.svg";
    write_file(out, curve_svg(series, name));
    std::cout << "wrote " << out << "\n";
  }
  if (!sweep_file.empty()) {
    std::vector<SweepResult> results = parse_sweep_csv(read_file(sweep_file));
    // One heatmap pair per block set present in the sweep.
    std::vector<std::string> seen;
    for (const SweepResult& r : results) {
      std::string b = r.extra.str();
      if (std::find(seen.begin(), seen.end(), b) != seen.end()) continue;
      seen.push_back(b);
      std::vector<SweepResult> group;
      for (const SweepResult& g : results)
        if (g.extra.str() == b) group.push_back(g);
      for (const char* metric : {"training_reward", "convergence_iteration"}) {
        std::string out = o.out_dir + "/sweep_" + b + "_" + metric + ".svg";
        write_file(out, heatmap_svg(group, metric, std::string(metric) + " (blocks " + b + ")"));
        std::cout << "wrote " << out << "\n";
      }
    }
  }
  return 0;
}

int cmd_baseline(const SharedOpts& o, int episodes) {
  AppConfig cfg = build_config(o);
  GameEnv env = make_env(cfg);
  auto [mean, sd] = random_baseline(env, episodes, cfg.seed);
  std::cout << "random baseline on " << env.rules().id() << ": mean " << format_double(mean)
            << " std " << format_double(sd) << " over " << episodes << " episodes\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blocklab: difficulty assessment for block-puzzle rule variants"};
  app.require_subcommand(1);

  SharedOpts train_o, sweep_o, eval_o, oracle_o, plot_o, base_o;
  CLI::App* train = app.add_subcommand("train", "train one rule set");
  add_shared(train, train_o);

  CLI::App* sweep = app.add_subcommand("sweep", "train a grid of rule variants");
  add_shared(sweep, sweep_o);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a frozen checkpoint");
  add_shared(eval, eval_o);
  std::string checkpoint;
  int eval_episodes = 200;
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--episodes", eval_episodes, "episode count");

  CLI::App* oracle = app.add_subcommand("oracle", "solve a preset world exactly");
  add_shared(oracle, oracle_o);
  std::string world = "oracle-4x4-mixed", oracle_csv;
  oracle->add_option("--world", world, "oracle-2x2-mono or oracle-4x4-mixed");
  oracle->add_option("--csv", oracle_csv, "export the solved table to CSV");

  CLI::App* plot = app.add_subcommand("plot", "render stats/sweep CSVs to SVG");
  add_shared(plot, plot_o);
  std::vector<std::string> stats_files;
  std::string sweep_file;
  plot->add_option("--stats", stats_files, "iteration_stats.csv files");
  plot->add_option("--sweep", sweep_file, "sweep_results.csv file");

  CLI::App* baseline = app.add_subcommand("baseline", "random-policy baseline");
  add_shared(baseline, base_o);
  int base_episodes = 1000;
  baseline->add_option("--episodes", base_episodes, "episode count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train_o);
    if (sweep->parsed()) return cmd_sweep(sweep_o);
    if (eval->parsed()) return cmd_eval(eval_o, checkpoint, eval_episodes);
    if (oracle->parsed()) return cmd_oracle(oracle_o, world, oracle_csv);
    if (plot->parsed()) return cmd_plot(plot_o, stats_files, sweep_file);
    if (baseline->parsed()) return cmd_baseline(base_o, base_episodes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
