#include "blocklab/sweep.hpp"

#include <charconv>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "blocklab/csv.hpp"
#include "blocklab/metrics.hpp"
#include "blocklab/training.hpp"

namespace blocklab {

uint64_t cell_seed(uint64_t master_seed, const SweepCell& cell) {
  uint64_t coord = static_cast<uint64_t>(cell.h) << 32 | static_cast<uint64_t>(cell.p) << 16 |
                   (cell.extra.u5 << 3 | cell.extra.v5 << 2 | cell.extra.x5 << 1 | cell.extra.t5);
  return derive_seed(master_seed, splitmix64(coord));
}

std::vector<SweepCell> sweep_cells(const AppConfig& cfg) {
  std::vector<int> hs = cfg.sweep.hs.empty() ? std::vector<int>{cfg.rules.h} : cfg.sweep.hs;
  std::vector<int> ps = cfg.sweep.ps.empty() ? std::vector<int>{cfg.rules.p} : cfg.sweep.ps;
  std::vector<ExtraBlocks> bs = cfg.sweep.block_sets.empty()
                                    ? std::vector<ExtraBlocks>{cfg.rules.extra_blocks}
                                    : cfg.sweep.block_sets;
  std::vector<SweepCell> cells;
  for (int h : hs)
    for (int p : ps)
      for (const ExtraBlocks& b : bs) cells.push_back({h, p, b});
  return cells;
}

namespace {

SweepResult run_cell(const AppConfig& base, const SweepCell& cell, const std::string& out_dir) {
  SweepResult res;
  res.h = cell.h;
  res.p = cell.p;
  res.extra = cell.extra;
  res.seed = cell_seed(base.seed, cell);
  AppConfig cfg = base;
  cfg.rules.h = cell.h;
  cfg.rules.p = cell.p;
  cfg.rules.extra_blocks = cell.extra;
  cfg.seed = res.seed;
  cfg.threads = 1;  // concurrency lives at the cell level
  cfg.sweep = {};
  try {
    RuleSet rules = validate_ruleset(cfg.rules);
    res.variant_id = rules.id();
    std::string cell_dir = out_dir + "/" + res.variant_id;
    std::filesystem::create_directories(cell_dir);
    GameEnv env(rules, catalog_for(rules));
    TrainRunResult run = train_run(env, cfg, cell_dir);
    res.stats_path = run.stats_path;
    // Metric purity: compute both metrics from the CSV on disk.
    std::vector<double> rewards =
        mean_reward_series(parse_stats_csv(read_file(run.stats_path)));
    res.training_reward = training_reward(rewards, cfg.train.metric_window);
    res.convergence_iteration =
        convergence_iteration(rewards, cfg.rules.reward_cap, cfg.train.convergence_eps);
  } catch (const std::exception& e) {
    res.error = e.what();
    if (res.variant_id.empty())
      res.variant_id = "h" + std::to_string(cell.h) + "-p" + std::to_string(cell.p) + "-b" +
                       cell.extra.str();
  }
  return res;
}

}  // namespace

std::vector<SweepResult> run_sweep(const AppConfig& cfg, const std::string& out_dir,
                                   const std::function<void(const std::string&)>& log) {
  std::vector<SweepCell> cells = sweep_cells(cfg);
  std::vector<SweepResult> results(cells.size());
  std::filesystem::create_directories(out_dir);

  std::mutex log_mutex;
  auto work = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      results[i] = run_cell(cfg, cells[i], out_dir);
      if (log) {
        std::lock_guard<std::mutex> guard(log_mutex);
        std::ostringstream msg;
        msg << "cell " << results[i].variant_id;
        if (results[i].failed())
          msg << " FAILED: " << results[i].error;
        else
          msg << " training_reward "
              << (results[i].training_reward ? format_double(*results[i].training_reward) : "-");
        log(msg.str());
      }
    }
  };
  int workers = cfg.deterministic ? 1 : std::min<int>(cfg.threads, cells.size());
  if (workers <= 1) {
    work(0, cells.size());
  } else {
    std::vector<std::thread> pool;
    size_t per = (cells.size() + workers - 1) / workers;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back(work, t * per, std::min(cells.size(), (t + 1) * per));
    for (auto& th : pool) th.join();
  }
  write_file(out_dir + "/sweep_results.csv", sweep_csv(results));
  return results;
}

std::string sweep_csv(const std::vector<SweepResult>& results) {
  std::ostringstream os;
  os << "variant_id,h,p,extra_blocks,training_reward,convergence_iteration,seed,stats_path\n";
  for (const SweepResult& r : results) {
    os << r.variant_id << "," << r.h << "," << r.p << "," << r.extra.str() << ",";
    if (r.failed())
      os << "ERROR,-";
    else
      os << (r.training_reward ? format_double(*r.training_reward) : "-") << ","
         << (r.convergence_iteration ? std::to_string(*r.convergence_iteration) : "-");
    os << "," << r.seed << "," << r.stats_path << "\n";
  }
  return os.str();
}

std::vector<SweepResult> parse_sweep_csv(std::string_view text) {
  CsvTable t = parse_csv(text);
  int c_id = t.column("variant_id"), c_h = t.column("h"), c_p = t.column("p"),
      c_b = t.column("extra_blocks"), c_tr = t.column("training_reward"),
      c_ci = t.column("convergence_iteration"), c_seed = t.column("seed"),
      c_sp = t.column("stats_path");
  std::vector<SweepResult> out;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    SweepResult s;
    s.variant_id = row[c_id];
    s.h = static_cast<int>(*parse_optional_double(row[c_h], r + 2, c_h));
    s.p = static_cast<int>(*parse_optional_double(row[c_p], r + 2, c_p));
    s.extra = ExtraBlocks::parse(row[c_b]);
    if (row[c_tr] == "ERROR") {
      s.error = "ERROR";
    } else {
      s.training_reward = parse_optional_double(row[c_tr], r + 2, c_tr);
      if (auto ci = parse_optional_double(row[c_ci], r + 2, c_ci))
        s.convergence_iteration = static_cast<int>(*ci);
    }
    uint64_t seed = 0;
    auto [pp, ec] = std::from_chars(row[c_seed].data(), row[c_seed].data() + row[c_seed].size(), seed);
    if (ec != std::errc{} || pp != row[c_seed].data() + row[c_seed].size())
      throw std::invalid_argument("sweep csv: bad seed at row " + std::to_string(r + 2));
    s.seed = seed;
    s.stats_path = row[c_sp];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace blocklab
