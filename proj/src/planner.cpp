#include "blocklab/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace blocklab {

std::vector<HalvingPhase> sequential_halving_schedule(int n, int m) {
  if (m < 1 || n < m) throw std::invalid_argument("schedule requires n >= m >= 1");
  if (m == 1) return {{1, n}};
  int phases = static_cast<int>(std::ceil(std::log2(static_cast<double>(m))));
  std::vector<HalvingPhase> out;
  int count = m;
  int remaining = n;
  for (int k = 0; k < phases; ++k) {
    int visits = std::max(1, n / (phases * count));
    visits = std::min(visits, remaining / count);  // never exceed the budget
    out.push_back({count, visits});
    remaining -= visits * count;
    count = std::max(1, (count + 1) / 2);
  }
  // Leftover budget goes to the final phase.
  out.back().visits_per_candidate += remaining / out.back().candidates;
  return out;
}

double sigma_transform(double q_norm, int max_child_visits, const SearchConfig& cfg) {
  return (cfg.c_visit + max_child_visits) * cfg.c_scale * q_norm;
}

std::vector<int> gumbel_top_m(std::span<const double> masked_logits, int m, Rng& rng,
                              double gumbel_scale, std::vector<double>* gumbels_out) {
  std::vector<std::pair<double, int>> scored;
  if (gumbels_out) gumbels_out->assign(masked_logits.size(), 0.0);
  for (size_t i = 0; i < masked_logits.size(); ++i) {
    if (!std::isfinite(masked_logits[i])) continue;
    double g = gumbel_scale == 0.0 ? 0.0 : gumbel_scale * sample_gumbel(rng);
    if (gumbels_out) (*gumbels_out)[i] = g;
    scored.emplace_back(g + masked_logits[i], static_cast<int>(i));
  }
  if (scored.empty()) throw std::invalid_argument("gumbel_top_m: all logits masked");
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) {
              return a.first != b.first ? a.first > b.first : a.second < b.second;
            });
  std::vector<int> out;
  int take = std::min<int>(m, static_cast<int>(scored.size()));
  out.reserve(take);
  for (int i = 0; i < take; ++i) out.push_back(scored[i].second);
  return out;
}

int visit_matching_argmax(std::span<const double> improved_policy, std::span<const int> visits) {
  double total = 0.0;
  for (int v : visits) total += v;
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < improved_policy.size(); ++i) {
    double score = improved_policy[i] - visits[i] / (1.0 + total);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  return best;
}

namespace {

struct ChanceNode;

struct DecisionNode {
  GameState state;
  bool expanded = false;
  double value_estimate = 0.0;  // evaluator value (0 for terminal)
  int visits = 0;
  std::vector<int> legal;       // action indices, ascending
  std::vector<Action> actions;
  std::vector<double> logits;   // per legal entry
  std::vector<int> n;           // per legal entry
  std::vector<double> w;        // sum of backed-up values per legal entry
  std::vector<std::unique_ptr<ChanceNode>> kids;
  std::vector<std::vector<double>> backup_log;  // only with collect_tree_stats
};

struct ChanceNode {
  Afterstate after;
  double reward_norm = 0.0;
  int visits = 0;
  std::vector<std::unique_ptr<DecisionNode>> children;  // keyed by outcome id
};

struct ValueRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double normalize(double v) const {
    if (!(hi - lo > 1e-12)) return 0.5;
    return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
  }
};

struct Tree {
  const GameEnv& env;
  const Evaluator& evaluator;
  const SearchConfig& cfg;
  Rng& rng;
  DecisionNode root;
  ValueRange range;
  int simulations = 0;
  int evaluator_calls = 0;
  int max_depth = 0;
  bool log_backups = false;

  Tree(const GameState& state, const Evaluator& ev, const GameEnv& e, const SearchConfig& c,
       Rng& r)
      : env(e), evaluator(ev), cfg(c), rng(r) {
    root.state = state;
    max_depth = cfg.max_tree_depth > 0 ? cfg.max_tree_depth : 10 * env.board_cells();
    log_backups = cfg.collect_tree_stats;
  }

  void expand(DecisionNode& node) {
    std::vector<Action> acts = env.legal_actions(node.state);
    if (acts.empty())
      throw std::logic_error("search: non-terminal state with no legal action");
    Evaluation ev = evaluator.evaluate(env.encode_features(node.state));
    ++evaluator_calls;
    if (static_cast<int>(ev.policy_logits.size()) != env.action_space())
      throw std::invalid_argument("evaluator logits length does not match action space");
    node.actions = std::move(acts);
    node.legal.reserve(node.actions.size());
    node.logits.reserve(node.actions.size());
    for (const Action& a : node.actions) {
      node.legal.push_back(env.action_index(a));
      node.logits.push_back(ev.policy_logits[node.legal.back()]);
    }
    node.n.assign(node.actions.size(), 0);
    node.w.assign(node.actions.size(), 0.0);
    node.kids.resize(node.actions.size());
    if (log_backups) node.backup_log.resize(node.actions.size());
    node.value_estimate = ev.value;
    node.expanded = true;
    range.add(ev.value);
  }

  // Completed Q over the node's legal actions: visited entries use the
  // min-max normalized backed-up mean, unvisited entries the node's own
  // value estimate under the same normalization.
  std::vector<double> completed_q(const DecisionNode& node) const {
    std::vector<double> out(node.legal.size());
    for (size_t i = 0; i < node.legal.size(); ++i)
      out[i] = node.n[i] > 0 ? range.normalize(node.w[i] / node.n[i])
                             : range.normalize(node.value_estimate);
    return out;
  }

  std::vector<double> improved_policy(const DecisionNode& node) const {
    std::vector<double> cq = completed_q(node);
    int max_n = 0;
    for (int v : node.n) max_n = std::max(max_n, v);
    std::vector<double> scores(node.legal.size());
    for (size_t i = 0; i < scores.size(); ++i)
      scores[i] = node.logits[i] + sigma_transform(cq[i], max_n, cfg);
    double mx = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double& s : scores) {
      s = std::exp(s - mx);
      z += s;
    }
    for (double& s : scores) s /= z;
    return scores;
  }

  int select_child_nonroot(const DecisionNode& node) const {
    std::vector<double> pi = improved_policy(node);
    return visit_matching_argmax(pi, node.n);
  }

  ChanceNode& chance_child(DecisionNode& node, int legal_idx) {
    if (!node.kids[legal_idx]) {
      auto [after, reward] = env.apply_action(node.state, node.actions[legal_idx]);
      auto cn = std::make_unique<ChanceNode>();
      cn->after = std::move(after);
      cn->reward_norm = static_cast<double>(reward) / env.rules().reward_cap;
      cn->children.resize(env.catalog().size());
      node.kids[legal_idx] = std::move(cn);
    }
    return *node.kids[legal_idx];
  }

  // One simulation forced through the given root candidate. Alternates
  // decision and chance nodes, samples outcomes by their exact
  // probabilities, expands one leaf and backs up reward-plus-value.
  void simulate(int root_legal_idx) {
    struct Step {
      DecisionNode* node;
      int idx;
      ChanceNode* chance;
    };
    std::vector<Step> path;
    DecisionNode* node = &root;
    int choose = root_legal_idx;
    int depth = 1;
    double leaf_value = 0.0;
    while (true) {
      ChanceNode& cn = chance_child(*node, choose);
      int outcome = env.sample_shape(rng);
      if (!cn.children[outcome]) {
        auto child = std::make_unique<DecisionNode>();
        child->state = env.apply_chance(cn.after, {outcome, env.catalog().draw_weights[outcome]});
        cn.children[outcome] = std::move(child);
      }
      path.push_back({node, choose, &cn});
      node = cn.children[outcome].get();
      ++depth;
      if (node->state.terminal) {
        leaf_value = 0.0;  // exact remaining value
        break;
      }
      if (!node->expanded) {
        expand(*node);
        leaf_value = node->value_estimate;
        break;
      }
      if (depth > max_depth) {
        leaf_value = node->value_estimate;
        break;
      }
      choose = select_child_nonroot(*node);
    }
    node->visits += 1;
    double v = leaf_value;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      v = it->chance->reward_norm + v;
      it->chance->visits += 1;
      it->node->n[it->idx] += 1;
      it->node->w[it->idx] += v;
      it->node->visits += 1;
      if (log_backups) it->node->backup_log[it->idx].push_back(v);
      range.add(it->node->w[it->idx] / it->node->n[it->idx]);
    }
    ++simulations;
  }
};

// Walks the tree checking the alternation bookkeeping: a decision node's
// visits equal its expansion visit plus the traversals into its chance
// children, a chance node's visits equal the sum of its decision children's
// visits, and every edge Q equals the mean of its logged backups.
void collect_stats(const DecisionNode& node, TreeStats& ts) {
  ++ts.decision_nodes;
  if (!node.expanded) return;
  int through = 0;
  for (size_t i = 0; i < node.kids.size(); ++i) {
    through += node.n[i];
    if (!node.kids[i]) {
      if (node.n[i] != 0) ts.alternation_ok = false;
      continue;
    }
    const ChanceNode& cn = *node.kids[i];
    ++ts.chance_nodes;
    if (cn.visits != node.n[i]) ts.alternation_ok = false;
    int child_visits = 0;
    for (const auto& child : cn.children)
      if (child) {
        child_visits += child->visits;
        collect_stats(*child, ts);
      }
    if (child_visits != cn.visits) ts.alternation_ok = false;
    if (!node.backup_log.empty()) {
      const auto& log = node.backup_log[i];
      if (static_cast<int>(log.size()) != node.n[i]) ts.alternation_ok = false;
      if (!log.empty()) {
        double sum = 0.0;
        for (double v : log) sum += v;
        ts.max_backup_error =
            std::max(ts.max_backup_error, std::abs(sum / log.size() - node.w[i] / node.n[i]));
      }
    }
  }
  if (node.visits != through + 1) ts.alternation_ok = false;
}

}  // namespace

SearchResult search(const GameState& state, const Evaluator& evaluator, const GameEnv& env,
                    const SearchConfig& cfg, Rng& rng, std::string* trace) {
  if (state.terminal) throw std::invalid_argument("search: state is terminal");
  if (cfg.simulations < 1 || cfg.max_candidates < 1 ||
      cfg.simulations < cfg.max_candidates || cfg.c_visit <= 0.0 || cfg.c_scale <= 0.0)
    throw std::invalid_argument("search: invalid config (need n >= m >= 1, c_visit, c_scale > 0)");

  Tree tree(state, evaluator, env, cfg, rng);
  tree.expand(tree.root);
  tree.root.visits = 1;  // own expansion visit

  DecisionNode& root = tree.root;
  const int n_legal = static_cast<int>(root.legal.size());

  // Gumbel-Top-k over the masked root logits.
  std::vector<double> masked(env.action_space(), -std::numeric_limits<double>::infinity());
  for (int i = 0; i < n_legal; ++i) masked[root.legal[i]] = root.logits[i];
  std::vector<double> gumbels;
  std::vector<int> top =
      gumbel_top_m(masked, cfg.max_candidates, rng, cfg.gumbel_scale, &gumbels);

  // Map back to legal-list indices (legal is ascending in action index).
  std::vector<int> candidates;
  candidates.reserve(top.size());
  for (int action_idx : top) {
    auto it = std::lower_bound(root.legal.begin(), root.legal.end(), action_idx);
    candidates.push_back(static_cast<int>(it - root.legal.begin()));
  }

  std::vector<HalvingPhase> schedule =
      sequential_halving_schedule(cfg.simulations, static_cast<int>(candidates.size()));

  auto candidate_score = [&](int li) {
    int max_n = 0;
    for (int v : root.n) max_n = std::max(max_n, v);
    double q_hat = root.n[li] > 0 ? tree.range.normalize(root.w[li] / root.n[li])
                                  : tree.range.normalize(root.value_estimate);
    return gumbels[root.legal[li]] + root.logits[li] + sigma_transform(q_hat, max_n, cfg);
  };
  auto prune_to = [&](int keep) {
    std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
      double sa = candidate_score(a), sb = candidate_score(b);
      return sa != sb ? sa > sb : a < b;
    });
    if (static_cast<int>(candidates.size()) > keep) candidates.resize(keep);
  };

  std::ostringstream tr;
  if (trace) {
    tr << "search: " << n_legal << " legal, " << candidates.size() << " candidates, n="
       << cfg.simulations << "\n";
    for (size_t k = 0; k < schedule.size(); ++k)
      tr << "  phase " << k + 1 << ": " << schedule[k].candidates << " candidates x "
         << schedule[k].visits_per_candidate << " visits\n";
  }

  for (size_t k = 0; k < schedule.size(); ++k) {
    prune_to(schedule[k].candidates);
    for (int v = 0; v < schedule[k].visits_per_candidate; ++v)
      for (int li : candidates) tree.simulate(li);
    if (trace) {
      tr << "  after phase " << k + 1 << ":";
      for (int li : candidates)
        tr << " a" << root.legal[li] << " g+l+s=" << candidate_score(li) << " n=" << root.n[li];
      tr << "\n";
    }
  }
  prune_to(1);
  int chosen_li = candidates.front();

  SearchResult res;
  res.chosen = root.actions[chosen_li];
  res.chosen_index = root.legal[chosen_li];
  res.schedule = schedule;
  res.simulations = tree.simulations;
  res.evaluator_calls = tree.evaluator_calls;

  std::vector<double> pi = tree.improved_policy(root);
  res.policy_target.assign(env.action_space(), 0.0);
  for (int i = 0; i < n_legal; ++i) res.policy_target[root.legal[i]] = pi[i];

  std::vector<double> cq = tree.completed_q(root);
  res.root_value = 0.0;
  for (int i = 0; i < n_legal; ++i) {
    double raw = root.n[i] > 0 ? root.w[i] / root.n[i] : root.value_estimate;
    res.root_value += pi[i] * raw;
  }
  res.root_actions.reserve(n_legal);
  for (int i = 0; i < n_legal; ++i) {
    RootActionInfo info;
    info.action_index = root.legal[i];
    info.logit = root.logits[i];
    info.gumbel = gumbels[root.legal[i]];
    info.visits = root.n[i];
    info.q = root.n[i] > 0 ? root.w[i] / root.n[i] : 0.0;
    info.completed_q = cq[i];
    info.candidate = false;
    res.root_actions.push_back(info);
  }
  // `candidates` was pruned; recover the original top-m set from `top`.
  for (int action_idx : top)
    for (auto& info : res.root_actions)
      if (info.action_index == action_idx) info.candidate = true;

  if (cfg.collect_tree_stats) {
    TreeStats ts;
    collect_stats(root, ts);
    res.tree_stats = ts;
  }
  if (trace) {
    tr << "  chosen a" << res.chosen_index << " (slot " << res.chosen.slot << ", row "
       << res.chosen.row << ", col " << res.chosen.col << "), simulations " << res.simulations
       << "\n";
    *trace += tr.str();
  }
  return res;
}

}  // namespace blocklab
