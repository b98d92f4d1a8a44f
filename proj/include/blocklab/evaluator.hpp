#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace blocklab {

struct Evaluation {
  std::vector<double> policy_logits;  // one logit per (slot, anchor) action
  double value = 0.0;                 // predicted remaining return / reward_cap, in [0,1]
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual Evaluation evaluate(std::span<const double> features) const = 0;
  virtual int action_count() const = 0;
};

// Zero logits and value 0.5 for any input; baseline for planner tests.
class UniformEvaluator : public Evaluator {
 public:
  explicit UniformEvaluator(int actions) : actions_(actions) {}
  Evaluation evaluate(std::span<const double>) const override {
    return {std::vector<double>(actions_, 0.0), 0.5};
  }
  int action_count() const override { return actions_; }

 private:
  int actions_;
};

struct MlpArch {
  int input = 0;
  std::vector<int> hidden;  // may be empty: linear model
  int actions = 0;

  bool operator==(const MlpArch&) const = default;
};

struct TrainSample {
  std::vector<double> features;
  // Probability over legal actions (zeros elsewhere), stored sparsely.
  // The support doubles as the legality mask for the masked softmax.
  std::vector<std::pair<int, double>> policy_target;
  double value_target = 0.0;  // in [0,1]
};

using TrainBatch = std::vector<TrainSample>;

struct TrainStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double grad_norm = 0.0;
};

// Fully connected policy/value network: tanh trunk, linear policy head,
// sigmoid value head. All math in double; parameters live in one flat
// array so checkpointing, momentum and finite differences share indexing.
class MlpEvaluator : public Evaluator {
 public:
  // Scaled-uniform (Glorot) init, deterministic under seed.
  MlpEvaluator(MlpArch arch, uint64_t seed);

  Evaluation evaluate(std::span<const double> features) const override;
  int action_count() const override { return arch_.actions; }
  const MlpArch& arch() const { return arch_; }
  size_t param_count() const { return params_.size(); }
  double param(size_t i) const { return params_[i]; }

  // One SGD-with-momentum step on mean cross-entropy plus weighted squared
  // value error. Throws std::invalid_argument on an empty batch or shape
  // mismatch and std::runtime_error on a non-finite loss.
  TrainStats train_batch(const TrainBatch& batch, double lr, double momentum = 0.9,
                         double value_loss_weight = 1.0);

  // Max relative error between analytic and central-difference gradients on
  // a random subsample of at least `probes` parameters. `bias_fault` is a
  // test hook that corrupts one analytic bias gradient.
  double gradient_check(const TrainSample& sample, double eps, int probes = 200,
                        uint64_t seed = 12345, double bias_fault = 0.0,
                        double value_loss_weight = 1.0) const;

  // Checkpoint format: magic "SGBZ1", u32 version, arch descriptor, then
  // little-endian float32 parameters in layer order.
  void save(const std::string& path) const;
  static MlpEvaluator load(const std::string& path);

 private:
  struct Layer {
    int in = 0, out = 0;
    size_t w = 0, b = 0;  // offsets into the flat parameter array
  };

  void forward(std::span<const double> features, std::vector<std::vector<double>>& acts,
               std::vector<double>& logits, double& value) const;
  std::pair<double, double> loss_and_grad(const TrainSample& sample, std::vector<double>* grad,
                                          double value_loss_weight = 1.0) const;

  MlpArch arch_;
  std::vector<Layer> trunk_;
  Layer policy_head_;
  Layer value_head_;
  std::vector<double> params_;
  std::vector<double> velocity_;
};

}  // namespace blocklab
