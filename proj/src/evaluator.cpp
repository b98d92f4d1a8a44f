#include "blocklab/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "blocklab/rng.hpp"

namespace blocklab {

namespace {

double dot(const double* w, const double* x, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += w[i] * x[i];
  return acc;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

MlpEvaluator::MlpEvaluator(MlpArch arch, uint64_t seed) : arch_(std::move(arch)) {
  if (arch_.input <= 0 || arch_.actions <= 0)
    throw std::invalid_argument("evaluator arch: input and actions must be positive");
  for (int w : arch_.hidden)
    if (w <= 0) throw std::invalid_argument("evaluator arch: hidden widths must be positive");

  size_t off = 0;
  auto add_layer = [&off](int in, int out) {
    Layer l{in, out, off, off + static_cast<size_t>(in) * out};
    off = l.b + out;
    return l;
  };
  int prev = arch_.input;
  for (int w : arch_.hidden) {
    trunk_.push_back(add_layer(prev, w));
    prev = w;
  }
  policy_head_ = add_layer(prev, arch_.actions);
  value_head_ = add_layer(prev, 1);
  params_.assign(off, 0.0);
  velocity_.assign(off, 0.0);

  Rng rng(seed);
  auto init_layer = [&](const Layer& l) {
    double s = std::sqrt(6.0 / (l.in + l.out));
    for (size_t i = 0; i < static_cast<size_t>(l.in) * l.out; ++i)
      params_[l.w + i] = (2.0 * uniform_double(rng) - 1.0) * s;
    // biases stay zero
  };
  for (const Layer& l : trunk_) init_layer(l);
  init_layer(policy_head_);
  init_layer(value_head_);
}

void MlpEvaluator::forward(std::span<const double> features,
                           std::vector<std::vector<double>>& acts, std::vector<double>& logits,
                           double& value) const {
  if (static_cast<int>(features.size()) != arch_.input)
    throw std::invalid_argument("evaluator: feature length " + std::to_string(features.size()) +
                                " does not match arch input " + std::to_string(arch_.input));
  acts.clear();
  acts.emplace_back(features.begin(), features.end());
  for (const Layer& l : trunk_) {
    std::vector<double> x(l.out);
    const double* in = acts.back().data();
    for (int o = 0; o < l.out; ++o)
      x[o] = std::tanh(dot(&params_[l.w + static_cast<size_t>(o) * l.in], in, l.in) +
                       params_[l.b + o]);
    acts.push_back(std::move(x));
  }
  const double* top = acts.back().data();
  logits.resize(arch_.actions);
  for (int a = 0; a < arch_.actions; ++a)
    logits[a] = dot(&params_[policy_head_.w + static_cast<size_t>(a) * policy_head_.in], top,
                    policy_head_.in) +
                params_[policy_head_.b + a];
  value = sigmoid(dot(&params_[value_head_.w], top, value_head_.in) + params_[value_head_.b]);
}

Evaluation MlpEvaluator::evaluate(std::span<const double> features) const {
  std::vector<std::vector<double>> acts;
  Evaluation ev;
  forward(features, acts, ev.policy_logits, ev.value);
  return ev;
}

std::pair<double, double> MlpEvaluator::loss_and_grad(const TrainSample& sample,
                                                      std::vector<double>* grad,
                                                      double value_loss_weight) const {
  std::vector<std::vector<double>> acts;
  std::vector<double> logits;
  double value = 0.0;
  forward(sample.features, acts, logits, value);
  if (sample.policy_target.empty())
    throw std::invalid_argument("train sample has empty policy target");

  // Masked softmax over the target support.
  double mx = -std::numeric_limits<double>::infinity();
  for (auto [a, t] : sample.policy_target) {
    if (a < 0 || a >= arch_.actions)
      throw std::invalid_argument("policy target action index out of range");
    mx = std::max(mx, logits[a]);
  }
  double z = 0.0;
  for (auto [a, t] : sample.policy_target) z += std::exp(logits[a] - mx);
  double log_z = std::log(z) + mx;

  double ce = 0.0;
  for (auto [a, t] : sample.policy_target)
    if (t > 0.0) ce -= t * (logits[a] - log_z);
  double verr = value - sample.value_target;
  double se = verr * verr;

  if (grad) {
    // d(ce)/d(logit_a) = p_a - t_a on the support; zero elsewhere.
    std::vector<std::pair<int, double>> dlogit;
    dlogit.reserve(sample.policy_target.size());
    for (auto [a, t] : sample.policy_target)
      dlogit.emplace_back(a, std::exp(logits[a] - log_z) - t);
    double dvz = value_loss_weight * 2.0 * verr * value * (1.0 - value);

    const std::vector<double>& top = acts.back();
    std::vector<double> dtop(top.size(), 0.0);
    for (auto [a, g] : dlogit) {
      const double* w = &params_[policy_head_.w + static_cast<size_t>(a) * policy_head_.in];
      for (int i = 0; i < policy_head_.in; ++i) dtop[i] += g * w[i];
      double* gw = &(*grad)[policy_head_.w + static_cast<size_t>(a) * policy_head_.in];
      for (int i = 0; i < policy_head_.in; ++i) gw[i] += g * top[i];
      (*grad)[policy_head_.b + a] += g;
    }
    {
      const double* w = &params_[value_head_.w];
      for (int i = 0; i < value_head_.in; ++i) dtop[i] += dvz * w[i];
      double* gw = &(*grad)[value_head_.w];
      for (int i = 0; i < value_head_.in; ++i) gw[i] += dvz * top[i];
      (*grad)[value_head_.b] += dvz;
    }
    std::vector<double> dout = std::move(dtop);
    for (int li = static_cast<int>(trunk_.size()) - 1; li >= 0; --li) {
      const Layer& l = trunk_[li];
      const std::vector<double>& x = acts[li + 1];   // tanh outputs of this layer
      const std::vector<double>& in = acts[li];
      std::vector<double> din(l.in, 0.0);
      for (int o = 0; o < l.out; ++o) {
        double dz = dout[o] * (1.0 - x[o] * x[o]);
        const double* w = &params_[l.w + static_cast<size_t>(o) * l.in];
        double* gw = &(*grad)[l.w + static_cast<size_t>(o) * l.in];
        for (int i = 0; i < l.in; ++i) {
          din[i] += dz * w[i];
          gw[i] += dz * in[i];
        }
        (*grad)[l.b + o] += dz;
      }
      dout = std::move(din);
    }
  }
  return {ce, se};
}

TrainStats MlpEvaluator::train_batch(const TrainBatch& batch, double lr, double momentum,
                                     double value_loss_weight) {
  if (batch.empty()) throw std::invalid_argument("train_batch: empty batch");
  std::vector<double> grad(params_.size(), 0.0);
  TrainStats stats;
  for (const TrainSample& s : batch) {
    auto [ce, se] = loss_and_grad(s, &grad, value_loss_weight);
    stats.policy_loss += ce;
    stats.value_loss += se;
  }
  const double inv = 1.0 / batch.size();
  stats.policy_loss *= inv;
  stats.value_loss *= inv;
  if (!std::isfinite(stats.policy_loss) || !std::isfinite(stats.value_loss))
    throw std::runtime_error("train_batch: non-finite loss (policy " +
                             std::to_string(stats.policy_loss) + ", value " +
                             std::to_string(stats.value_loss) + ")");
  double norm2 = 0.0;
  for (size_t i = 0; i < params_.size(); ++i) {
    double g = grad[i] * inv;
    norm2 += g * g;
    velocity_[i] = momentum * velocity_[i] + g;
    params_[i] -= lr * velocity_[i];
  }
  stats.grad_norm = std::sqrt(norm2);
  return stats;
}

double MlpEvaluator::gradient_check(const TrainSample& sample, double eps, int probes,
                                    uint64_t seed, double bias_fault,
                                    double value_loss_weight) const {
  std::vector<double> grad(params_.size(), 0.0);
  loss_and_grad(sample, &grad, value_loss_weight);
  if (bias_fault != 0.0) {
    size_t b = trunk_.empty() ? value_head_.b : trunk_.front().b;
    grad[b] += bias_fault;
  }

  MlpEvaluator probe = *this;  // finite differences perturb a copy
  auto loss_at = [&](size_t idx, double delta) {
    probe.params_[idx] = params_[idx] + delta;
    auto [ce, se] = probe.loss_and_grad(sample, nullptr, value_loss_weight);
    probe.params_[idx] = params_[idx];
    return ce + value_loss_weight * se;
  };

  Rng rng(seed);
  std::vector<size_t> idx;
  if (params_.size() <= static_cast<size_t>(probes)) {
    idx.resize(params_.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  } else {
    for (int i = 0; i < probes; ++i) idx.push_back(uniform_index(rng, params_.size()));
    size_t fault_at = trunk_.empty() ? value_head_.b : trunk_.front().b;
    if (bias_fault != 0.0) idx.push_back(fault_at);
  }

  double worst = 0.0;
  for (size_t i : idx) {
    double num = (loss_at(i, eps) - loss_at(i, -eps)) / (2.0 * eps);
    double rel = std::abs(grad[i] - num) / std::max(std::abs(grad[i]) + std::abs(num), 1e-8);
    worst = std::max(worst, rel);
  }
  return worst;
}

namespace {

constexpr char kMagic[5] = {'S', 'G', 'B', 'Z', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

void put_f32(std::ostream& os, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(os, bits);
}

float get_f32(std::istream& is) {
  uint32_t bits = get_u32(is);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

void MlpEvaluator::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  os.write(kMagic, 5);
  put_u32(os, kVersion);
  put_u32(os, static_cast<uint32_t>(arch_.input));
  put_u32(os, static_cast<uint32_t>(arch_.hidden.size()));
  for (int w : arch_.hidden) put_u32(os, static_cast<uint32_t>(w));
  put_u32(os, static_cast<uint32_t>(arch_.actions));
  for (double v : params_) put_f32(os, static_cast<float>(v));
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

MlpEvaluator MlpEvaluator::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, kMagic, 5) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  if (get_u32(is) != kVersion) throw std::runtime_error("checkpoint: unsupported version in " + path);
  MlpArch arch;
  arch.input = static_cast<int>(get_u32(is));
  uint32_t nh = get_u32(is);
  if (nh > 64) throw std::runtime_error("checkpoint: implausible hidden layer count");
  for (uint32_t i = 0; i < nh; ++i) arch.hidden.push_back(static_cast<int>(get_u32(is)));
  arch.actions = static_cast<int>(get_u32(is));
  MlpEvaluator ev(arch, /*seed=*/0);
  for (double& v : ev.params_) v = get_f32(is);
  if (!is) throw std::runtime_error("checkpoint: truncated parameter data in " + path);
  char extra;
  if (is.read(&extra, 1)) throw std::runtime_error("checkpoint: trailing bytes in " + path);
  return ev;
}

}  // namespace blocklab
