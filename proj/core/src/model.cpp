#include "respa/model.hpp"

#include <algorithm>
#include <cmath>

#include "respa/error.hpp"
#include "respa/rng.hpp"

namespace respa {

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + name + "' (expected relu or tanh)");
}

std::string activation_name(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

std::vector<int> Architecture::widths() const {
  std::vector<int> w;
  w.reserve(hidden.size() + 2);
  w.push_back(input_dim);
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(classes);
  return w;
}

void Architecture::validate() const {
  if (input_dim < 1) throw ConfigError("architecture: input_dim must be >= 1");
  if (classes < 2) throw ConfigError("architecture: classes must be >= 2");
  if (hidden.size() > 3) throw ConfigError("architecture: at most 3 hidden layers are supported");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("architecture: hidden widths must be >= 1");
  }
}

MlpClassifier::MlpClassifier(Architecture arch, std::vector<Matrix> weights, std::vector<Vec> biases)
    : arch_(std::move(arch)), weights_(std::move(weights)), biases_(std::move(biases)) {
  arch_.validate();
  const std::vector<int> w = arch_.widths();
  const std::size_t layers = w.size() - 1;
  if (weights_.size() != layers || biases_.size() != layers) {
    throw DimensionError("model: expected " + std::to_string(layers) + " weight/bias layers");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (weights_[l].rows != w[l + 1] || weights_[l].cols != w[l]) {
      throw DimensionError("model: layer " + std::to_string(l) + " weight shape mismatch");
    }
    if (static_cast<int>(biases_[l].size()) != w[l + 1]) {
      throw DimensionError("model: layer " + std::to_string(l) + " bias length mismatch");
    }
  }
}

MlpClassifier MlpClassifier::seeded_init(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  SeededRng rng(seed);
  const std::vector<int> w = arch.widths();
  std::vector<Matrix> weights;
  std::vector<Vec> biases;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    Matrix m(w[l + 1], w[l]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(w[l]));
    for (double& x : m.a) x = rng.uniform(-bound, bound);
    weights.push_back(std::move(m));
    biases.push_back(vec::zeros(static_cast<std::size_t>(w[l + 1])));
  }
  return MlpClassifier(arch, std::move(weights), std::move(biases));
}

void MlpClassifier::check_input(const Vec& x) const {
  if (static_cast<int>(x.size()) != arch_.input_dim) {
    throw DimensionError("model input has length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(arch_.input_dim));
  }
}

namespace {

Vec affine(const Matrix& w, const Vec& b, const Vec& x) {
  Vec out(static_cast<std::size_t>(w.rows));
  for (int r = 0; r < w.rows; ++r) {
    double s = b[static_cast<std::size_t>(r)];
    const double* row = &w.a[static_cast<std::size_t>(r) * static_cast<std::size_t>(w.cols)];
    for (int c = 0; c < w.cols; ++c) s += row[c] * x[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = s;
  }
  return out;
}

// w^T * dz
Vec transpose_times(const Matrix& w, const Vec& dz) {
  Vec out(static_cast<std::size_t>(w.cols), 0.0);
  for (int r = 0; r < w.rows; ++r) {
    const double g = dz[static_cast<std::size_t>(r)];
    const double* row = &w.a[static_cast<std::size_t>(r) * static_cast<std::size_t>(w.cols)];
    for (int c = 0; c < w.cols; ++c) out[static_cast<std::size_t>(c)] += row[c] * g;
  }
  return out;
}

Vec apply_activation(const Vec& z, Activation act) {
  Vec out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = act == Activation::relu ? (z[i] > 0.0 ? z[i] : 0.0) : std::tanh(z[i]);
  }
  return out;
}

Vec softmax(const Vec& logits) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  Vec p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace

MlpClassifier::ForwardPass MlpClassifier::run_forward(const Vec& x) const {
  check_input(x);
  ForwardPass fp;
  fp.pre.reserve(weights_.size());
  fp.post.reserve(weights_.size());
  const Vec* cur = &x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    fp.pre.push_back(affine(weights_[l], biases_[l], *cur));
    const bool last = l + 1 == weights_.size();
    fp.post.push_back(last ? fp.pre.back() : apply_activation(fp.pre.back(), arch_.activation));
    cur = &fp.post.back();
  }
  fp.probs = softmax(fp.post.back());
  return fp;
}

Vec MlpClassifier::logits(const Vec& x) const {
  check_input(x);
  Vec cur = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    cur = affine(weights_[l], biases_[l], cur);
    if (l + 1 < weights_.size()) cur = apply_activation(cur, arch_.activation);
  }
  return cur;
}

Vec MlpClassifier::forward(const Vec& x) const { return softmax(logits(x)); }

int MlpClassifier::predict(const Vec& x) const {
  const Vec z = logits(x);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double MlpClassifier::loss(const Vec& x, const Vec& y) const {
  if (static_cast<int>(y.size()) != arch_.classes) {
    throw DimensionError("label vector has length " + std::to_string(y.size()) +
                         ", expected " + std::to_string(arch_.classes));
  }
  const int truth = vec::one_hot_index(y);
  const Vec p = forward(x);
  const double p_true = std::max(p[static_cast<std::size_t>(truth)], kProbFloor);
  return -std::log(p_true);
}

Vec MlpClassifier::backpropagate(const Vec& y, const ForwardPass& fp,
                                 std::vector<Vec>* dz_out) const {
  const std::size_t layers = weights_.size();
  std::vector<Vec> dz(layers);
  dz[layers - 1] = vec::sub(fp.probs, y);
  for (std::size_t l = layers - 1; l > 0; --l) {
    Vec da = transpose_times(weights_[l], dz[l]);
    const Vec& pre = fp.pre[l - 1];
    Vec d(pre.size());
    if (arch_.activation == Activation::relu) {
      for (std::size_t i = 0; i < pre.size(); ++i) d[i] = pre[i] > 0.0 ? da[i] : 0.0;
    } else {
      const Vec& post = fp.post[l - 1];
      for (std::size_t i = 0; i < pre.size(); ++i) d[i] = da[i] * (1.0 - post[i] * post[i]);
    }
    dz[l - 1] = std::move(d);
  }
  Vec input_grad = transpose_times(weights_[0], dz[0]);
  if (dz_out) *dz_out = std::move(dz);
  return input_grad;
}

Vec MlpClassifier::input_gradient(const Vec& x, const Vec& y) const {
  if (static_cast<int>(y.size()) != arch_.classes) {
    throw DimensionError("label vector has length " + std::to_string(y.size()) +
                         ", expected " + std::to_string(arch_.classes));
  }
  vec::one_hot_index(y);
  const ForwardPass fp = run_forward(x);
  return backpropagate(y, fp, nullptr);
}

MlpClassifier::ParamGrads MlpClassifier::zero_grads() const {
  ParamGrads g;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    g.weights.emplace_back(weights_[l].rows, weights_[l].cols);
    g.biases.push_back(vec::zeros(biases_[l].size()));
  }
  return g;
}

double MlpClassifier::accumulate_param_grads(const Vec& x, const Vec& y, ParamGrads& acc) const {
  const ForwardPass fp = run_forward(x);
  std::vector<Vec> dz;
  backpropagate(y, fp, &dz);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const Vec& input = l == 0 ? x : fp.post[l - 1];
    Matrix& gw = acc.weights[l];
    for (int r = 0; r < gw.rows; ++r) {
      const double g = dz[l][static_cast<std::size_t>(r)];
      double* row = &gw.a[static_cast<std::size_t>(r) * static_cast<std::size_t>(gw.cols)];
      for (int c = 0; c < gw.cols; ++c) row[c] += g * input[static_cast<std::size_t>(c)];
    }
    vec::add_in_place(acc.biases[l], dz[l]);
  }
  const int truth = vec::one_hot_index(y);
  return -std::log(std::max(fp.probs[static_cast<std::size_t>(truth)], kProbFloor));
}

void MlpClassifier::apply_update(const ParamGrads& grads, double step) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (std::size_t i = 0; i < weights_[l].a.size(); ++i) {
      weights_[l].a[i] += step * grads.weights[l].a[i];
    }
    vec::add_scaled_in_place(biases_[l], step, grads.biases[l]);
  }
}

}  // namespace respa
