#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "respa/oracle.hpp"
#include "respa/vec.hpp"

namespace respa {

enum class Activation { relu, tanh };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation a);

// Dense row-major matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }
};

// Layer widths and activation of a softmax classifier. `hidden` may be empty
// (plain linear-softmax) and holds at most three layers.
struct Architecture {
  int input_dim = 0;
  std::vector<int> hidden;
  int classes = 0;
  Activation activation = Activation::relu;

  // {input_dim, hidden..., classes}
  std::vector<int> widths() const;
  void validate() const;
  bool operator==(const Architecture&) const = default;
};

// Feed-forward softmax classifier with exact input gradients via manual
// backpropagation. Instances are immutable through the const interface and
// safe to share across attack workers.
//
// The ReLU subgradient at exactly 0 is taken as 0.
class MlpClassifier final : public LossOracle {
 public:
  MlpClassifier(Architecture arch, std::vector<Matrix> weights, std::vector<Vec> biases);

  // Weights uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)] drawn from `seed`,
  // biases zero.
  static MlpClassifier seeded_init(const Architecture& arch, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }
  int input_dim() const override { return arch_.input_dim; }
  int classes() const { return arch_.classes; }

  Vec logits(const Vec& x) const;
  // Softmax probabilities: strictly positive, summing to 1 within 1e-12.
  Vec forward(const Vec& x) const;
  // Argmax class; the first index wins a tie.
  int predict(const Vec& x) const;

  // Cross-entropy -log p_true. p_true is floored at kProbFloor before the
  // log so confident mispredictions stay finite.
  double loss(const Vec& x, const Vec& y) const override;
  Vec input_gradient(const Vec& x, const Vec& y) const override;

  struct ParamGrads {
    std::vector<Matrix> weights;
    std::vector<Vec> biases;
  };
  ParamGrads zero_grads() const;
  // Adds this sample's parameter gradients into `acc`; returns the sample loss.
  double accumulate_param_grads(const Vec& x, const Vec& y, ParamGrads& acc) const;
  // params += step * grads
  void apply_update(const ParamGrads& grads, double step);

  const std::vector<Matrix>& weights() const { return weights_; }
  const std::vector<Vec>& biases() const { return biases_; }
  std::size_t layer_count() const { return weights_.size(); }

  static constexpr double kProbFloor = 1e-30;

 private:
  struct ForwardPass {
    std::vector<Vec> pre;    // pre-activation per layer
    std::vector<Vec> post;   // activation per layer; post.back() is the logits
    Vec probs;
  };
  ForwardPass run_forward(const Vec& x) const;
  // Softmax-cross-entropy logit gradient (probs - y), then back through the
  // layers. Fills dz per layer and returns the input gradient.
  Vec backpropagate(const Vec& y, const ForwardPass& fp, std::vector<Vec>* dz_out) const;
  void check_input(const Vec& x) const;

  Architecture arch_;
  std::vector<Matrix> weights_;
  std::vector<Vec> biases_;
};

}  // namespace respa
