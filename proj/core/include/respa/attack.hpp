#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "respa/oracle.hpp"
#include "respa/rng.hpp"
#include "respa/vec.hpp"

namespace respa {

// Iterative sign-step attacks sharing one stepping interface.
//
//   ifgsm              plain iterative sign steps on the loss gradient
//   mifgsm             momentum accumulation of L1-normalized gradients
//   flat_current_grad  neighborhood-sampled flatness regularization whose
//                      perturbed point follows the raw current gradient
//   respa              same, but the perturbed point follows the residual
//                      between the current gradient and an EMA reference
enum class AttackAlgorithm { ifgsm, mifgsm, flat_current_grad, respa };

AttackAlgorithm attack_algorithm_from_name(const std::string& name);
std::string attack_algorithm_name(AttackAlgorithm a);

enum class ResidualNorm { l2, l1 };

// Which gradient feeds the EMA reference: the gradient at each neighborhood
// sample (default) or the gradient at the iterate itself, shared by all
// samples of that iteration.
enum class ReferencePoint { per_sample, center };

struct AttackConfig {
  double epsilon = 16.0 / 255.0;  // L-inf budget, normalized pixel units
  double alpha = 1.6 / 255.0;     // step size, same units
  int iterations = 10;            // T
  double mu = 1.0;                // momentum decay
  int samples = 5;                // N, neighborhood draws per iteration
  double theta = 0.6;             // EMA decay of the reference gradient
  double gamma = 0.6;             // flatness penalty coefficient in [0,1]
  double beta = 1.5;              // sampling half-width multiplier: half-width = beta*epsilon
  std::optional<double> rho;      // perturbed-point radius; defaults to epsilon
  std::uint64_t seed = 0;
  ResidualNorm residual_norm = ResidualNorm::l2;
  ReferencePoint reference_point = ReferencePoint::per_sample;

  double resolved_rho() const { return rho.has_value() ? *rho : epsilon; }
  void validate() const;
};

// Mutable per-run state. grad_ema is the reference-gradient accumulator,
// zero before the first iteration, like the momentum.
struct AttackState {
  Vec x_adv;
  Vec momentum;
  Vec grad_ema;
  int t = 0;
};

AttackState initial_state(const Vec& x);

struct TraceRow {
  int t = 0;
  double loss = 0.0;           // J at the iterate before the step
  double flatness = 0.0;       // perturbed-point loss minus current loss
  double residual_norm = 0.0;  // norm of the probe direction at the iterate
  double step_linf = 0.0;      // max coordinate change the step made
  double avg_grad_linf = 0.0;  // L-inf of the step's average gradient
  double ema_linf = 0.0;       // L-inf of grad_ema after the step
};

// One row per completed iteration.
struct AttackTrace {
  std::vector<TraceRow> rows;
};

// Tab-separated, one row per iteration: t, loss, flatness, residual_norm.
std::string serialize_trace(const AttackTrace& trace);

// theta*ema + (1-theta)*grad
Vec reference_gradient(const Vec& ema, const Vec& grad, double theta);

// grad - reference
Vec residual_gradient(const Vec& grad, const Vec& reference);

// x - rho * direction/||direction||. Returns x unchanged when rho == 0 or
// the direction norm falls below 1e-12.
Vec perturbed_point(const Vec& x, const Vec& direction, double rho,
                    ResidualNorm norm = ResidualNorm::l2);

// (1-gamma)*grad(x_i) + gamma*grad(x_star). The boundary weights return the
// corresponding single gradient exactly, with no arithmetic applied.
Vec respa_sample_gradient(const LossOracle& oracle, const Vec& x_i, const Vec& y,
                          const Vec& x_star, double gamma);

// Coordinate-wise projection onto the epsilon-ball around x_orig intersected
// with the [0,1] box.
Vec clip_to_budget(const Vec& x, const Vec& x_orig, double epsilon);

// Throws InvariantError when ||x_adv - x_orig||_inf > epsilon + 1e-12 or
// x_adv leaves [0,1].
void check_budget(const Vec& x_adv, const Vec& x_orig, double epsilon);

struct StepDiag {
  double avg_grad_linf = 0.0;
};

// One iteration of the residual-perturbation update. Per iteration it
//   (a) draws N samples x_i = x_adv + lambda_i, lambda_i uniform on the
//       [-beta*epsilon, beta*epsilon] box,
//   (b) per sample forms the EMA reference, the residual, the perturbed
//       point at radius rho along the residual, and the gamma-weighted
//       gradient combination,
//   (c) averages the N combined gradients,
//   (d) folds that average into grad_ema with decay theta,
//   (e) adds its L1-normalized value to the decayed momentum (a zero-norm
//       average leaves the momentum to pure decay),
//   (f) takes a sign step of size alpha and clips to budget.
AttackState respa_step(const LossOracle& oracle, const AttackState& state, const Vec& x_orig,
                       const Vec& y, const AttackConfig& cfg, SeededRng& rng,
                       StepDiag* diag = nullptr);

// Dispatches one iteration of any algorithm under the shared interface.
AttackState attack_step(AttackAlgorithm algorithm, const LossOracle& oracle,
                        const AttackState& state, const Vec& x_orig, const Vec& y,
                        const AttackConfig& cfg, SeededRng& rng, StepDiag* diag = nullptr);

struct AttackResult {
  Vec x_adv;
  AttackTrace trace;
};

// Runs cfg.iterations steps from x with a generator seeded by cfg.seed.
// The result satisfies ||x_adv - x||_inf <= epsilon and x_adv in [0,1]^d;
// a violation after any step throws InvariantError.
AttackResult run_attack(AttackAlgorithm algorithm, const LossOracle& oracle, const Vec& x,
                        const Vec& y, const AttackConfig& cfg);

// Attack entry as named in configs and reports.
struct AttackSpec {
  std::string id;
  AttackAlgorithm algorithm = AttackAlgorithm::respa;
  AttackConfig config;
};

}  // namespace respa
