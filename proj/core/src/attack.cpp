#include "respa/attack.hpp"

#include <cmath>
#include <sstream>

#include "respa/error.hpp"
#include "respa/text_io.hpp"

namespace respa {

AttackAlgorithm attack_algorithm_from_name(const std::string& name) {
  if (name == "ifgsm") return AttackAlgorithm::ifgsm;
  if (name == "mifgsm") return AttackAlgorithm::mifgsm;
  if (name == "flat_current_grad") return AttackAlgorithm::flat_current_grad;
  if (name == "respa") return AttackAlgorithm::respa;
  throw ConfigError("unknown attack algorithm '" + name +
                    "' (expected ifgsm, mifgsm, flat_current_grad or respa)");
}

std::string attack_algorithm_name(AttackAlgorithm a) {
  switch (a) {
    case AttackAlgorithm::ifgsm: return "ifgsm";
    case AttackAlgorithm::mifgsm: return "mifgsm";
    case AttackAlgorithm::flat_current_grad: return "flat_current_grad";
    case AttackAlgorithm::respa: return "respa";
  }
  throw InvariantError("unreachable attack algorithm value");
}

void AttackConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("attack config: epsilon must be > 0");
  if (!(alpha > 0.0)) throw ConfigError("attack config: alpha must be > 0");
  if (iterations < 1) throw ConfigError("attack config: iterations must be >= 1");
  if (!(mu >= 0.0)) throw ConfigError("attack config: mu must be >= 0");
  if (samples < 1) throw ConfigError("attack config: samples must be >= 1");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("attack config: theta must lie in [0,1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("attack config: gamma must lie in [0,1]");
  if (!(beta >= 0.0)) throw ConfigError("attack config: beta must be >= 0");
  if (rho.has_value() && !(*rho >= 0.0)) throw ConfigError("attack config: rho must be >= 0");
}

AttackState initial_state(const Vec& x) {
  AttackState s;
  s.x_adv = x;
  s.momentum = vec::zeros(x.size());
  s.grad_ema = vec::zeros(x.size());
  s.t = 0;
  return s;
}

std::string serialize_trace(const AttackTrace& trace) {
  std::ostringstream out;
  out << "# t\tloss\tflatness\tresidual_norm\n";
  for (const TraceRow& r : trace.rows) {
    out << r.t << '\t' << format_double(r.loss) << '\t' << format_double(r.flatness) << '\t'
        << format_double(r.residual_norm) << '\n';
  }
  return out.str();
}

Vec reference_gradient(const Vec& ema, const Vec& grad, double theta) {
  return vec::lincomb(theta, ema, 1.0 - theta, grad);
}

Vec residual_gradient(const Vec& grad, const Vec& reference) {
  return vec::sub(grad, reference);
}

namespace {

constexpr double kNormFloor = 1e-12;

double direction_norm(const Vec& v, ResidualNorm norm) {
  return norm == ResidualNorm::l2 ? vec::l2_norm(v) : vec::l1_norm(v);
}

}  // namespace

Vec perturbed_point(const Vec& x, const Vec& direction, double rho, ResidualNorm norm) {
  if (rho < 0.0) throw ConfigError("perturbed_point: rho must be >= 0");
  if (rho == 0.0) return x;
  vec::check_same_size(x, direction);
  const double n = direction_norm(direction, norm);
  if (n < kNormFloor) return x;
  Vec out(x.size());
  const double scale = rho / n;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - scale * direction[i];
  return out;
}

Vec respa_sample_gradient(const LossOracle& oracle, const Vec& x_i, const Vec& y,
                          const Vec& x_star, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("respa_sample_gradient: gamma must lie in [0,1]");
  if (gamma == 1.0) return oracle.input_gradient(x_star, y);
  Vec grad_i = oracle.input_gradient(x_i, y);
  if (gamma == 0.0 || x_star == x_i) return grad_i;
  return vec::lincomb(1.0 - gamma, grad_i, gamma, oracle.input_gradient(x_star, y));
}

Vec clip_to_budget(const Vec& x, const Vec& x_orig, double epsilon) {
  vec::check_same_size(x, x_orig);
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lo = std::max(x_orig[i] - epsilon, 0.0);
    const double hi = std::min(x_orig[i] + epsilon, 1.0);
    out[i] = std::clamp(x[i], lo, hi);
  }
  return out;
}

void check_budget(const Vec& x_adv, const Vec& x_orig, double epsilon) {
  vec::check_same_size(x_adv, x_orig);
  for (std::size_t i = 0; i < x_adv.size(); ++i) {
    if (!std::isfinite(x_adv[i])) {
      throw InvariantError("budget check: non-finite coordinate " + std::to_string(i));
    }
    if (std::fabs(x_adv[i] - x_orig[i]) > epsilon + 1e-12) {
      throw InvariantError("budget check: coordinate " + std::to_string(i) +
                           " exceeds the epsilon ball");
    }
    if (x_adv[i] < 0.0 || x_adv[i] > 1.0) {
      throw InvariantError("budget check: coordinate " + std::to_string(i) + " escapes [0,1]");
    }
  }
}

namespace {

// mu*momentum + avg/||avg||_1; an average below the norm floor contributes
// nothing, leaving the momentum to pure decay. Shared by every algorithm so
// reductions between them are exact.
Vec momentum_update(const Vec& momentum, const Vec& avg_grad, double mu) {
  const double n1 = vec::l1_norm(avg_grad);
  Vec out(momentum.size());
  if (n1 < kNormFloor) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = mu * momentum[i];
    return out;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mu * momentum[i] + avg_grad[i] / n1;
  return out;
}

Vec sign_step_and_clip(const Vec& x_adv, const Vec& direction, double alpha, const Vec& x_orig,
                       double epsilon) {
  Vec moved(x_adv.size());
  for (std::size_t i = 0; i < x_adv.size(); ++i) {
    const double s = direction[i] > 0.0 ? 1.0 : (direction[i] < 0.0 ? -1.0 : 0.0);
    moved[i] = x_adv[i] + alpha * s;
  }
  return clip_to_budget(moved, x_orig, epsilon);
}

// Gamma-weighted combination reusing the already computed grad_i. Matches
// respa_sample_gradient for a deterministic oracle.
Vec combine_sample_gradient(const LossOracle& oracle, const Vec& y, const Vec& x_i,
                            const Vec& grad_i, const Vec& x_star, double gamma) {
  if (gamma == 1.0) return oracle.input_gradient(x_star, y);
  if (gamma == 0.0 || x_star == x_i) return grad_i;
  return vec::lincomb(1.0 - gamma, grad_i, gamma, oracle.input_gradient(x_star, y));
}

enum class PerturbDirection { residual, current_gradient };

AttackState sampled_flatness_step(const LossOracle& oracle, const AttackState& state,
                                  const Vec& x_orig, const Vec& y, const AttackConfig& cfg,
                                  SeededRng& rng, PerturbDirection dir, StepDiag* diag) {
  const std::size_t d = state.x_adv.size();
  const double half_width = cfg.beta * cfg.epsilon;
  const double rho = cfg.resolved_rho();

  // In center mode the reference and residual come from the iterate's own
  // gradient and are shared by all samples of this iteration.
  Vec shared_residual;
  if (dir == PerturbDirection::residual && cfg.reference_point == ReferencePoint::center) {
    const Vec grad_center = oracle.input_gradient(state.x_adv, y);
    const Vec reference = reference_gradient(state.grad_ema, grad_center, cfg.theta);
    shared_residual = residual_gradient(grad_center, reference);
  }

  Vec sum = vec::zeros(d);
  for (int i = 0; i < cfg.samples; ++i) {
    const Vec offset = sample_uniform_box(rng, d, half_width);
    const Vec x_i = vec::add(state.x_adv, offset);
    const Vec grad_i = oracle.input_gradient(x_i, y);

    Vec own_residual;
    const Vec* direction = nullptr;
    if (dir == PerturbDirection::current_gradient) {
      direction = &grad_i;
    } else if (cfg.reference_point == ReferencePoint::center) {
      direction = &shared_residual;
    } else {
      const Vec reference = reference_gradient(state.grad_ema, grad_i, cfg.theta);
      own_residual = residual_gradient(grad_i, reference);
      direction = &own_residual;
    }

    const Vec x_star = perturbed_point(x_i, *direction, rho, cfg.residual_norm);
    vec::add_in_place(sum, combine_sample_gradient(oracle, y, x_i, grad_i, x_star, cfg.gamma));
  }
  const Vec avg = vec::scale(1.0 / static_cast<double>(cfg.samples), sum);

  AttackState next;
  next.grad_ema = reference_gradient(state.grad_ema, avg, cfg.theta);
  next.momentum = momentum_update(state.momentum, avg, cfg.mu);
  next.x_adv = sign_step_and_clip(state.x_adv, next.momentum, cfg.alpha, x_orig, cfg.epsilon);
  next.t = state.t + 1;
  if (diag) diag->avg_grad_linf = vec::linf_norm(avg);
  return next;
}

}  // namespace

AttackState respa_step(const LossOracle& oracle, const AttackState& state, const Vec& x_orig,
                       const Vec& y, const AttackConfig& cfg, SeededRng& rng, StepDiag* diag) {
  return sampled_flatness_step(oracle, state, x_orig, y, cfg, rng, PerturbDirection::residual, diag);
}

AttackState attack_step(AttackAlgorithm algorithm, const LossOracle& oracle,
                        const AttackState& state, const Vec& x_orig, const Vec& y,
                        const AttackConfig& cfg, SeededRng& rng, StepDiag* diag) {
  switch (algorithm) {
    case AttackAlgorithm::ifgsm: {
      const Vec grad = oracle.input_gradient(state.x_adv, y);
      AttackState next;
      next.grad_ema = state.grad_ema;
      next.momentum = state.momentum;
      next.x_adv = sign_step_and_clip(state.x_adv, grad, cfg.alpha, x_orig, cfg.epsilon);
      next.t = state.t + 1;
      if (diag) diag->avg_grad_linf = vec::linf_norm(grad);
      return next;
    }
    case AttackAlgorithm::mifgsm: {
      const Vec grad = oracle.input_gradient(state.x_adv, y);
      AttackState next;
      next.grad_ema = state.grad_ema;
      next.momentum = momentum_update(state.momentum, grad, cfg.mu);
      next.x_adv = sign_step_and_clip(state.x_adv, next.momentum, cfg.alpha, x_orig, cfg.epsilon);
      next.t = state.t + 1;
      if (diag) diag->avg_grad_linf = vec::linf_norm(grad);
      return next;
    }
    case AttackAlgorithm::flat_current_grad:
      return sampled_flatness_step(oracle, state, x_orig, y, cfg, rng,
                                   PerturbDirection::current_gradient, diag);
    case AttackAlgorithm::respa:
      return respa_step(oracle, state, x_orig, y, cfg, rng, diag);
  }
  throw InvariantError("unreachable attack algorithm value");
}

AttackResult run_attack(AttackAlgorithm algorithm, const LossOracle& oracle, const Vec& x,
                        const Vec& y, const AttackConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(x.size()) != oracle.input_dim()) {
    throw DimensionError("run_attack: input length " + std::to_string(x.size()) +
                         " does not match the oracle dimension " +
                         std::to_string(oracle.input_dim()));
  }
  check_budget(x, x, cfg.epsilon);  // starting point must already sit in [0,1]

  SeededRng rng(cfg.seed);
  AttackState state = initial_state(x);
  AttackTrace trace;
  trace.rows.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int t = 0; t < cfg.iterations; ++t) {
    TraceRow row;
    row.t = t;
    row.loss = oracle.loss(state.x_adv, y);

    // Flatness probe at the iterate, using the same perturbation direction
    // family the algorithm steers by: the residual for respa, the raw
    // gradient otherwise.
    const Vec grad_center = oracle.input_gradient(state.x_adv, y);
    Vec probe_dir;
    if (algorithm == AttackAlgorithm::respa) {
      const Vec reference = reference_gradient(state.grad_ema, grad_center, cfg.theta);
      probe_dir = residual_gradient(grad_center, reference);
    } else {
      probe_dir = grad_center;
    }
    row.residual_norm = direction_norm(probe_dir, cfg.residual_norm);
    const Vec probe_point = perturbed_point(state.x_adv, probe_dir, cfg.resolved_rho(), cfg.residual_norm);
    row.flatness = oracle.loss(probe_point, y) - row.loss;

    StepDiag diag;
    AttackState next = attack_step(algorithm, oracle, state, x, y, cfg, rng, &diag);
    check_budget(next.x_adv, x, cfg.epsilon);

    row.step_linf = vec::linf_norm(vec::sub(next.x_adv, state.x_adv));
    row.avg_grad_linf = diag.avg_grad_linf;
    row.ema_linf = vec::linf_norm(next.grad_ema);
    trace.rows.push_back(row);
    state = std::move(next);
  }

  return AttackResult{std::move(state.x_adv), std::move(trace)};
}

}  // namespace respa
