#include <cmath>
#include <vector>

#include <doctest.h>

#include "respa/attack.hpp"
#include "respa/data.hpp"
#include "respa/error.hpp"
#include "respa/model.hpp"
#include "respa/rng.hpp"
#include "respa/train.hpp"
#include "test_support.hpp"

using namespace respa;
using respa::testing::LinearOracle;
using respa::testing::QuadraticOracle;
using respa::testing::ScaledOracle;
using respa::testing::random_vec;

namespace {

AttackConfig tiny_config() {
  AttackConfig cfg;
  cfg.epsilon = 0.1;
  cfg.alpha = 0.02;
  cfg.iterations = 6;
  cfg.samples = 3;
  cfg.seed = 9;
  return cfg;
}

bool same_bits(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("attacks");

TEST_CASE("reference gradient blends the EMA and the new gradient") {
  const Vec e0 = vec::zeros(2);
  const Vec grad{1.0, -2.0};
  const Vec m = reference_gradient(e0, grad, 0.6);
  CHECK(m[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(m[1] == doctest::Approx(-0.8).epsilon(1e-15));

  const Vec e{0.5, 0.25};
  CHECK(reference_gradient(e, grad, 1.0) == e);
  CHECK(reference_gradient(e, grad, 0.0) == grad);
}

TEST_CASE("residual gradient is the elementwise difference") {
  const Vec grad{1.0, -2.0};
  const Vec m{0.4, -0.8};
  const Vec r = residual_gradient(grad, m);
  CHECK(r[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(r[1] == doctest::Approx(-1.2).epsilon(1e-15));
  CHECK(residual_gradient(grad, grad) == vec::zeros(2));
}

TEST_CASE("first-iteration residual is theta times the gradient") {
  SeededRng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec grad = random_vec(rng, 6, -3.0, 3.0);
    const double theta = rng.uniform(0.05, 0.95);
    const Vec reference = reference_gradient(vec::zeros(6), grad, theta);
    const Vec residual = residual_gradient(grad, reference);
    const Vec expected = vec::scale(theta, grad);
    for (std::size_t i = 0; i < residual.size(); ++i) {
      CHECK(residual[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("perturbed point walks rho against the normalized direction") {
  const Vec x{1.0, 1.0};
  const Vec dir{3.0, 4.0};
  const Vec p = perturbed_point(x, dir, 1.0);
  CHECK(p[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.2).epsilon(1e-15));

  CHECK(perturbed_point(x, dir, 0.0) == x);
  CHECK(perturbed_point(x, vec::zeros(2), 2.0) == x);
  CHECK(perturbed_point(x, {1e-13, -1e-13}, 2.0) == x);
}

TEST_CASE("sample gradient hits both gamma boundaries exactly") {
  const QuadraticOracle oracle({0.0, 0.0});
  const Vec y;  // toy oracles ignore labels
  const Vec x_i{1.0, 2.0};
  const Vec x_star{0.5, -1.0};
  CHECK(respa_sample_gradient(oracle, x_i, y, x_star, 0.0) == oracle.input_gradient(x_i, y));
  CHECK(respa_sample_gradient(oracle, x_i, y, x_star, 1.0) == oracle.input_gradient(x_star, y));
}

TEST_CASE("sample gradient at gamma 1/2 matches the closed form on a quadratic") {
  const QuadraticOracle oracle({0.0, 0.0});
  const Vec x_i{0.8, -0.6};
  const Vec x_star{0.2, 0.4};
  const Vec g = respa_sample_gradient(oracle, x_i, {}, x_star, 0.5);
  CHECK(g[0] == doctest::Approx(0.5 * x_i[0] + 0.5 * x_star[0]).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(0.5 * x_i[1] + 0.5 * x_star[1]).epsilon(1e-15));
}

TEST_CASE("respa with N=1, beta=0, rho=0 steps bit-identically to mifgsm") {
  const MlpClassifier m = MlpClassifier::seeded_init({6, {5}, 3, Activation::tanh}, 77);
  SeededRng xr(3);
  const Vec x = random_vec(xr, 6, 0.05, 0.95);
  const Vec y = vec::one_hot(1, 3);

  AttackConfig mi = tiny_config();
  AttackConfig collapsed = tiny_config();
  collapsed.samples = 1;
  collapsed.beta = 0.0;
  collapsed.rho = 0.0;

  SeededRng rng_a(mi.seed);
  SeededRng rng_b(collapsed.seed);
  AttackState sa = initial_state(x);
  AttackState sb = initial_state(x);
  for (int t = 0; t < mi.iterations; ++t) {
    sa = attack_step(AttackAlgorithm::mifgsm, m, sa, x, y, mi, rng_a);
    sb = attack_step(AttackAlgorithm::respa, m, sb, x, y, collapsed, rng_b);
    CHECK(same_bits(sa.x_adv, sb.x_adv));
    CHECK(same_bits(sa.momentum, sb.momentum));
  }
}

TEST_CASE("respa and flat_current_grad coincide at gamma 0") {
  const MlpClassifier m = MlpClassifier::seeded_init({5, {4}, 2, Activation::relu}, 13);
  SeededRng xr(4);
  const Vec x = random_vec(xr, 5, 0.1, 0.9);
  const Vec y = vec::one_hot(0, 2);
  AttackConfig cfg = tiny_config();
  cfg.gamma = 0.0;
  const AttackResult a = run_attack(AttackAlgorithm::respa, m, x, y, cfg);
  const AttackResult b = run_attack(AttackAlgorithm::flat_current_grad, m, x, y, cfg);
  CHECK(same_bits(a.x_adv, b.x_adv));
}

TEST_CASE("on a rising linear loss every algorithm climbs by alpha until clipped") {
  const LinearOracle oracle({2.5});
  const double x0 = 0.4;
  AttackConfig cfg;
  cfg.epsilon = 0.1;
  cfg.alpha = 0.03;
  cfg.iterations = 10;
  cfg.samples = 3;
  cfg.seed = 5;

  for (AttackAlgorithm alg : {AttackAlgorithm::ifgsm, AttackAlgorithm::mifgsm,
                              AttackAlgorithm::flat_current_grad, AttackAlgorithm::respa}) {
    CAPTURE(attack_algorithm_name(alg));
    SeededRng rng(cfg.seed);
    AttackState s = initial_state({x0});
    for (int t = 1; t <= cfg.iterations; ++t) {
      s = attack_step(alg, oracle, s, {x0}, {}, cfg, rng);
      const double expected = std::min(x0 + t * cfg.alpha, x0 + cfg.epsilon);
      CHECK(s.x_adv[0] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero gradient leaves the iterate in place") {
  const Architecture arch{4, {}, 2, Activation::relu};
  const MlpClassifier m(arch, {Matrix(2, 4)}, {vec::zeros(2)});
  const Vec x{0.2, 0.4, 0.6, 0.8};
  const Vec y = vec::one_hot(0, 2);
  for (AttackAlgorithm alg : {AttackAlgorithm::ifgsm, AttackAlgorithm::mifgsm,
                              AttackAlgorithm::respa}) {
    AttackConfig cfg = tiny_config();
    cfg.beta = 0.0;  // keep the sampled gradients exactly zero too
    const AttackResult r = run_attack(alg, m, x, y, cfg);
    CHECK(r.x_adv == x);
  }
}

TEST_CASE("budget invariant holds for every algorithm and random config") {
  SeededRng rng(52);
  const MlpClassifier m = MlpClassifier::seeded_init({8, {6}, 3, Activation::relu}, 1);
  for (int trial = 0; trial < 30; ++trial) {
    AttackConfig cfg;
    cfg.epsilon = rng.uniform(0.01, 0.3);
    cfg.alpha = rng.uniform(0.005, 0.2);
    cfg.iterations = 1 + static_cast<int>(rng.next_below(8));
    cfg.samples = 1 + static_cast<int>(rng.next_below(4));
    cfg.theta = rng.uniform(0.1, 0.9);
    cfg.gamma = rng.uniform(0.0, 1.0);
    cfg.beta = rng.uniform(0.0, 2.0);
    cfg.mu = rng.uniform(0.0, 1.2);
    cfg.seed = rng.next_u64();
    const Vec x = random_vec(rng, 8, 0.0, 1.0);
    const Vec y = vec::one_hot(static_cast<int>(rng.next_below(3)), 3);
    const AttackAlgorithm alg = static_cast<AttackAlgorithm>(rng.next_below(4));
    const AttackResult r = run_attack(alg, m, x, y, cfg);
    CHECK_NOTHROW(check_budget(r.x_adv, x, cfg.epsilon));
    CHECK(vec::linf_norm(vec::sub(r.x_adv, x)) <= cfg.epsilon + 1e-12);
    CHECK(vec::in_box(r.x_adv, 0.0, 1.0));
  }
}

TEST_CASE("EMA accumulator is bounded by the largest average gradient") {
  const MlpClassifier m = MlpClassifier::seeded_init({6, {5}, 3, Activation::tanh}, 15);
  SeededRng xr(6);
  const Vec x = random_vec(xr, 6, 0.1, 0.9);
  const Vec y = vec::one_hot(2, 3);
  AttackConfig cfg = tiny_config();
  cfg.iterations = 12;

  SeededRng rng(cfg.seed);
  AttackState s = initial_state(x);
  double max_avg = 0.0;
  for (int t = 0; t < cfg.iterations; ++t) {
    StepDiag diag;
    s = attack_step(AttackAlgorithm::respa, m, s, x, y, cfg, rng, &diag);
    max_avg = std::max(max_avg, diag.avg_grad_linf);
    CHECK(vec::linf_norm(s.grad_ema) <= max_avg + 1e-12);
  }
}

TEST_CASE("iterate sequences are invariant under positive loss scaling") {
  const MlpClassifier m = MlpClassifier::seeded_init({5, {4}, 2, Activation::tanh}, 23);
  SeededRng xr(7);
  const Vec x = random_vec(xr, 5, 0.1, 0.9);
  const Vec y = vec::one_hot(1, 2);
  AttackConfig cfg = tiny_config();

  for (double scale : {0.5, 3.0, 1000.0}) {
    CAPTURE(scale);
    const ScaledOracle scaled(m, scale);
    for (AttackAlgorithm alg : {AttackAlgorithm::ifgsm, AttackAlgorithm::mifgsm,
                                AttackAlgorithm::respa}) {
      CAPTURE(attack_algorithm_name(alg));
      SeededRng rng_a(cfg.seed);
      SeededRng rng_b(cfg.seed);
      AttackState sa = initial_state(x);
      AttackState sb = initial_state(x);
      for (int t = 0; t < cfg.iterations; ++t) {
        sa = attack_step(alg, m, sa, x, y, cfg, rng_a);
        sb = attack_step(alg, scaled, sb, x, y, cfg, rng_b);
        CHECK(same_bits(sa.x_adv, sb.x_adv));
      }
    }
  }
}

TEST_CASE("run_attack is deterministic and traces every iteration") {
  const MlpClassifier m = MlpClassifier::seeded_init({6, {4}, 3, Activation::relu}, 3);
  SeededRng xr(8);
  const Vec x = random_vec(xr, 6, 0.05, 0.95);
  const Vec y = vec::one_hot(0, 3);
  AttackConfig cfg = tiny_config();
  const AttackResult a = run_attack(AttackAlgorithm::respa, m, x, y, cfg);
  const AttackResult b = run_attack(AttackAlgorithm::respa, m, x, y, cfg);
  CHECK(same_bits(a.x_adv, b.x_adv));
  CHECK(a.trace.rows.size() == static_cast<std::size_t>(cfg.iterations));
  CHECK(serialize_trace(a.trace) == serialize_trace(b.trace));

  AttackConfig other = cfg;
  other.seed += 1;
  const AttackResult c = run_attack(AttackAlgorithm::respa, m, x, y, other);
  CHECK_FALSE(same_bits(a.x_adv, c.x_adv));  // the neighborhood draws moved
}

TEST_CASE("single-iteration ifgsm with alpha >= epsilon is the one-shot sign step") {
  const MlpClassifier m = MlpClassifier::seeded_init({5, {4}, 2, Activation::relu}, 91);
  SeededRng xr(9);
  const Vec x = random_vec(xr, 5, 0.1, 0.9);
  const Vec y = vec::one_hot(0, 2);
  AttackConfig cfg;
  cfg.epsilon = 0.08;
  cfg.alpha = 0.08;
  cfg.iterations = 1;
  const AttackResult r = run_attack(AttackAlgorithm::ifgsm, m, x, y, cfg);

  Vec expected(x.size());
  const Vec s = vec::sign(m.input_gradient(x, y));
  for (std::size_t i = 0; i < x.size(); ++i) expected[i] = x[i] + cfg.alpha * s[i];
  expected = clip_to_budget(expected, x, cfg.epsilon);
  CHECK(same_bits(r.x_adv, expected));
}

TEST_CASE("perturbed point honors the configured norm") {
  const Vec x{1.0, 1.0};
  const Vec dir{3.0, 4.0};
  const Vec p = perturbed_point(x, dir, 1.0, ResidualNorm::l1);
  CHECK(p[0] == doctest::Approx(1.0 - 3.0 / 7.0).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(1.0 - 4.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("center reference mode is a distinct, budget-clean variant") {
  const MlpClassifier m = MlpClassifier::seeded_init({6, {5}, 3, Activation::relu}, 47);
  SeededRng xr(21);
  const Vec x = random_vec(xr, 6, 0.1, 0.9);
  const Vec y = vec::one_hot(2, 3);

  AttackConfig per_sample = tiny_config();
  AttackConfig center = tiny_config();
  center.reference_point = ReferencePoint::center;

  const AttackResult b = run_attack(AttackAlgorithm::respa, m, x, y, center);
  CHECK_NOTHROW(check_budget(b.x_adv, x, center.epsilon));

  // the variants blend different gradients; their real-valued EMA states
  // diverge immediately even when the quantized sign steps agree
  SeededRng rng_p(per_sample.seed);
  SeededRng rng_c(center.seed);
  const AttackState sp = attack_step(AttackAlgorithm::respa, m, initial_state(x), x, y, per_sample, rng_p);
  const AttackState sc = attack_step(AttackAlgorithm::respa, m, initial_state(x), x, y, center, rng_c);
  CHECK_FALSE(same_bits(sp.grad_ema, sc.grad_ema));

  // determinism holds for the variant too
  const AttackResult c = run_attack(AttackAlgorithm::respa, m, x, y, center);
  CHECK(same_bits(b.x_adv, c.x_adv));

  // and the mifgsm reduction is insensitive to the reference mode
  AttackConfig collapsed = center;
  collapsed.samples = 1;
  collapsed.beta = 0.0;
  collapsed.rho = 0.0;
  AttackConfig mi = tiny_config();
  SeededRng rng_a(mi.seed);
  SeededRng rng_b(collapsed.seed);
  AttackState sa = initial_state(x);
  AttackState sb = initial_state(x);
  for (int t = 0; t < mi.iterations; ++t) {
    sa = attack_step(AttackAlgorithm::mifgsm, m, sa, x, y, mi, rng_a);
    sb = attack_step(AttackAlgorithm::respa, m, sb, x, y, collapsed, rng_b);
    CHECK(same_bits(sa.x_adv, sb.x_adv));
  }
}

TEST_CASE("run_attack rejects inputs of the wrong dimension or outside the box") {
  const MlpClassifier m = MlpClassifier::seeded_init({4, {}, 2, Activation::relu}, 2);
  AttackConfig cfg = tiny_config();
  CHECK_THROWS_AS(run_attack(AttackAlgorithm::ifgsm, m, vec::zeros(5), vec::one_hot(0, 2), cfg),
                  DimensionError);
  CHECK_THROWS_AS(run_attack(AttackAlgorithm::ifgsm, m, {0.2, 1.4, 0.2, 0.2}, vec::one_hot(0, 2), cfg),
                  InvariantError);
}

TEST_CASE("sample gradient rejects out-of-range gamma") {
  const QuadraticOracle oracle({0.0, 0.0});
  CHECK_THROWS_AS(respa_sample_gradient(oracle, {1.0, 1.0}, {}, {0.5, 0.5}, 1.2), ConfigError);
  CHECK_THROWS_AS(respa_sample_gradient(oracle, {1.0, 1.0}, {}, {0.5, 0.5}, -0.1), ConfigError);
}

TEST_CASE("attack config validation rejects each bad bound") {
  AttackConfig cfg;
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.alpha = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.samples = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.theta = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.gamma = 1.01;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.beta = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.rho = -0.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.mu = -0.2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("mean loss over seeded runs rises with the iteration index") {
  // Small trained surrogate; 50 independently seeded runs.
  const std::vector<Vec> means = orthogonal_class_means(16, 3, 0.3, 11);
  const SyntheticSpec train_spec{16, 3, means, 0.05, 60, 21};
  const SyntheticSpec eval_spec{16, 3, means, 0.05, 20, 22};
  const auto train_set = generate_synthetic(train_spec);
  const auto eval_set = generate_synthetic(eval_spec);
  const TrainResult tr = train_classifier({16, {12}, 3, Activation::relu}, train_set, {0.3, 25, 16, 7});
  REQUIRE(tr.train_accuracy >= 0.9);

  AttackConfig cfg;  // stock defaults, smaller T for speed
  cfg.iterations = 8;
  std::vector<double> mean_loss(static_cast<std::size_t>(cfg.iterations), 0.0);
  int runs = 0;
  for (std::size_t i = 0; i < eval_set.size() && runs < 50; ++i, ++runs) {
    cfg.seed = derive_seed(1234, "run:" + std::to_string(i));
    const AttackResult r = run_attack(AttackAlgorithm::respa, tr.model, eval_set[i].x, eval_set[i].y, cfg);
    for (std::size_t t = 0; t < r.trace.rows.size(); ++t) mean_loss[t] += r.trace.rows[t].loss;
  }
  REQUIRE(runs == 50);
  for (double& v : mean_loss) v /= runs;
  for (std::size_t t = 0; t + 1 < mean_loss.size(); ++t) {
    CHECK(mean_loss[t + 1] >= mean_loss[t] - 0.05);
  }
}

TEST_SUITE_END();
