#include <cmath>
#include <utility>
#include <vector>

#include <doctest.h>

#include "respa/data.hpp"
#include "respa/error.hpp"
#include "respa/evaluation.hpp"
#include "respa/rng.hpp"
#include "respa/train.hpp"
#include "test_support.hpp"

using namespace respa;
using respa::testing::QuadraticOracle;
using respa::testing::ShiftedOracle;

namespace {

// Linear 2-class model that predicts class 0 iff x0 > x1.
MlpClassifier axis_model() {
  Matrix w(2, 2);
  w.at(0, 0) = 10.0;
  w.at(1, 1) = 10.0;
  return MlpClassifier({2, {}, 2, Activation::relu}, {w}, {vec::zeros(2)});
}

}  // namespace

TEST_SUITE_BEGIN("evaluation");

TEST_CASE("identity pairs score zero") {
  const MlpClassifier m = axis_model();
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int i = 0; i < 5; ++i) {
    const Vec x{0.1 * i, 1.0 - 0.1 * i};
    pairs.emplace_back(x, x);
  }
  CHECK(attack_success_rate(m, pairs) == 0.0);
}

TEST_CASE("three flips out of four pairs score 0.75") {
  const MlpClassifier m = axis_model();
  std::vector<std::pair<Vec, Vec>> pairs;
  pairs.emplace_back(Vec{0.8, 0.2}, Vec{0.2, 0.8});  // flip
  pairs.emplace_back(Vec{0.9, 0.1}, Vec{0.1, 0.9});  // flip
  pairs.emplace_back(Vec{0.2, 0.7}, Vec{0.7, 0.2});  // flip
  pairs.emplace_back(Vec{0.9, 0.0}, Vec{0.8, 0.1});  // stays class 0
  CHECK(attack_success_rate(m, pairs) == 0.75);
}

TEST_CASE("empty pair list is rejected") {
  const MlpClassifier m = axis_model();
  CHECK_THROWS_AS(attack_success_rate(m, {}), ConfigError);
}

TEST_CASE("evaluation set keeps only samples every model gets right") {
  const MlpClassifier m = axis_model();
  std::vector<LabeledSample> candidates;
  candidates.emplace_back(Vec{0.9, 0.1}, vec::one_hot(0, 2));  // correct
  candidates.emplace_back(Vec{0.1, 0.9}, vec::one_hot(0, 2));  // wrong
  candidates.emplace_back(Vec{0.2, 0.8}, vec::one_hot(1, 2));  // correct
  const auto kept = select_evaluation_set({{"m", &m}}, candidates);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].x == Vec{0.9, 0.1});
  CHECK(kept[1].x == Vec{0.2, 0.8});
}

TEST_CASE("transfer matrix: a surrogate with zero gradients yields all-zero cells") {
  const MlpClassifier frozen({2, {}, 2, Activation::relu}, {Matrix(2, 2)}, {vec::zeros(2)});
  const MlpClassifier target = axis_model();
  std::vector<LabeledSample> dataset;
  dataset.emplace_back(Vec{0.9, 0.1}, vec::one_hot(0, 2));
  dataset.emplace_back(Vec{0.1, 0.8}, vec::one_hot(1, 2));

  AttackSpec spec{"respa_small", AttackAlgorithm::respa, {}};
  spec.config.iterations = 3;
  spec.config.samples = 2;
  const auto reports = transfer_matrix({{"frozen", &frozen}},
                                       {{"frozen", &frozen}, {"target", &target}}, {spec}, dataset, 7);
  REQUIRE(reports.size() == 1);
  REQUIRE(reports[0].cells.size() == 2);
  for (const TransferCell& c : reports[0].cells) CHECK(c.asr == 0.0);
  CHECK(reports[0].cells[0].white_box);
  CHECK_FALSE(reports[0].cells[1].white_box);
}

TEST_CASE("transfer matrix is deterministic in the run seed") {
  const MlpClassifier a = MlpClassifier::seeded_init({4, {5}, 2, Activation::relu}, 1);
  const MlpClassifier b = MlpClassifier::seeded_init({4, {3}, 2, Activation::tanh}, 2);
  SeededRng rng(3);
  std::vector<LabeledSample> dataset;
  for (int i = 0; i < 6; ++i) {
    dataset.emplace_back(respa::testing::random_vec(rng, 4, 0.0, 1.0),
                         vec::one_hot(static_cast<int>(rng.next_below(2)), 2));
  }
  AttackSpec spec{"mi", AttackAlgorithm::mifgsm, {}};
  spec.config.iterations = 4;
  const auto r1 = transfer_matrix({{"a", &a}}, {{"a", &a}, {"b", &b}}, {spec}, dataset, 99);
  const auto r2 = transfer_matrix({{"a", &a}}, {{"a", &a}, {"b", &b}}, {spec}, dataset, 99);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    for (std::size_t c = 0; c < r1[i].cells.size(); ++c) {
      CHECK(r1[i].cells[c].asr == r2[i].cells[c].asr);
    }
  }
}

TEST_CASE("transfer matrix rejects mismatched models") {
  const MlpClassifier a = MlpClassifier::seeded_init({4, {}, 2, Activation::relu}, 1);
  const MlpClassifier b = MlpClassifier::seeded_init({5, {}, 2, Activation::relu}, 2);
  std::vector<LabeledSample> dataset;
  dataset.emplace_back(Vec{0.1, 0.2, 0.3, 0.4}, vec::one_hot(0, 2));
  AttackSpec spec{"mi", AttackAlgorithm::mifgsm, {}};
  CHECK_THROWS_AS(transfer_matrix({{"a", &a}}, {{"b", &b}}, {spec}, dataset, 1), DimensionError);
}

TEST_CASE("surface grid: zero extent degenerates to the center loss everywhere") {
  const QuadraticOracle oracle(vec::zeros(4));
  SeededRng rng(5);
  const Vec x{0.1, 0.2, 0.3, 0.4};
  const SurfaceGrid g = loss_surface(oracle, x, {}, 0.0, 5, rng);
  for (double v : g.losses) CHECK(v == g.center_loss);
}

TEST_CASE("surface grid directions are orthonormal") {
  const QuadraticOracle oracle(vec::zeros(16));
  SeededRng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const SurfaceGrid g = loss_surface(oracle, vec::zeros(16), {}, 0.1, 5, rng);
    CHECK(std::fabs(vec::l2_norm(g.u) - 1.0) <= 1e-12);
    CHECK(std::fabs(vec::l2_norm(g.v) - 1.0) <= 1e-12);
    CHECK(std::fabs(vec::dot(g.u, g.v)) <= 1e-10);
  }
}

TEST_CASE("surface grid center cell equals the directly computed loss") {
  const MlpClassifier m = MlpClassifier::seeded_init({6, {5}, 3, Activation::tanh}, 8);
  SeededRng rng(7);
  const Vec x = respa::testing::random_vec(rng, 6, 0.0, 1.0);
  const Vec y = vec::one_hot(1, 3);
  const SurfaceGrid g = loss_surface(m, x, y, 0.1, 7, rng);
  CHECK(g.at(3, 3) == m.loss(x, y));
  CHECK(g.center_loss == m.loss(x, y));
}

TEST_CASE("surface grid matches the quadratic closed form") {
  const Vec center = vec::zeros(8);
  const QuadraticOracle oracle(center);
  SeededRng rng(9);
  const double extent = 0.25;
  const int steps = 9;
  const SurfaceGrid g = loss_surface(oracle, center, {}, extent, steps, rng);
  for (int ia = 0; ia < steps; ++ia) {
    const double a = extent * (2.0 * ia / (steps - 1.0) - 1.0);
    for (int ib = 0; ib < steps; ++ib) {
      const double b = extent * (2.0 * ib / (steps - 1.0) - 1.0);
      CHECK(g.at(ia, ib) == doctest::Approx(0.5 * (a * a + b * b)).epsilon(1e-12));
    }
  }
}

TEST_CASE("sharpness of a constant surface is zero") {
  const MlpClassifier uniform({3, {}, 3, Activation::relu}, {Matrix(3, 3)}, {vec::zeros(3)});
  SeededRng rng(10);
  const SurfaceGrid g = loss_surface(uniform, Vec{0.2, 0.5, 0.8}, vec::one_hot(0, 3), 0.2, 5, rng);
  CHECK(sharpness_score(g) == 0.0);
  CHECK(mean_gap(g) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("sharpness of the quadratic grid: corner worst case and axis cut") {
  const Vec center = vec::zeros(6);
  const QuadraticOracle oracle(center);
  SeededRng rng(11);
  const double extent = 0.2;
  const int steps = 11;
  const SurfaceGrid g = loss_surface(oracle, center, {}, extent, steps, rng);
  // Full-grid worst case sits at a corner: (e^2 + e^2)/2.
  CHECK(sharpness_score(g) == doctest::Approx(extent * extent).epsilon(1e-12));
  // Along a single direction the worst rise is e^2/2.
  double axis_max = 0.0;
  const int c = steps / 2;
  for (int ib = 0; ib < steps; ++ib) axis_max = std::max(axis_max, g.at(c, ib) - g.center_loss);
  CHECK(axis_max == doctest::Approx(0.5 * extent * extent).epsilon(1e-12));
}

TEST_CASE("sharpness is invariant under a constant loss shift") {
  const MlpClassifier m = MlpClassifier::seeded_init({5, {4}, 2, Activation::relu}, 12);
  const ShiftedOracle shifted(m, 1234.5);
  const Vec x{0.1, 0.3, 0.5, 0.7, 0.9};
  const Vec y = vec::one_hot(0, 2);
  SeededRng rng_a(13);
  SeededRng rng_b(13);
  const SurfaceGrid ga = loss_surface(m, x, y, 0.15, 9, rng_a);
  const SurfaceGrid gb = loss_surface(shifted, x, y, 0.15, 9, rng_b);
  CHECK(sharpness_score(ga) == doctest::Approx(sharpness_score(gb)).epsilon(1e-9));
  CHECK(mean_gap(ga) == doctest::Approx(mean_gap(gb)).epsilon(1e-9));
}

TEST_CASE("surface rejects bad step counts") {
  const QuadraticOracle oracle(vec::zeros(4));
  SeededRng rng(14);
  CHECK_THROWS_AS(loss_surface(oracle, vec::zeros(4), {}, 0.1, 4, rng), ConfigError);
  CHECK_THROWS_AS(loss_surface(oracle, vec::zeros(4), {}, 0.1, 1, rng), ConfigError);
}

TEST_CASE("serialized surface carries metadata and the full matrix") {
  const QuadraticOracle oracle(vec::zeros(4));
  SeededRng rng(15);
  const SurfaceGrid g = loss_surface(oracle, vec::zeros(4), {}, 0.1, 5, rng);
  const std::string text = serialize_surface(g);
  CHECK(text.find("# loss surface grid 5x5") == 0);
  int rows = 0;
  for (char ch : text) {
    if (ch == '\n') ++rows;
  }
  CHECK(rows == 4 + 5);  // four metadata lines plus the matrix
}

TEST_SUITE_END();
