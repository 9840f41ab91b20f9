#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

#include <doctest.h>

#include "respa/data.hpp"
#include "respa/error.hpp"
#include "respa/rng.hpp"
#include "respa/train.hpp"
#include "test_support.hpp"

using namespace respa;

namespace {

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void push_u32_be(std::vector<std::uint8_t>& v, std::uint32_t x) {
  v.push_back(static_cast<std::uint8_t>(x >> 24));
  v.push_back(static_cast<std::uint8_t>(x >> 16));
  v.push_back(static_cast<std::uint8_t>(x >> 8));
  v.push_back(static_cast<std::uint8_t>(x));
}

std::vector<std::uint8_t> images_fixture() {
  std::vector<std::uint8_t> bytes;
  push_u32_be(bytes, 0x00000803);
  push_u32_be(bytes, 2);  // count
  push_u32_be(bytes, 2);  // rows
  push_u32_be(bytes, 2);  // cols
  for (std::uint8_t p : {0, 128, 255, 64}) bytes.push_back(p);
  for (std::uint8_t p : {255, 0, 32, 16}) bytes.push_back(p);
  return bytes;
}

std::vector<std::uint8_t> labels_fixture(std::uint32_t count, std::vector<std::uint8_t> labels) {
  std::vector<std::uint8_t> bytes;
  push_u32_be(bytes, 0x00000801);
  push_u32_be(bytes, count);
  bytes.insert(bytes.end(), labels.begin(), labels.end());
  return bytes;
}

SyntheticSpec small_spec(double sigma, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.dim = 16;
  spec.classes = 3;
  spec.means = orthogonal_class_means(16, 3, 0.35, 404);
  spec.noise_sigma = sigma;
  spec.per_class = 40;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_SUITE_BEGIN("data");

TEST_CASE("labeled samples validate their invariants on construction") {
  CHECK_NOTHROW(LabeledSample(Vec{0.0, 0.5, 1.0}, vec::one_hot(1, 2)));
  CHECK_THROWS_AS(LabeledSample(Vec{-0.1, 0.5}, vec::one_hot(0, 2)), InvariantError);
  CHECK_THROWS_AS(LabeledSample(Vec{0.1, 1.5}, vec::one_hot(0, 2)), InvariantError);
  CHECK_THROWS_AS(LabeledSample(Vec{0.1, 0.5}, Vec{0.5, 0.5}), DimensionError);
}

TEST_CASE("synthetic generation produces the exact per-class counts") {
  const auto samples = generate_synthetic(small_spec(0.05, 1));
  REQUIRE(samples.size() == 120);
  std::vector<int> counts(3, 0);
  for (const LabeledSample& s : samples) ++counts[static_cast<std::size_t>(s.label())];
  for (int c : counts) CHECK(c == 40);
}

TEST_CASE("vanishing noise collapses every sample onto its class mean") {
  const SyntheticSpec spec = small_spec(1e-300, 2);
  const auto samples = generate_synthetic(spec);
  for (const LabeledSample& s : samples) {
    CHECK(s.x == spec.means[static_cast<std::size_t>(s.label())]);
  }
}

TEST_CASE("synthetic generation is a pure function of its spec") {
  const auto a = generate_synthetic(small_spec(0.04, 3));
  const auto b = generate_synthetic(small_spec(0.04, 3));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
  }
  const auto c = generate_synthetic(small_spec(0.04, 4));
  CHECK(a.front().x != c.front().x);
}

TEST_CASE("well-separated blobs are learnable to 99 percent") {
  // Pairwise mean distance is radius*sqrt(2) ~ 0.495 >= 6*sigma*sqrt(dim)
  // for sigma = 0.02, so a nearest-mean rule must already be near-perfect.
  const SyntheticSpec spec = small_spec(0.02, 5);
  const auto samples = generate_synthetic(spec);

  int nearest_mean_correct = 0;
  for (const LabeledSample& s : samples) {
    int best = -1;
    double best_d = 0.0;
    for (int k = 0; k < spec.classes; ++k) {
      const double d = vec::l2_norm(vec::sub(s.x, spec.means[static_cast<std::size_t>(k)]));
      if (best < 0 || d < best_d) {
        best = k;
        best_d = d;
      }
    }
    if (best == s.label()) ++nearest_mean_correct;
  }
  CHECK(static_cast<double>(nearest_mean_correct) / samples.size() >= 0.99);

  const TrainResult r = train_classifier({16, {}, 3, Activation::relu}, samples, {0.5, 30, 16, 6});
  CHECK(r.train_accuracy >= 0.99);
}

TEST_CASE("synthetic spec validation") {
  SyntheticSpec spec = small_spec(0.05, 1);
  spec.noise_sigma = 0.0;
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
  spec = small_spec(0.05, 1);
  spec.means[1] = spec.means[0];
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
  spec = small_spec(0.05, 1);
  spec.per_class = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
}

TEST_CASE("orthogonal class means are orthonormal directions inside the box") {
  const auto means = orthogonal_class_means(16, 4, 0.35, 7);
  REQUIRE(means.size() == 4);
  for (std::size_t i = 0; i < means.size(); ++i) {
    CHECK(vec::in_box(means[i], 0.0, 1.0));
    const Vec di = vec::scale(1.0 / 0.35, vec::sub(means[i], Vec(16, 0.5)));
    CHECK(vec::l2_norm(di) == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t j = i + 1; j < means.size(); ++j) {
      const Vec dj = vec::scale(1.0 / 0.35, vec::sub(means[j], Vec(16, 0.5)));
      CHECK(std::fabs(vec::dot(di, dj)) <= 1e-9);
    }
  }
}

TEST_CASE("IDX fixture round-trips to exact vectors") {
  respa::testing::TempDir dir("idx");
  write_bytes(dir.path() / "im.idx", images_fixture());
  write_bytes(dir.path() / "lb.idx", labels_fixture(2, {1, 0}));
  const auto samples = load_idx(dir.path() / "im.idx", dir.path() / "lb.idx");
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].x == Vec{0.0, 128.0 / 255.0, 1.0, 64.0 / 255.0});
  CHECK(samples[0].y == Vec{0.0, 1.0});
  CHECK(samples[1].x == Vec{1.0, 0.0, 32.0 / 255.0, 16.0 / 255.0});
  CHECK(samples[1].y == Vec{1.0, 0.0});
  CHECK(samples[1].x[0] == 1.0);  // pixel 255 scales to exactly 1
}

TEST_CASE("IDX bad magic is reported with its byte offset") {
  respa::testing::TempDir dir("idx");
  auto bad = images_fixture();
  bad[3] = 0x99;
  write_bytes(dir.path() / "im.idx", bad);
  write_bytes(dir.path() / "lb.idx", labels_fixture(2, {1, 0}));
  CHECK_THROWS_WITH_AS(load_idx(dir.path() / "im.idx", dir.path() / "lb.idx"),
                       doctest::Contains("bad magic"), ParseError);

  auto bad_labels = labels_fixture(2, {1, 0});
  bad_labels[3] = 0x05;
  write_bytes(dir.path() / "im2.idx", images_fixture());
  write_bytes(dir.path() / "lb2.idx", bad_labels);
  CHECK_THROWS_WITH_AS(load_idx(dir.path() / "im2.idx", dir.path() / "lb2.idx"),
                       doctest::Contains("0x00000801"), ParseError);
}

TEST_CASE("IDX truncation is reported with the failing offset") {
  respa::testing::TempDir dir("idx");
  auto truncated = images_fixture();
  truncated.resize(truncated.size() - 3);
  write_bytes(dir.path() / "im.idx", truncated);
  write_bytes(dir.path() / "lb.idx", labels_fixture(2, {1, 0}));
  CHECK_THROWS_WITH_AS(load_idx(dir.path() / "im.idx", dir.path() / "lb.idx"),
                       doctest::Contains("truncated file at byte offset 21"), ParseError);
}

TEST_CASE("IDX image/label count mismatch is rejected") {
  respa::testing::TempDir dir("idx");
  write_bytes(dir.path() / "im.idx", images_fixture());
  write_bytes(dir.path() / "lb.idx", labels_fixture(3, {1, 0, 1}));
  CHECK_THROWS_WITH_AS(load_idx(dir.path() / "im.idx", dir.path() / "lb.idx"),
                       doctest::Contains("count mismatch"), ParseError);
}

TEST_CASE("IDX trailing bytes are rejected") {
  respa::testing::TempDir dir("idx");
  auto padded = images_fixture();
  padded.push_back(0x00);
  write_bytes(dir.path() / "im.idx", padded);
  write_bytes(dir.path() / "lb.idx", labels_fixture(2, {1, 0}));
  CHECK_THROWS_WITH_AS(load_idx(dir.path() / "im.idx", dir.path() / "lb.idx"),
                       doctest::Contains("trailing data"), ParseError);
}

TEST_SUITE_END();
