#include <benchmark/benchmark.h>

#include "respa/attack.hpp"
#include "respa/evaluation.hpp"
#include "respa/model.hpp"
#include "respa/rng.hpp"

namespace {

using namespace respa;

MlpClassifier bench_model() {
  return MlpClassifier::seeded_init({64, {32}, 4, Activation::relu}, 7);
}

Vec bench_input(std::uint64_t seed) {
  SeededRng rng(seed);
  Vec x(64);
  for (double& v : x) v = rng.uniform(0.0, 1.0);
  return x;
}

void BM_Forward(benchmark::State& state) {
  const MlpClassifier m = bench_model();
  const Vec x = bench_input(1);
  for (auto _ : state) benchmark::DoNotOptimize(m.forward(x));
}
BENCHMARK(BM_Forward);

void BM_InputGradient(benchmark::State& state) {
  const MlpClassifier m = bench_model();
  const Vec x = bench_input(2);
  const Vec y = vec::one_hot(1, 4);
  for (auto _ : state) benchmark::DoNotOptimize(m.input_gradient(x, y));
}
BENCHMARK(BM_InputGradient);

void BM_RespaStep(benchmark::State& state) {
  const MlpClassifier m = bench_model();
  const Vec x = bench_input(3);
  const Vec y = vec::one_hot(2, 4);
  AttackConfig cfg;
  cfg.samples = static_cast<int>(state.range(0));
  SeededRng rng(11);
  AttackState s = initial_state(x);
  for (auto _ : state) {
    s = respa_step(m, s, x, y, cfg, rng);
    benchmark::DoNotOptimize(s.x_adv.data());
  }
}
BENCHMARK(BM_RespaStep)->Arg(1)->Arg(5)->Arg(20);

void BM_RunAttack(benchmark::State& state) {
  const MlpClassifier m = bench_model();
  const Vec x = bench_input(4);
  const Vec y = vec::one_hot(0, 4);
  AttackConfig cfg;
  cfg.seed = 13;
  const auto alg = static_cast<AttackAlgorithm>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_attack(alg, m, x, y, cfg).x_adv.data());
}
BENCHMARK(BM_RunAttack)
    ->Arg(static_cast<int>(AttackAlgorithm::mifgsm))
    ->Arg(static_cast<int>(AttackAlgorithm::flat_current_grad))
    ->Arg(static_cast<int>(AttackAlgorithm::respa));

void BM_LossSurface(benchmark::State& state) {
  const MlpClassifier m = bench_model();
  const Vec x = bench_input(5);
  const Vec y = vec::one_hot(3, 4);
  const int steps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    SeededRng rng(17);
    benchmark::DoNotOptimize(loss_surface(m, x, y, 0.1, steps, rng).losses.data());
  }
}
BENCHMARK(BM_LossSurface)->Arg(11)->Arg(41);

}  // namespace

BENCHMARK_MAIN();
