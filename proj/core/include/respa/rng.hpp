#pragma once

#include <cstdint>
#include <string_view>

#include "respa/vec.hpp"

namespace respa {

// Deterministic pseudo-random generator (SplitMix64, Steele et al. 2014).
// The algorithm is fixed so a given seed yields the same stream everywhere:
// uniform draws use integer arithmetic plus one exact float multiply, which
// keeps experiment outputs reproducible byte for byte.
//
// An instance is single-owner. Hand parallel workers independent sub-seeds
// via derive_seed instead of sharing one generator.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform on [0,1) with 53 random bits.
  double next_unit();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer on [0, n), n > 0. Modulo reduction.
  std::uint64_t next_below(std::uint64_t n);

  // Standard normal via Box-Muller; consumes exactly two uniform draws.
  double normal();

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// SplitMix64 output function, usable as a 64-bit mixer.
std::uint64_t mix64(std::uint64_t z);

// Stable sub-seed for a labeled sub-task (per model, per attack, per
// sample). The label is hashed with FNV-1a and mixed into the seed, so
// adding one labeled consumer never perturbs another's stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

// Every coordinate drawn independently, uniform on [-half_width, +half_width].
Vec sample_uniform_box(SeededRng& rng, std::size_t dim, double half_width);

}  // namespace respa
