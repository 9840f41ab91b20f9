#include "respa/rng.hpp"

#include <cmath>
#include <numbers>

#include "respa/error.hpp"

namespace respa {

std::uint64_t SeededRng::next_u64() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SeededRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_unit();
}

std::uint64_t SeededRng::next_below(std::uint64_t n) {
  if (n == 0) throw InvariantError("next_below: n must be positive");
  return next_u64() % n;
}

double SeededRng::normal() {
  // u1 is kept away from 0 so the log stays finite.
  double u1 = next_unit();
  double u2 = next_unit();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a 64-bit
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return mix64(seed ^ h);
}

Vec sample_uniform_box(SeededRng& rng, std::size_t dim, double half_width) {
  if (half_width < 0.0) throw InvariantError("sample_uniform_box: negative half_width");
  Vec out(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    out[i] = (2.0 * rng.next_unit() - 1.0) * half_width;
  }
  return out;
}

}  // namespace respa
