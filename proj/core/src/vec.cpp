#include "respa/vec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "respa/error.hpp"

namespace respa::vec {

void check_same_size(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw DimensionError("vector length mismatch: " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
}

Vec zeros(std::size_t n) { return Vec(n, 0.0); }

Vec add(const Vec& a, const Vec& b) {
  check_same_size(a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vec sub(const Vec& a, const Vec& b) {
  check_same_size(a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vec scale(double c, const Vec& v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = c * v[i];
  return out;
}

Vec lincomb(double c1, const Vec& a, double c2, const Vec& b) {
  check_same_size(a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = c1 * a[i] + c2 * b[i];
  return out;
}

void add_in_place(Vec& a, const Vec& b) {
  check_same_size(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

void add_scaled_in_place(Vec& a, double c, const Vec& b) {
  check_same_size(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
}

void scale_in_place(Vec& v, double c) {
  for (double& x : v) x *= c;
}

double dot(const Vec& a, const Vec& b) {
  check_same_size(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l1_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

double l2_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double linf_norm(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

Vec sign(const Vec& v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i] > 0.0 ? 1.0 : (v[i] < 0.0 ? -1.0 : 0.0);
  }
  return out;
}

Vec clamp(const Vec& v, double lo, double hi) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::clamp(v[i], lo, hi);
  return out;
}

bool all_finite(const Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool in_box(const Vec& v, double lo, double hi) {
  for (double x : v) {
    if (x < lo || x > hi) return false;
  }
  return true;
}

Vec one_hot(int label, int classes) {
  if (classes < 1 || label < 0 || label >= classes) {
    throw DimensionError("one_hot: label " + std::to_string(label) +
                         " out of range for " + std::to_string(classes) +
                         " classes");
  }
  Vec y(static_cast<std::size_t>(classes), 0.0);
  y[static_cast<std::size_t>(label)] = 1.0;
  return y;
}

int one_hot_index(const Vec& y) {
  int index = -1;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0) {
      if (index >= 0) throw DimensionError("one_hot_index: more than one 1 in label vector");
      index = static_cast<int>(i);
    } else if (y[i] != 0.0) {
      throw DimensionError("one_hot_index: label vector has entry that is neither 0 nor 1");
    }
  }
  if (index < 0) throw DimensionError("one_hot_index: label vector has no 1");
  return index;
}

}  // namespace respa::vec
