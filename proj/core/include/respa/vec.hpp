#pragma once

#include <cstddef>
#include <vector>

namespace respa {

// Dense vector of 64-bit reals. Length is fixed when the vector is built;
// binary operations reject mismatched lengths.
using Vec = std::vector<double>;

namespace vec {

void check_same_size(const Vec& a, const Vec& b);

Vec zeros(std::size_t n);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(double c, const Vec& v);
// c1*a + c2*b
Vec lincomb(double c1, const Vec& a, double c2, const Vec& b);
void add_in_place(Vec& a, const Vec& b);
void add_scaled_in_place(Vec& a, double c, const Vec& b);
void scale_in_place(Vec& v, double c);

double dot(const Vec& a, const Vec& b);
double l1_norm(const Vec& v);
double l2_norm(const Vec& v);
double linf_norm(const Vec& v);

// Coordinate-wise sign with sign(0) = 0.
Vec sign(const Vec& v);
Vec clamp(const Vec& v, double lo, double hi);

bool all_finite(const Vec& v);
bool in_box(const Vec& v, double lo, double hi);

// One-hot utilities. `one_hot_index` insists on exactly one coordinate
// equal to 1 and the rest equal to 0.
Vec one_hot(int label, int classes);
int one_hot_index(const Vec& y);

}  // namespace vec
}  // namespace respa
