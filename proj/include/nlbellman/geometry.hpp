#pragma once

#include <array>
#include <cmath>

namespace nlb {

/// A point or offset in R^n, n in {1, 2}. Unused coordinates are zero.
using Point = std::array<double, 2>;

inline double norm(const Point& p) { return std::hypot(p[0], p[1]); }

inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1]}; }
inline Point operator-(const Point& a) { return {-a[0], -a[1]}; }

inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

/// Surface measure of the unit sphere: 2 for n = 1, 2π for n = 2.
inline double sphere_measure(int n) { return n == 1 ? 2.0 : 2.0 * M_PI; }

/// C² cutoff: 1 on [0, 1/2], 0 on [1, ∞), quintic smoothstep in between.
inline double cutoff(double r) {
  if (r <= 0.5) return 1.0;
  if (r >= 1.0) return 0.0;
  const double s = 2.0 * r - 1.0;
  return 1.0 - s * s * s * (s * (6.0 * s - 15.0) + 10.0);
}

}  // namespace nlb
