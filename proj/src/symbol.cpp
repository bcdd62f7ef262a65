#include "nlbellman/symbol.hpp"

#include <algorithm>
#include <cmath>

#include "nlbellman/errors.hpp"
#include "nlbellman/nonlocal_eval.hpp"
#include "nlbellman/parallel.hpp"

namespace nlb {

namespace {

void check_resolution(const QuadratureLayout& L, const Point& xi) {
  const double k = norm(xi);
  if (k == 0.0) return;
  const auto& q = L.scheme();
  // A Gauss panel of order p integrates cos over about p/2 radians reliably.
  const double limit = 0.5 * q.panel_order;
  if (L.max_panel_width() * k > limit) {
    const int nodes =
        static_cast<int>(std::ceil(q.panel_order * (q.outer_radius - q.inner_radius) * k / limit));
    throw RefinementError("radial panels do not resolve |xi| = " + std::to_string(k), nodes);
  }
  if (L.dimension() == 2) {
    // The M-point trapezoid on the circle of radius R is exact below harmonic M.
    const double needed = q.outer_radius * k + 16.0;
    if (q.angular_nodes < needed) {
      int nodes = static_cast<int>(std::ceil(needed));
      nodes += nodes % 2;
      throw RefinementError("angular nodes do not resolve |xi| = " + std::to_string(k), nodes);
    }
  }
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

}  // namespace

double symbol(const KernelTable& table, const QuadratureLayout& L, const Point& xi) {
  PointSamples s;
  s.dimension = L.dimension();
  s.h = 0.0;
  s.core.resize(L.direction_count());
  for (std::size_t k = 0; k < L.direction_count(); ++k) {
    const double d = dot(L.direction(k), xi);
    s.core[k] = -(d * d);
  }
  s.ring.resize(L.atom_count());
  s.ring_error.assign(L.atom_count(), 0.0);
  for (std::size_t a = 0; a < L.atom_count(); ++a)
    s.ring[a] = 2.0 * std::cos(dot(xi, L.atom_offset(a))) - 2.0;
  // Beyond R_tail cos(ξ·y) averages out, except at ξ = 0 where 1 − cos vanishes.
  s.tail_delta = norm(xi) == 0.0 ? 0.0 : -2.0;
  // Every term of the sum is ≤ 0, so the negation is ≥ 0 in floating point.
  return 0.0 - apply_linear(table, L, s).value;
}

double symbol(const Kernel& kernel, const Point& xi, const QuadratureScheme& scheme) {
  const QuadratureLayout layout(scheme, kernel.dimension());
  check_resolution(layout, xi);
  return symbol(tabulate(kernel, layout), layout, xi);
}

QuadratureScheme symbol_scheme() {
  QuadratureScheme q;
  q.inner_radius = 1.0 / 64.0;
  q.outer_radius = 32.0;
  q.max_panel_width = 0.5;
  q.angular_nodes = 64;
  q.breakpoints.clear();
  return q;
}

std::vector<double> default_magnitudes() {
  std::vector<double> m;
  for (int i = 0; i < 16; ++i) m.push_back(0.25 * std::pow(256.0, i / 15.0));
  return m;
}

std::vector<Point> default_directions(int dimension) {
  if (dimension == 1) return {{1.0, 0.0}};
  std::vector<Point> d;
  for (int j = 0; j < 4; ++j) d.push_back({std::cos(M_PI * j / 4.0), std::sin(M_PI * j / 4.0)});
  return d;
}

ComparabilityFit comparability_fit(const Kernel& kernel, const std::vector<double>& magnitudes,
                                   const std::vector<Point>& directions,
                                   const QuadratureScheme& base) {
  if (magnitudes.size() < 8) throw ValidationError("xi_range", "need at least 8 magnitudes");
  for (double m : magnitudes)
    if (!(m > 0.0) || !std::isfinite(m)) throw ValidationError("xi_range", "magnitudes must be positive");
  const auto [lo, hi] = std::minmax_element(magnitudes.begin(), magnitudes.end());
  if (*hi / *lo < 100.0 * (1.0 - 1e-12))
    throw ValidationError("xi_range", "magnitudes must span at least 2 decades");
  if (directions.empty()) throw ValidationError("directions", "must not be empty");

  const double sigma = kernel.sigma();
  const std::size_t D = directions.size(), M = magnitudes.size();
  std::vector<Point> units;
  for (const auto& d : directions) {
    const double r = norm(d);
    if (!(r > 0.0)) throw ValidationError("directions", "must be nonzero");
    units.push_back((1.0 / r) * d);
  }

  std::vector<double> values(D * M);
  parallel_for(M, [&](std::size_t i) {
    const double r = magnitudes[i];
    const QuadratureScheme q = base.scaled(1.0 / r);
    const QuadratureLayout layout(q, kernel.dimension());
    const KernelTable table = tabulate(kernel, layout);
    for (std::size_t d = 0; d < D; ++d) {
      const Point xi = r * units[d];
      check_resolution(layout, xi);
      values[d * M + i] = symbol(table, layout, xi);
    }
  });

  ComparabilityFit fit;
  fit.curve.sigma = sigma;
  std::vector<double> lx, ly;
  fit.c_low = std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < D; ++d) {
    DirectionFit df;
    df.direction = units[d];
    df.c_low = std::numeric_limits<double>::infinity();
    std::vector<double> dx, dy;
    for (std::size_t i = 0; i < M; ++i) {
      const double s = values[d * M + i];
      if (!(s > 0.0)) throw DataError("symbol sample is not positive");
      const double ratio = s / std::pow(magnitudes[i], sigma);
      df.c_low = std::min(df.c_low, ratio);
      df.C_high = std::max(df.C_high, ratio);
      dx.push_back(std::log(magnitudes[i]));
      dy.push_back(std::log(s));
      fit.curve.xi_samples.push_back(magnitudes[i] * units[d]);
      fit.curve.s_values.push_back(s);
      fit.curve.direction_index.push_back(d);
    }
    const LineFit lf = least_squares(dx, dy);
    df.exponent_fit = lf.slope;
    df.fit_residual = lf.rms;
    fit.c_low = std::min(fit.c_low, df.c_low);
    fit.C_high = std::max(fit.C_high, df.C_high);
    lx.insert(lx.end(), dx.begin(), dx.end());
    ly.insert(ly.end(), dy.begin(), dy.end());
    fit.per_direction.push_back(df);
  }
  const LineFit all = least_squares(lx, ly);
  fit.exponent_fit = all.slope;
  fit.fit_residual = all.rms;
  return fit;
}

nlohmann::json to_json(const ComparabilityFit& fit) {
  nlohmann::json dirs = nlohmann::json::array();
  for (const auto& d : fit.per_direction)
    dirs.push_back({{"direction", d.direction},
                    {"c_low", d.c_low},
                    {"C_high", d.C_high},
                    {"exponent_fit", d.exponent_fit},
                    {"fit_residual", d.fit_residual}});
  return {{"sigma", fit.curve.sigma},       {"c_low", fit.c_low},
          {"C_high", fit.C_high},           {"exponent_fit", fit.exponent_fit},
          {"fit_residual", fit.fit_residual}, {"per_direction", dirs}};
}

}  // namespace nlb
