#include "nlbellman/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "nlbellman/errors.hpp"

namespace nlb {

namespace {

GaussRule compute_gauss(int order) {
  // Newton iteration on P_order, then map [−1, 1] → [0, 1].
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[order - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[order - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

void add_tap(std::vector<Tap>& taps, int di, int dj, double w) {
  for (auto& t : taps)
    if (t.di == di && t.dj == dj) {
      t.weight += w;
      return;
    }
  taps.push_back({di, dj, w});
}

std::vector<Tap> directional_stencil(const Point& theta, int n) {
  std::vector<Tap> taps;
  const double c = theta[0], s = theta[1];
  add_tap(taps, 0, 0, -2.0 * c * c);
  add_tap(taps, 1, 0, c * c);
  add_tap(taps, -1, 0, c * c);
  if (n == 1) return taps;
  add_tap(taps, 0, 0, -2.0 * s * s);
  add_tap(taps, 0, 1, s * s);
  add_tap(taps, 0, -1, s * s);
  const double cs = c * s;
  if (cs == 0.0) return taps;
  const double a = std::abs(cs);
  const int sj = cs > 0.0 ? 1 : -1;
  add_tap(taps, 1, sj, a);
  add_tap(taps, -1, -sj, a);
  add_tap(taps, 1, 0, -a);
  add_tap(taps, -1, 0, -a);
  add_tap(taps, 0, 1, -a);
  add_tap(taps, 0, -1, -a);
  add_tap(taps, 0, 0, 2.0 * a);
  return taps;
}

template <class Coef>
KernelTable build_table(Coef&& coef, double sigma, const QuadratureLayout& L) {
  const auto& q = L.scheme();
  const int n = L.dimension();
  const auto& g = gauss_legendre(q.moment_nodes);
  KernelTable t;
  t.sigma = sigma;

  const auto checked = [&](double value, double r, const Point& d) {
    if (!std::isfinite(value) || value < 0.0)
      throw KernelEvaluationError("kernel density is negative or not finite", r * d);
    return value;
  };

  t.ring.resize(L.atom_count());
  for (std::size_t a = 0; a < L.atom_count(); ++a) {
    const double r = L.radius(L.atom_radial(a));
    const Point& d = L.direction(L.atom_direction(a));
    t.ring[a] = power_law(checked(coef(r, d), r, d), r, n, sigma) +
                power_law(checked(coef(r, -d), r, -d), r, n, sigma);
  }

  // ∫₀^{r₀} r^{p−1−σ} c(r) dr with r = r₀ t^{1/(p−σ)}.
  const double r0 = q.inner_radius;
  const auto moment = [&](const Point& d, double p) {
    const double e = p - sigma;
    double acc = 0.0;
    for (std::size_t m = 0; m < g.nodes.size(); ++m) {
      const double r = std::max(r0 * std::pow(g.nodes[m], 1.0 / e), r0 * 1e-12);
      acc += g.weights[m] * (checked(coef(r, d), r, d) + checked(coef(r, -d), r, -d));
    }
    return std::pow(r0, e) / e * acc;
  };
  for (std::size_t k = 0; k < L.direction_count(); ++k) {
    t.core.push_back(moment(L.direction(k), 2.0));
    t.core4.push_back(moment(L.direction(k), 4.0));
  }

  // ∫_R^∞ r^{−1−σ} c(r) dr with r = R t^{−1/σ}.
  const double R = q.outer_radius;
  double tail = 0.0;
  for (std::size_t k = 0; k < L.direction_count(); ++k) {
    const Point& d = L.direction(k);
    double acc = 0.0;
    for (std::size_t m = 0; m < g.nodes.size(); ++m) {
      const double r = R * std::pow(g.nodes[m], -1.0 / sigma);
      acc += g.weights[m] * (checked(coef(r, d), r, d) + checked(coef(r, -d), r, -d));
    }
    tail += L.direction_weight(k) * (std::pow(R, -sigma) / sigma * acc);
  }
  t.tail = tail;

  for (double v : t.core)
    if (!std::isfinite(v)) throw ConfigurationError("core moment is not finite");
  if (!std::isfinite(t.tail)) throw ConfigurationError("tail mass is not finite");
  return t;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  if (order < 1 || order > 64) throw ValidationError("order", "Gauss rule order must be in [1, 64]");
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss(order)).first;
  return it->second;
}

void QuadratureScheme::validate() const {
  if (!(inner_radius > 0.0) || !std::isfinite(inner_radius))
    throw ValidationError("inner_radius", "must be positive");
  if (!(outer_radius > inner_radius) || !std::isfinite(outer_radius))
    throw ValidationError("outer_radius", "must exceed inner_radius");
  if (radial_nodes_per_decade < 1)
    throw ValidationError("radial_nodes_per_decade", "must be positive");
  if (panel_order < 1 || panel_order > 64)
    throw ValidationError("panel_order", "must be in [1, 64]");
  if (max_panel_width < 0.0) throw ValidationError("max_panel_width", "must be non-negative");
  if (angular_nodes < 2 || angular_nodes % 2 != 0)
    throw ValidationError("angular_nodes", "must be even and at least 2");
  if (interpolation_order != 0 && interpolation_order != 1 && interpolation_order != 3)
    throw ValidationError("interpolation_order", "must be 0, 1 or 3");
  if (moment_nodes < 1 || moment_nodes > 64)
    throw ValidationError("moment_nodes", "must be in [1, 64]");
}

void QuadratureScheme::validate_for_grid(double h) const {
  validate();
  if (inner_radius > h * (1.0 + 1e-12))
    throw ValidationError("inner_radius", "must not exceed the grid spacing");
  if (outer_radius < h) throw ValidationError("outer_radius", "must be at least the grid spacing");
}

QuadratureScheme QuadratureScheme::for_grid(double h) {
  QuadratureScheme q;
  q.inner_radius = h;
  q.outer_radius = 8.0;
  q.max_panel_width = 2.0 * h;
  return q;
}

QuadratureScheme QuadratureScheme::scaled(double factor) const {
  QuadratureScheme q = *this;
  q.inner_radius *= factor;
  q.outer_radius *= factor;
  q.max_panel_width *= factor;
  for (auto& b : q.breakpoints) b *= factor;
  return q;
}

nlohmann::json QuadratureScheme::to_json() const {
  return {{"inner_radius", inner_radius},
          {"outer_radius", outer_radius},
          {"radial_nodes_per_decade", radial_nodes_per_decade},
          {"panel_order", panel_order},
          {"max_panel_width", max_panel_width},
          {"angular_nodes", angular_nodes},
          {"interpolation_order", interpolation_order},
          {"moment_nodes", moment_nodes},
          {"breakpoints", breakpoints}};
}

QuadratureScheme QuadratureScheme::from_json(const nlohmann::json& j, double h) {
  QuadratureScheme q = for_grid(h);
  if (j.is_null()) return q;
  if (!j.is_object()) throw ValidationError("quadrature", "must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& key = it.key();
    try {
      if (key == "inner_radius") q.inner_radius = it->get<double>();
      else if (key == "outer_radius") q.outer_radius = it->get<double>();
      else if (key == "radial_nodes_per_decade") q.radial_nodes_per_decade = it->get<int>();
      else if (key == "panel_order") q.panel_order = it->get<int>();
      else if (key == "max_panel_width") q.max_panel_width = it->get<double>();
      else if (key == "angular_nodes") q.angular_nodes = it->get<int>();
      else if (key == "interpolation_order") q.interpolation_order = it->get<int>();
      else if (key == "moment_nodes") q.moment_nodes = it->get<int>();
      else if (key == "breakpoints") q.breakpoints = it->get<std::vector<double>>();
      else throw ValidationError("quadrature." + key, "unknown field");
    } catch (const nlohmann::json::exception&) {
      throw ValidationError("quadrature." + key, "wrong type");
    }
  }
  q.validate();
  return q;
}

QuadratureLayout::QuadratureLayout(const QuadratureScheme& scheme, int dimension)
    : scheme_(scheme), n_(dimension) {
  scheme_.validate();
  if (n_ != 1 && n_ != 2) throw ValidationError("dimension", "must be 1 or 2");

  if (n_ == 1) {
    directions_.push_back({1.0, 0.0});
    direction_weights_.push_back(1.0);
  } else {
    const int M = scheme_.angular_nodes;
    for (int k = 0; k < M / 2; ++k) {
      const double th = 2.0 * M_PI * k / M;
      directions_.push_back({std::cos(th), std::sin(th)});
      direction_weights_.push_back(2.0 * M_PI / M);
    }
  }
  for (const auto& d : directions_) stencils_.push_back(directional_stencil(d, n_));

  // Panel edges: geometric growth, capped width, forced breakpoints.
  const double r0 = scheme_.inner_radius, R = scheme_.outer_radius;
  const int panels_per_decade =
      std::max(1, (scheme_.radial_nodes_per_decade + scheme_.panel_order - 1) / scheme_.panel_order);
  const double ratio = std::pow(10.0, 1.0 / panels_per_decade);
  std::vector<double> forced;
  for (double b : scheme_.breakpoints)
    if (b > r0 && b < R) forced.push_back(b);
  std::sort(forced.begin(), forced.end());
  std::vector<double> edges{r0};
  std::size_t next_forced = 0;
  while (edges.back() < R) {
    const double e = edges.back();
    double next = e * ratio;
    if (scheme_.max_panel_width > 0.0) next = std::min(next, e + scheme_.max_panel_width);
    if (next_forced < forced.size() && next >= forced[next_forced] * (1.0 - 1e-9)) {
      next = forced[next_forced++];
    }
    if (next >= R * (1.0 - 1e-9)) next = R;
    edges.push_back(next);
  }

  const auto& g = gauss_legendre(scheme_.panel_order);
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    max_width_ = std::max(max_width_, b - a);
    for (std::size_t m = 0; m < g.nodes.size(); ++m) {
      const double r = a + (b - a) * g.nodes[m];
      radii_.push_back(r);
      radial_weights_.push_back((b - a) * g.weights[m] * (n_ == 2 ? r : 1.0));
    }
  }
}

KernelTable tabulate(const Kernel& kernel, const QuadratureLayout& layout) {
  if (kernel.dimension() != layout.dimension())
    throw ValidationError("kernel", "dimension does not match the quadrature layout");
  return build_table([&](double r, const Point& d) { return kernel.coefficient(r, d); },
                     kernel.sigma(), layout);
}

KernelTable tabulate_power(double coefficient, double sigma, const QuadratureLayout& layout) {
  return build_table([coefficient](double, const Point&) { return coefficient; }, sigma, layout);
}

}  // namespace nlb
