#include "nlbellman/nonlocal_eval.hpp"

#include <cmath>

#include "nlbellman/errors.hpp"

namespace nlb {

namespace {

// M4/12 Σ ω m⁴ + n M4 h²/12 Σ ω m² + Σ W K e.
double inner_error_of(const KernelTable& t, const QuadratureLayout& L, const PointSamples& s) {
  double m2 = 0.0, m4 = 0.0;
  for (std::size_t k = 0; k < L.direction_count(); ++k) {
    m2 += L.direction_weight(k) * t.core[k];
    m4 += L.direction_weight(k) * t.core4[k];
  }
  double ring = 0.0;
  for (std::size_t a = 0; a < L.atom_count(); ++a)
    ring += L.atom_weight(a) * (t.ring[a] * s.ring_error[a]);
  return s.fourth / 12.0 * m4 + s.dimension * s.fourth * s.h * s.h / 12.0 * m2 + ring;
}

}  // namespace

PointSamples gather_samples(const ScalarField& u, const Point& x, const QuadratureLayout& L) {
  if (u.dimension() != L.dimension())
    throw ValidationError("u", "field dimension does not match the quadrature layout");
  const Grid& grid = u.grid();
  L.scheme().validate_for_grid(grid.h());
  if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || !grid.in_box(x))
    throw ConfigurationError("evaluation point lies outside the grid box");

  const int order = L.scheme().interpolation_order;
  PointSamples s;
  s.x = x;
  s.h = grid.h();
  s.dimension = L.dimension();
  s.ux = u.sample(x, order);

  s.core.resize(L.direction_count());
  for (std::size_t k = 0; k < L.direction_count(); ++k) {
    double acc = 0.0;
    for (const auto& tap : L.direction_stencil(k))
      acc += tap.weight * u.sample(x + s.h * Point{double(tap.di), double(tap.dj)}, order);
    s.core[k] = acc / (s.h * s.h);
  }

  const double ex = u.interpolation_error(x, order);
  s.ring.resize(L.atom_count());
  s.ring_error.resize(L.atom_count());
  for (std::size_t a = 0; a < L.atom_count(); ++a) {
    const Point y = L.atom_offset(a);
    const Point zp = x + y, zm = x - y;
    s.ring[a] = u.sample(zp, order) + u.sample(zm, order) - 2.0 * s.ux;
    s.ring_error[a] =
        u.interpolation_error(zp, order) + u.interpolation_error(zm, order) + 2.0 * ex;
  }

  const ExteriorClosure& g = u.exterior();
  s.tail_delta = 2.0 * g.offset() - 2.0 * s.ux;
  const double far = L.scheme().outer_radius - norm(x);
  const double reach = grid.box_radius() * std::sqrt(double(L.dimension()));
  s.tail_oscillation = far >= reach ? g.far_oscillation(far) : 2.0 * u.sup_norm();
  s.fourth = u.local_fourth_derivative(x);
  return s;
}

EvalResult apply_linear(const KernelTable& t, const QuadratureLayout& L, const PointSamples& s) {
  double core = 0.0;
  for (std::size_t k = 0; k < L.direction_count(); ++k)
    core += L.direction_weight(k) * (t.core[k] * s.core[k]);
  double ring = 0.0;
  for (std::size_t a = 0; a < L.atom_count(); ++a)
    ring += L.atom_weight(a) * (t.ring[a] * s.ring[a]);
  EvalResult r;
  r.value = core + ring + t.tail * s.tail_delta;
  r.inner_error = inner_error_of(t, L, s);
  r.tail_error = 2.0 * s.tail_oscillation * t.tail;
  return r;
}

EvalResult apply_pucci(const KernelTable& upper, const KernelTable& lower,
                       const QuadratureLayout& L, const PointSamples& s, PucciSign sign) {
  // M⁺ weighs positive increments with Λ and negative ones with λ; M⁻ swaps.
  const bool plus = sign == PucciSign::Plus;
  const auto& pos = plus ? upper : lower;
  const auto& neg = plus ? lower : upper;
  double core = 0.0;
  for (std::size_t k = 0; k < L.direction_count(); ++k) {
    const double m = s.core[k] >= 0.0 ? pos.core[k] : neg.core[k];
    core += L.direction_weight(k) * (m * s.core[k]);
  }
  double ring = 0.0;
  for (std::size_t a = 0; a < L.atom_count(); ++a) {
    const double K = s.ring[a] >= 0.0 ? pos.ring[a] : neg.ring[a];
    ring += L.atom_weight(a) * (K * s.ring[a]);
  }
  const double T = s.tail_delta >= 0.0 ? pos.tail : neg.tail;
  EvalResult r;
  r.value = core + ring + T * s.tail_delta;
  r.inner_error = inner_error_of(upper, L, s);
  r.tail_error = 2.0 * s.tail_oscillation * upper.tail;
  return r;
}

EvalResult apply_absolute(const KernelTable& t, const QuadratureLayout& L, const PointSamples& s) {
  double core = 0.0;
  for (std::size_t k = 0; k < L.direction_count(); ++k)
    core += L.direction_weight(k) * (t.core[k] * std::abs(s.core[k]));
  double ring = 0.0;
  for (std::size_t a = 0; a < L.atom_count(); ++a)
    ring += L.atom_weight(a) * (t.ring[a] * std::abs(s.ring[a]));
  EvalResult r;
  r.value = core + ring + t.tail * std::abs(s.tail_delta);
  r.inner_error = inner_error_of(t, L, s);
  r.tail_error = 2.0 * s.tail_oscillation * t.tail;
  return r;
}

LinearOperator::LinearOperator(const Kernel& kernel, std::shared_ptr<const QuadratureLayout> layout)
    : kernel_(kernel), layout_(std::move(layout)), table_(tabulate(kernel_, *layout_)) {}

LinearOperator::LinearOperator(const Kernel& kernel, const QuadratureScheme& scheme)
    : LinearOperator(kernel, std::make_shared<QuadratureLayout>(scheme, kernel.dimension())) {}

EvalResult LinearOperator::operator()(const ScalarField& u, const Point& x) const {
  return apply_linear(table_, *layout_, gather_samples(u, x, *layout_));
}

PucciOperator::PucciOperator(EllipticityBounds bounds, double sigma,
                             std::shared_ptr<const QuadratureLayout> layout)
    : layout_(std::move(layout)) {
  bounds.validate();
  upper_ = tabulate_power((2.0 - sigma) * bounds.Lambda, sigma, *layout_);
  lower_ = tabulate_power((2.0 - sigma) * bounds.lambda, sigma, *layout_);
}

double second_difference(const ScalarField& u, const Point& x, const Point& y, int order) {
  return u.sample(x + y, order) + u.sample(x - y, order) - 2.0 * u.sample(x, order);
}

EvalResult evaluate_linear(const Kernel& kernel, const ScalarField& u, const Point& x,
                           const QuadratureScheme& scheme) {
  return LinearOperator(kernel, scheme)(u, x);
}

EvalResult evaluate_pucci(const ScalarField& u, const Point& x, EllipticityBounds bounds,
                          double sigma, PucciSign sign, const QuadratureScheme& scheme) {
  auto layout = std::make_shared<QuadratureLayout>(scheme, u.dimension());
  const PucciOperator op(bounds, sigma, layout);
  return op(gather_samples(u, x, *layout), sign);
}

BellmanResult evaluate_bellman(const BellmanProblem& problem, const ScalarField& u,
                               const Point& x, const QuadratureScheme& scheme) {
  problem.validate();
  auto layout = std::make_shared<QuadratureLayout>(scheme, problem.dimension());
  const PointSamples s = gather_samples(u, x, *layout);
  BellmanResult r;
  for (std::size_t a = 0; a < problem.kernels.size(); ++a) {
    const LinearOperator op(problem.kernels[a], layout);
    const EvalResult e = op(s);
    const double v = e.value + problem.offsets[a];
    r.values.push_back(v);
    r.error = std::max(r.error, e.error());
    if (a == 0 || v < r.value) {
      r.value = v;
      r.argmin = a;
    }
  }
  return r;
}

EvalResult fractional_laplacian(const ScalarField& u, const Point& x, double sigma,
                                const QuadratureScheme& scheme) {
  return evaluate_linear(make_power_kernel(sigma, u.dimension()), u, x, scheme);
}

double tail_bound(double sup_norm, double R_tail, double sigma, double Lambda, int n) {
  if (!(R_tail > 0.0)) throw ValidationError("R_tail", "must be positive");
  return 4.0 * sup_norm * Lambda * (2.0 - sigma) * sphere_measure(n) * std::pow(R_tail, -sigma) /
         sigma;
}

}  // namespace nlb
