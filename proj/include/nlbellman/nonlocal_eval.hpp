#pragma once

#include <memory>
#include <vector>

#include "nlbellman/field.hpp"
#include "nlbellman/kernel.hpp"
#include "nlbellman/problem.hpp"
#include "nlbellman/quadrature.hpp"

namespace nlb {

struct EvalResult {
  double value = 0.0;
  /// Taylor remainder of the core, discrete Hessian error, and interpolation
  /// error of the ring samples.
  double inner_error = 0.0;
  /// Bound on the truncation of |y| > R_tail.
  double tail_error = 0.0;

  double error() const { return inner_error + tail_error; }
};

struct BellmanResult {
  double value = 0.0;
  /// Least index attaining the infimum.
  std::size_t argmin = 0;
  /// L_a u(x) + b_a per kernel.
  std::vector<double> values;
  /// Largest error over the family.
  double error = 0.0;
};

enum class PucciSign { Plus, Minus };

/// Everything an operator needs to know about u near x. Gathering once and
/// applying several operators keeps them on identical samples.
struct PointSamples {
  Point x{};
  double h = 0.0;
  int dimension = 1;
  double ux = 0.0;
  /// θ_kᵀ D²u(x) θ_k from the lattice stencil, per direction.
  std::vector<double> core;
  /// u(x+y) + u(x−y) − 2u(x) per atom.
  std::vector<double> ring;
  /// Interpolation error bound of each ring entry.
  std::vector<double> ring_error;
  /// 2·offset − 2u(x): the tail integrand with the closure replaced by its mean.
  double tail_delta = 0.0;
  /// Bound on |u(x±y) − offset| for |y| > R_tail.
  double tail_oscillation = 0.0;
  /// Estimate of max |∂⁴u| near x.
  double fourth = 0.0;
};

/// Throws ConfigurationError when x lies outside the grid box and
/// ValidationError when the scheme does not fit the grid.
PointSamples gather_samples(const ScalarField& u, const Point& x, const QuadratureLayout& layout);

EvalResult apply_linear(const KernelTable& table, const QuadratureLayout& layout,
                        const PointSamples& s);
/// upper: table of Λ(2−σ)/|y|^{n+σ}; lower: table of λ(2−σ)/|y|^{n+σ}.
EvalResult apply_pucci(const KernelTable& upper, const KernelTable& lower,
                       const QuadratureLayout& layout, const PointSamples& s, PucciSign sign);
/// Same decomposition with |δu| and |θᵀD²uθ|.
EvalResult apply_absolute(const KernelTable& table, const QuadratureLayout& layout,
                          const PointSamples& s);

/// A kernel tabulated on a layout, reusable across points and fields.
class LinearOperator {
public:
  LinearOperator(const Kernel& kernel, std::shared_ptr<const QuadratureLayout> layout);
  LinearOperator(const Kernel& kernel, const QuadratureScheme& scheme);

  EvalResult operator()(const ScalarField& u, const Point& x) const;
  EvalResult operator()(const PointSamples& s) const { return apply_linear(table_, *layout_, s); }

  const Kernel& kernel() const { return kernel_; }
  const QuadratureLayout& layout() const { return *layout_; }
  std::shared_ptr<const QuadratureLayout> layout_ptr() const { return layout_; }
  const KernelTable& table() const { return table_; }

private:
  Kernel kernel_;
  std::shared_ptr<const QuadratureLayout> layout_;
  KernelTable table_;
};

class PucciOperator {
public:
  PucciOperator(EllipticityBounds bounds, double sigma, std::shared_ptr<const QuadratureLayout> layout);

  EvalResult operator()(const PointSamples& s, PucciSign sign) const {
    return apply_pucci(upper_, lower_, *layout_, s, sign);
  }
  const KernelTable& upper() const { return upper_; }
  const KernelTable& lower() const { return lower_; }

private:
  std::shared_ptr<const QuadratureLayout> layout_;
  KernelTable upper_;
  KernelTable lower_;
};

/// u(x+y) + u(x−y) − 2u(x).
double second_difference(const ScalarField& u, const Point& x, const Point& y, int order = 1);

EvalResult evaluate_linear(const Kernel& kernel, const ScalarField& u, const Point& x,
                           const QuadratureScheme& scheme);

EvalResult evaluate_pucci(const ScalarField& u, const Point& x, EllipticityBounds bounds,
                          double sigma, PucciSign sign, const QuadratureScheme& scheme);

BellmanResult evaluate_bellman(const BellmanProblem& problem, const ScalarField& u,
                               const Point& x, const QuadratureScheme& scheme);

/// The operator of the power kernel (2−σ)/|y|^{n+σ}.
EvalResult fractional_laplacian(const ScalarField& u, const Point& x, double sigma,
                                const QuadratureScheme& scheme);

/// 4·sup_norm·Λ·(2−σ)·|S^{n−1}|·R_tail^{−σ}/σ.
double tail_bound(double sup_norm, double R_tail, double sigma, double Lambda, int n);

}  // namespace nlb
