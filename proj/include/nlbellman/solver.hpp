#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "nlbellman/field.hpp"
#include "nlbellman/problem.hpp"
#include "nlbellman/quadrature.hpp"

namespace nlb {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Per-kernel affine stencils L_a u(x_i) ≈ (A_a U)_i + c_a,i on the interior
/// nodes |x| < 1. c includes the exterior data and the offset b_a.
struct Stencils {
  Grid grid{1, 1.0 / 64.0, 2.0};
  ExteriorClosure exterior;
  /// Flat grid index of each unknown.
  std::vector<std::size_t> unknowns;
  /// Unknown index of each grid node, −1 for fixed nodes.
  std::vector<std::ptrdiff_t> unknown_of;
  std::vector<SparseRows> matrices;
  std::vector<Eigen::VectorXd> constants;

  std::size_t kernel_count() const { return matrices.size(); }
  std::size_t unknown_count() const { return unknowns.size(); }

  /// Unknown values of a field on the same grid.
  Eigen::VectorXd restrict(const ScalarField& u) const;
  /// Field with the given unknowns and g at every other node.
  ScalarField extend(const Eigen::VectorXd& U) const;
  /// (A_a U + c_a) for every kernel.
  std::vector<Eigen::VectorXd> apply(const Eigen::VectorXd& U) const;
};

struct ControlField {
  std::vector<int> index;
};

struct Solution {
  ScalarField field;
  double residual_sup = 0.0;
  int iterations = 0;
  ControlField policy;
  std::vector<double> residual_history;
  /// max of (−A_policy)⁻¹·1: the discrete maximum-principle constant C_h.
  double max_principle_constant = 0.0;
};

/// Throws MonotonicityError if a row has a negative off-diagonal weight.
Stencils discretize(const BellmanProblem& problem, const QuadratureScheme& scheme);

/// Least index minimizing (A_a U + c_a) at every unknown.
ControlField policy_improvement(const Stencils& stencils, const ScalarField& u);

/// Howard iteration from the policy of all zeros.
Solution solve_dirichlet(const BellmanProblem& problem, const QuadratureScheme& scheme, double tol,
                         int max_iter = 50);
/// Same, reusing assembled stencils.
Solution solve_dirichlet(const Stencils& stencils, double tol, int max_iter = 50);

struct RegularizedStep {
  double epsilon = 0.0;
  Solution solution;
  double sup_distance_to_limit = 0.0;
  /// ‖u^{ε_k} − u^{ε_{k+1}}‖_∞ (0 for the last step).
  double successive_distance = 0.0;
};

struct RegularizedSequence {
  std::vector<RegularizedStep> steps;
  /// Slope of log(successive distance) against log ε.
  double rate = 0.0;
};

/// Solves with every kernel replaced by regularize_kernel(K, ε, λ_family) for
/// each ε, which must decrease with the last at least 2h.
RegularizedSequence solve_regularized_sequence(const BellmanProblem& problem,
                                               const QuadratureScheme& scheme, double tol,
                                               const std::vector<double>& eps_list,
                                               int max_iter = 50);

/// min_a (L_a u(x) + b_a) at interior nodes by point evaluation, 0 elsewhere.
ScalarField residual(const BellmanProblem& problem, const ScalarField& u,
                     const QuadratureScheme& scheme);

/// sup over interior nodes of |residual|.
double residual_sup(const BellmanProblem& problem, const ScalarField& u,
                    const QuadratureScheme& scheme);

}  // namespace nlb
