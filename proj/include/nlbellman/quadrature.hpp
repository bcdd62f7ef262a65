#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "nlbellman/geometry.hpp"
#include "nlbellman/kernel.hpp"

namespace nlb {

/// How the singular integral ∫ f(y) K(y) dy is split and discretized:
/// an analytic core |y| < inner_radius, a ring of composite Gauss–Legendre
/// panels up to outer_radius, and a closed-form tail beyond.
struct QuadratureScheme {
  double inner_radius = 1.0 / 64.0;
  double outer_radius = 8.0;
  int radial_nodes_per_decade = 48;
  int panel_order = 4;
  /// Upper bound on the radial panel width; 0 disables the cap.
  double max_panel_width = 0.0;
  /// Nodes on the full circle (n = 2 only); must be even.
  int angular_nodes = 32;
  /// 0: nearest node, 1: multilinear, 3: cubic (evaluation only; the
  /// solver needs nonnegative weights).
  int interpolation_order = 1;
  /// Gauss–Legendre nodes for the core and tail moment integrals.
  int moment_nodes = 16;
  /// Radii forced to be panel edges when they fall inside the ring.
  std::vector<double> breakpoints{0.5};

  void validate() const;
  /// Also checks 0 < r₀ ≤ h ≤ R_tail.
  void validate_for_grid(double h) const;

  /// Defaults for a lattice of spacing h: r₀ = h, R_tail = 8, panels ≤ 2h.
  static QuadratureScheme for_grid(double h);
  /// All lengths multiplied by factor.
  QuadratureScheme scaled(double factor) const;

  nlohmann::json to_json() const;
  /// Missing fields fall back to for_grid(h).
  static QuadratureScheme from_json(const nlohmann::json& j, double h);
};

/// Gauss–Legendre nodes and weights on [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

/// One tap of a discrete second-difference stencil, in lattice units.
struct Tap {
  int di = 0;
  int dj = 0;
  double weight = 0.0;
};

/// Node layout of a scheme in a given dimension. Directions cover half of
/// the unit sphere; every atom stands for the pair ±y, so tables store
/// K(y) + K(−y).
class QuadratureLayout {
public:
  QuadratureLayout(const QuadratureScheme& scheme, int dimension);

  int dimension() const { return n_; }
  const QuadratureScheme& scheme() const { return scheme_; }

  std::size_t direction_count() const { return directions_.size(); }
  const Point& direction(std::size_t k) const { return directions_[k]; }
  double direction_weight(std::size_t k) const { return direction_weights_[k]; }
  /// Second-difference stencil of θᵀD²u θ (divide by h²). Mixed derivatives
  /// use the positive-type stencil matching the sign of θ₁θ₂.
  const std::vector<Tap>& direction_stencil(std::size_t k) const { return stencils_[k]; }

  std::size_t radial_count() const { return radii_.size(); }
  double radius(std::size_t i) const { return radii_[i]; }
  /// Includes the Jacobian r^{n−1}.
  double radial_weight(std::size_t i) const { return radial_weights_[i]; }
  /// Max panel width of the ring.
  double max_panel_width() const { return max_width_; }

  std::size_t atom_count() const { return directions_.size() * radii_.size(); }
  std::size_t atom_direction(std::size_t a) const { return a / radii_.size(); }
  std::size_t atom_radial(std::size_t a) const { return a % radii_.size(); }
  Point atom_offset(std::size_t a) const {
    return radii_[atom_radial(a)] * directions_[atom_direction(a)];
  }
  double atom_weight(std::size_t a) const {
    return direction_weights_[atom_direction(a)] * radial_weights_[atom_radial(a)];
  }

private:
  QuadratureScheme scheme_;
  int n_;
  std::vector<Point> directions_;
  std::vector<double> direction_weights_;
  std::vector<std::vector<Tap>> stencils_;
  std::vector<double> radii_;
  std::vector<double> radial_weights_;
  double max_width_ = 0.0;
};

/// Kernel-dependent weights of a layout.
struct KernelTable {
  double sigma = 1.0;
  /// K(y_a) + K(−y_a) per atom.
  std::vector<double> ring;
  /// ∫₀^{r₀} r^{n+1} (K(rθ) + K(−rθ)) dr per direction.
  std::vector<double> core;
  /// ∫₀^{r₀} r^{n+3} (K(rθ) + K(−rθ)) dr per direction.
  std::vector<double> core4;
  /// ∫_{|y| > R_tail} K(y) dy.
  double tail = 0.0;
};

KernelTable tabulate(const Kernel& kernel, const QuadratureLayout& layout);
/// Table of coefficient·/|y|^{n+σ}, built along the same floating-point path
/// as tabulate() so that kernels bounded by the coefficient tabulate below it.
KernelTable tabulate_power(double coefficient, double sigma, const QuadratureLayout& layout);

}  // namespace nlb
