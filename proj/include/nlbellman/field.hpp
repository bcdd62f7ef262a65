#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlbellman/geometry.hpp"

namespace nlb {

/// One analytic term amplitude·base(scale·z) of an exterior closure.
struct ClosureTerm {
  enum class Shape {
    Cosine,         // cos(ξ·w)
    QuadraticBump,  // |w|²·η(|w|/radius)
    Bump,           // η(|w|/radius)
    Hat,            // max(0, 1 − |w|)
  };
  Shape shape = Shape::Cosine;
  double amplitude = 1.0;
  double scale = 1.0;
  Point xi{1.0, 0.0};
  double radius = 1.0;

  double operator()(const Point& z) const;
  /// sup |base|.
  double base_bound() const;
  /// Radius beyond which the term vanishes (infinity for Cosine).
  double support_radius() const;
};

/// Bounded analytic function offset + Σ terms, used for the values of a
/// field outside its grid box (and as Dirichlet data by the solver).
class ExteriorClosure {
public:
  ExteriorClosure() = default;
  explicit ExteriorClosure(double offset, std::vector<ClosureTerm> terms = {});

  static ExteriorClosure constant(double c) { return ExteriorClosure(c); }
  static ExteriorClosure cosine(double amplitude, Point xi, double offset = 0.0);
  static ExteriorClosure quadratic_bump(double amplitude, double radius, double offset = 0.0);
  static ExteriorClosure bump(double amplitude, double radius, double offset = 0.0);
  static ExteriorClosure hat(double amplitude, double scale, double offset = 0.0);

  double operator()(const Point& z) const;

  double offset() const { return offset_; }
  const std::vector<ClosureTerm>& terms() const { return terms_; }

  /// |offset| + Σ |amplitude|·sup|base|; bounds sup |g|.
  double bound() const;
  /// Bound on |g(z) − offset| for |z| ≥ radius.
  double far_oscillation(double radius) const;
  /// Estimate of sup |g(z) − g(z')| over |z − z'| ≤ delta, |z| in [from, to].
  double modulus(double delta, double from, double to, int dimension) const;

  /// z ↦ g(scale·z).
  ExteriorClosure rescaled(double scale) const;
  /// a·this + b·other.
  ExteriorClosure combined(double a, const ExteriorClosure& other, double b) const;
  ExteriorClosure shifted(double c) const { return ExteriorClosure(offset_ + c, terms_); }

  nlohmann::json to_json() const;
  static ExteriorClosure from_json(const nlohmann::json& j);

private:
  double offset_ = 0.0;
  std::vector<ClosureTerm> terms_;
};

/// Uniform lattice with spacing h on the box [−R, R]^n.
class Grid {
public:
  Grid(int dimension, double h, double box_radius);

  int dimension() const { return n_; }
  double h() const { return h_; }
  double box_radius() const { return R_; }
  int nodes_per_axis() const { return m_; }
  std::size_t size() const;

  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * m_;
  }
  /// Axis indices of a flat node index.
  std::array<int, 2> indices(std::size_t flat) const;
  Point coordinate(std::size_t flat) const;
  double axis_coordinate(int i) const { return -R_ + i * h_; }

  bool in_box(const Point& z) const;

  /// Flat index of the node at z when z lies on the lattice (to 1e-9 h).
  std::optional<std::size_t> node_at(const Point& z) const;

  /// Calls visit(node, weight) for the interpolation stencil of z, which must
  /// lie in the box. order 0: nearest node; order 1: multilinear; order 3:
  /// tensor cubic Lagrange (weights may be negative).
  template <class Visit>
  void interpolation_weights(const Point& z, int order, Visit&& visit) const;

  bool operator==(const Grid& o) const { return n_ == o.n_ && h_ == o.h_ && R_ == o.R_; }

private:
  int n_;
  double h_;
  double R_;
  int m_;
};

/// A bounded function on R^n: lattice values inside [−R, R]^n and an analytic
/// closure outside. Immutable.
class ScalarField {
public:
  ScalarField(Grid grid, std::vector<double> values, ExteriorClosure exterior);

  /// Samples f at every node; closure used outside the box.
  static ScalarField sampled(const Grid& grid, const std::function<double(const Point&)>& f,
                             ExteriorClosure exterior);
  /// Samples the closure itself at every node.
  static ScalarField from_closure(const Grid& grid, ExteriorClosure exterior);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  const ExteriorClosure& exterior() const { return exterior_; }
  int dimension() const { return grid_.dimension(); }

  /// max(max |nodes|, exterior bound).
  double sup_norm() const { return sup_norm_; }

  /// Field equal to the closure on |z| ≥ radius (nodes there must already
  /// hold closure values). Solutions of exterior Dirichlet problems use this.
  ScalarField with_exterior_region(double radius) const;
  /// Radius beyond which samples come from the closure, if any.
  std::optional<double> exterior_radius() const { return exterior_radius_; }

  /// Value at z: interpolation in the box, closure outside the box and in the
  /// exterior region.
  double sample(const Point& z, int order = 1) const;
  /// True when sample(z) reads the closure.
  bool uses_closure(const Point& z) const {
    return !grid_.in_box(z) || (exterior_radius_ && norm(z) >= *exterior_radius_);
  }

  /// Estimated interpolation error at z (0 at nodes and where the closure is used).
  double interpolation_error(const Point& z, int order = 1) const;

  /// Max over axes of |second difference| at a node (closure beyond the box).
  double curvature(std::size_t node) const { return curvature_[node]; }
  /// Max over axes of |fourth difference| at a node (closure beyond the box).
  double fourth_difference(std::size_t node) const { return fourth_[node]; }

  /// Estimated max |fourth derivative| near x from axis fourth differences.
  double local_fourth_derivative(const Point& x) const;

  /// a·this + b·other on the same grid; closures combine the same way. The
  /// exterior region is kept when both fields share it.
  ScalarField combined(double a, const ScalarField& other, double b) const;
  ScalarField shifted(double c) const;

private:
  Grid grid_;
  std::vector<double> values_;
  ExteriorClosure exterior_;
  double sup_norm_;
  std::vector<double> curvature_;
  std::vector<double> fourth_;
  std::optional<double> exterior_radius_;
};

// ---------------------------------------------------------------------------

template <class Visit>
void Grid::interpolation_weights(const Point& z, int order, Visit&& visit) const {
  std::array<int, 2> base{0, 0};
  std::array<double, 2> frac{0.0, 0.0};
  for (int a = 0; a < n_; ++a) {
    double t = (z[a] + R_) / h_;
    // Snap lattice points so that nodes interpolate with a single unit weight.
    if (const double r = std::round(t); std::abs(t - r) < 1e-10) t = r;
    int i = static_cast<int>(std::floor(t));
    if (i > m_ - 2) i = m_ - 2;
    if (i < 0) i = 0;
    base[a] = i;
    frac[a] = t - i;
  }
  if (order == 0) {
    int i = base[0] + (frac[0] >= 0.5 ? 1 : 0);
    int j = n_ == 2 ? base[1] + (frac[1] >= 0.5 ? 1 : 0) : 0;
    visit(index(i, j), 1.0);
    return;
  }
  if (order == 3) {
    std::array<std::array<double, 4>, 2> w{};
    std::array<int, 2> first{0, 0};
    for (int a = 0; a < n_; ++a) {
      // Nodes i−1..i+2 around the cell, shifted inward at the box edges.
      const int f = std::clamp(base[a] - 1, 0, m_ - 4);
      const double t = frac[a] + (base[a] - 1 - f) + 1.0;  // position relative to node f
      first[a] = f;
      w[a][0] = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
      w[a][1] = t * (t - 2.0) * (t - 3.0) / 2.0;
      w[a][2] = -t * (t - 1.0) * (t - 3.0) / 2.0;
      w[a][3] = t * (t - 1.0) * (t - 2.0) / 6.0;
    }
    if (n_ == 1) {
      for (int k = 0; k < 4; ++k)
        if (w[0][k] != 0.0) visit(index(first[0] + k), w[0][k]);
      return;
    }
    for (int l = 0; l < 4; ++l) {
      if (w[1][l] == 0.0) continue;
      for (int k = 0; k < 4; ++k)
        if (w[0][k] != 0.0) visit(index(first[0] + k, first[1] + l), w[0][k] * w[1][l]);
    }
    return;
  }
  if (n_ == 1) {
    if (frac[0] != 1.0) visit(index(base[0]), 1.0 - frac[0]);
    if (frac[0] != 0.0) visit(index(base[0] + 1), frac[0]);
    return;
  }
  for (int dj = 0; dj < 2; ++dj) {
    const double wj = dj ? frac[1] : 1.0 - frac[1];
    if (wj == 0.0) continue;
    for (int di = 0; di < 2; ++di) {
      const double wi = di ? frac[0] : 1.0 - frac[0];
      if (wi == 0.0) continue;
      visit(index(base[0] + di, base[1] + dj), wi * wj);
    }
  }
}

}  // namespace nlb
