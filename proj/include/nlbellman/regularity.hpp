#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlbellman/field.hpp"
#include "nlbellman/nonlocal_eval.hpp"
#include "nlbellman/problem.hpp"
#include "nlbellman/quadrature.hpp"

namespace nlb {

/// Radius of the region over which w_A, P and N integrate.
inline constexpr double kMaskRadius = 0.5;

/// Power kernel (2−σ)/|y|^{n+σ} restricted to a set A ⊂ B_{1/2}, given as an
/// indicator over the quadrature atoms inside B_{1/2}: first the core
/// directions, then the ring atoms with r < 1/2.
struct MaskedKernel {
  double sigma = 1.5;
  std::vector<std::uint8_t> mask;

  /// Number of atoms of a layout inside B_{1/2}.
  static std::size_t atom_count(const QuadratureLayout& layout);
  static MaskedKernel full(double sigma, const QuadratureLayout& layout);
  static MaskedKernel random(double sigma, const QuadratureLayout& layout, std::mt19937_64& rng);
  MaskedKernel complement() const;
};

/// The bump b(x): 1 on B_{1/4}, 0 outside B_{1/2}.
double mask_bump(const Point& x);

/// Weighted increments t_j = weight_j·(δu(x, y_j) − δu(0, y_j)) over the
/// atoms of B_{1/2}, with an error bound for their sum.
struct Increments {
  double bump = 0.0;
  std::vector<double> terms;
  double error = 0.0;
};
Increments gather_increments(const ScalarField& u, const Point& x, double sigma,
                             const QuadratureLayout& layout);

/// b(x)·Σ_{j ∈ A} t_j. Terms are added in atom order so that, for a fixed x,
/// the value is monotone in the terms kept.
double masked_sum(const Increments& inc, const std::vector<std::uint8_t>& mask);

double compute_w_A(const ScalarField& u, const Point& x, const MaskedKernel& mask,
                   const QuadratureScheme& scheme);

struct PN {
  double P = 0.0;
  double N = 0.0;
  /// w of the full mask.
  double w_full = 0.0;
  /// Bound on the quadrature error of P − N.
  double error = 0.0;
  /// Sign mask {t_j > 0} realizing P.
  std::vector<std::uint8_t> sign_mask;
};
PN compute_P_N(const ScalarField& u, const Point& x, double sigma, const QuadratureScheme& scheme);
PN compute_P_N(const Increments& inc);

/// ∫ |δu(x, y)| (2−σ)/|y|^{n+σ} dy.
EvalResult absolute_mass(const ScalarField& u, const Point& x, double sigma,
                         const QuadratureScheme& scheme);

struct PNEntry {
  Point x{};
  double P = 0.0;
  double N = 0.0;
  /// Smallest C making both inequalities hold at x.
  double required_C = 0.0;
};

struct PNReport {
  double C_emp = 0.0;
  bool holds = true;
  double cap = 0.0;
  std::vector<PNEntry> entries;
  /// Points whose required C exceeds the cap.
  std::vector<Point> violations;
};

/// Smallest C with (λ/Λ)N − C|x| ≤ P ≤ (Λ/λ)N + C|x| at every point.
PNReport pn_comparability(const ScalarField& u, const std::vector<Point>& points,
                          EllipticityBounds bounds, double sigma, const QuadratureScheme& scheme,
                          double cap = 1e6);

struct HolderLevel {
  double radius = 0.0;
  double oscillation = 0.0;
  double error = 0.0;
  bool resolved = false;
};

struct HolderFit {
  bool resolved = false;
  double alpha = 0.0;
  double C = 0.0;
  /// RMS of the natural-log residuals.
  double residual = 0.0;
  std::vector<HolderLevel> levels;
  std::string note;
};

/// {2⁻², 2⁻³, 2⁻⁴, 2⁻⁵}.
std::vector<double> default_holder_radii();

/// Fits sup_{|x−c|=r} |v(x) − v(c)| ≈ C r^α with v the fractional Laplacian
/// of u, over the levels whose oscillation is at least 10× the quadrature
/// error. Fewer than two resolved levels give an unresolved result.
HolderFit holder_fit(const ScalarField& u, const Point& center, double sigma,
                     const std::vector<double>& radii, const QuadratureScheme& scheme);

struct MollifiedCheck {
  double delta = 0.0;
  double min_residual = 0.0;
  /// Allowance for the closure left unmollified outside the box.
  double modulus = 0.0;
  bool ok = true;
};

struct ConcavityReport {
  double min_average_residual = 0.0;
  bool average_ok = true;
  std::vector<MollifiedCheck> mollified;
};

/// Discrete mollification with weights η(|kh|/δ), normalized; δ < h gives
/// the identity. The closure is kept.
ScalarField mollify(const ScalarField& u, double delta);

/// Checks I_h((u+v)/2) ≥ −2 tol at interior nodes and I_h(η_δ ∗ u) ≥
/// −tol − modulus(δ) on B_{1−δ} for every δ.
ConcavityReport concavity_checks(const BellmanProblem& problem, const ScalarField& u,
                                 const ScalarField& v, const QuadratureScheme& scheme, double tol,
                                 const std::vector<double>& deltas);

struct PDecay {
  std::vector<double> radii;
  std::vector<double> sup_P;
  /// Slope of log sup P against log r over the nonzero entries.
  std::optional<double> exponent;
};
/// sup of P over grid nodes in B_{r_k}, r_k = 2^{−1−k}, k = 0..4.
PDecay p_decay(const std::vector<Point>& points, const std::vector<double>& P);

struct PointDiagnostics {
  Point x{};
  double A = 0.0;
  double P = 0.0;
  double N = 0.0;
  double v = 0.0;
};

struct RegularityReport {
  double sigma = 0.0;
  double sup_norm = 0.0;
  double max_A_over_sup = 0.0;
  std::vector<PointDiagnostics> points;
  HolderFit holder;
  PNReport pn;
  PDecay decay;
};

/// Grid nodes in the closed ball of the given radius, thinned in n = 2 to at
/// most about max_points.
std::vector<Point> sample_nodes(const Grid& grid, double radius, std::size_t max_points = 400);

RegularityReport diagnose(const BellmanProblem& problem, const ScalarField& u,
                          const QuadratureScheme& scheme);

struct SweepRow {
  double sigma = 0.0;
  bool ok = false;
  std::string error;
  int iterations = 0;
  double residual = 0.0;
  double max_A_over_sup = 0.0;
  double C_emp = 0.0;
  bool alpha_resolved = false;
  double alpha = 0.0;
  double holder_residual = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

/// Solves (with the solver quadrature) and diagnoses (with the diagnostics
/// quadrature) the template at every σ in [1.05, 1.995]. Failures are
/// recorded per row and the sweep continues.
SweepReport sigma_sweep(const nlohmann::json& problem_template, const std::vector<double>& sigmas,
                        const nlohmann::json& solver_quadrature,
                        const nlohmann::json& diagnostics_quadrature, double tol);

nlohmann::json to_json(const HolderFit& fit);
nlohmann::json to_json(const PNReport& report);
nlohmann::json to_json(const ConcavityReport& report);
nlohmann::json to_json(const RegularityReport& report);
nlohmann::json to_json(const SweepReport& report);

}  // namespace nlb
