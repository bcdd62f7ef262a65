#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "nlbellman/kernel.hpp"
#include "nlbellman/quadrature.hpp"

namespace nlb {

struct SymbolCurve {
  double sigma = 1.0;
  std::vector<Point> xi_samples;
  std::vector<double> s_values;
  /// Index into the direction list of each sample.
  std::vector<std::size_t> direction_index;
};

struct DirectionFit {
  Point direction{};
  double c_low = 0.0;
  double C_high = 0.0;
  double exponent_fit = 0.0;
  double fit_residual = 0.0;
};

struct ComparabilityFit {
  double c_low = 0.0;
  double C_high = 0.0;
  /// Least-squares slope of log s against log |ξ| over all samples.
  double exponent_fit = 0.0;
  /// RMS of the log residuals.
  double fit_residual = 0.0;
  std::vector<DirectionFit> per_direction;
  SymbolCurve curve;
};

/// s(ξ) = ∫ 2(1 − cos(y·ξ)) K(y) dy on the given layout and table. The core
/// uses the (y·ξ)² moment and the tail ∫ 2K.
double symbol(const KernelTable& table, const QuadratureLayout& layout, const Point& xi);

/// Throws RefinementError when the ring panels or the angular nodes do not
/// resolve cos(y·ξ).
double symbol(const Kernel& kernel, const Point& xi, const QuadratureScheme& scheme);

/// Scheme in units of 1/|ξ| used by comparability_fit: r₀ = 1/64, R_tail = 32,
/// panels no wider than 1/2, 64 angular nodes.
QuadratureScheme symbol_scheme();

/// |ξ| ∈ [0.25, 64], 16 log-spaced magnitudes.
std::vector<double> default_magnitudes();
/// {e₁} for n = 1; angles 0, π/4, π/2, 3π/4 for n = 2.
std::vector<Point> default_directions(int dimension);

/// Samples s(rθ) for every magnitude r and direction θ with the scheme
/// base.scaled(1/r), then fits the power law. Needs ≥ 8 magnitudes spanning
/// ≥ 2 decades; a non-positive sample is a DataError.
ComparabilityFit comparability_fit(const Kernel& kernel, const std::vector<double>& magnitudes,
                                   const std::vector<Point>& directions,
                                   const QuadratureScheme& base = symbol_scheme());

nlohmann::json to_json(const ComparabilityFit& fit);

}  // namespace nlb
