#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlbellman/geometry.hpp"

namespace nlb {

/// Smoothness class of a kernel: L0 (ellipticity only), L1 (plus gradient
/// decay), L2 (plus Hessian decay). L2 ⊂ L1 ⊂ L0.
enum class SmoothnessClass { L0 = 0, L1 = 1, L2 = 2 };

std::string to_string(SmoothnessClass c);
SmoothnessClass smoothness_from_string(const std::string& s);

struct EllipticityBounds {
  double lambda = 1.0;
  double Lambda = 1.0;

  void validate() const;
};

/// Smallest σ guard: orders must lie in (0, kMaxSigma).
inline constexpr double kMaxSigma = 2.0 - 1e-6;

/// (coefficient) / r^{n+σ}. Every density in the library is evaluated through
/// this one expression so that comparisons between kernels sharing r are
/// monotone in floating point.
inline double power_law(double coefficient, double r, int n, double sigma) {
  return coefficient * std::pow(r, -(static_cast<double>(n) + sigma));
}

/// The normalized profile r^{n+σ} K(rθ) of a kernel. Implementations are
/// immutable and safe to evaluate concurrently.
class DensityModel {
public:
  virtual ~DensityModel() = default;
  /// r^{n+σ} K(rθ) for a unit direction θ.
  virtual double coefficient(double r, const Point& direction) const = 0;
  /// JSON descriptor, or null when the model is not serializable.
  virtual nlohmann::json descriptor() const = 0;
};

/// Angular profile on the unit circle built from even harmonics only:
/// c0 + Σ_k cos_k cos(2kθ) + sin_k sin(2kθ). Even under θ → θ + π.
struct AngularProfile {
  double c0 = 1.0;
  std::vector<double> cos_terms;
  std::vector<double> sin_terms;

  double operator()(const Point& direction) const;
  /// Profile 1 + amplitude·cos²θ.
  static AngularProfile cos_squared(double base, double amplitude);
};

/// Radial modulation m(r) of an isotropic kernel.
struct RadialModulation {
  enum class Shape { Blend, LogSine };
  Shape shape = Shape::Blend;
  // Blend: inner for r ≤ radius/2, outer for r ≥ radius, C² in between.
  double inner = 1.0, outer = 1.0, radius = 1.0;
  // LogSine: mid + amplitude·sin(frequency·ln r + phase).
  double mid = 1.0, amplitude = 0.0, frequency = 1.0, phase = 0.0;

  double operator()(double r) const;
  double min_value() const;
  double max_value() const;
};

/// A translation-invariant kernel K(y) of order σ with ellipticity metadata.
/// Immutable; copies share the density model.
class Kernel {
public:
  Kernel(double sigma, int dimension, EllipticityBounds bounds, SmoothnessClass smoothness,
         std::shared_ptr<const DensityModel> model, std::optional<double> gradient_constant = {},
         std::optional<double> hessian_constant = {});

  double sigma() const { return sigma_; }
  int dimension() const { return dimension_; }
  const EllipticityBounds& bounds() const { return bounds_; }
  SmoothnessClass smoothness() const { return smoothness_; }
  std::optional<double> gradient_constant() const { return gradient_constant_; }
  std::optional<double> hessian_constant() const { return hessian_constant_; }

  double coefficient(double r, const Point& direction) const {
    return model_->coefficient(r, direction);
  }
  double density_polar(double r, const Point& direction) const {
    return power_law(model_->coefficient(r, direction), r, dimension_, sigma_);
  }
  double density(const Point& y) const;

  const DensityModel& model() const { return *model_; }
  std::shared_ptr<const DensityModel> model_ptr() const { return model_; }

  /// Serializable descriptor; throws ValidationError for custom densities.
  nlohmann::json descriptor() const;

private:
  double sigma_;
  int dimension_;
  EllipticityBounds bounds_;
  SmoothnessClass smoothness_;
  std::shared_ptr<const DensityModel> model_;
  std::optional<double> gradient_constant_;
  std::optional<double> hessian_constant_;
};

/// (2−σ)/|y|^{n+σ}, λ = Λ = 1, class L2.
Kernel make_power_kernel(double sigma, int dimension);

/// (2−σ)·profile(y/|y|)/|y|^{n+σ}. Profile values must lie in [λ, Λ].
Kernel make_anisotropic_kernel(double sigma, int dimension, const AngularProfile& profile,
                               EllipticityBounds bounds);

/// (2−σ)·m(|y|)/|y|^{n+σ}. Modulation values must lie in [λ, Λ].
Kernel make_radial_kernel(double sigma, int dimension, const RadialModulation& modulation,
                          EllipticityBounds bounds);

/// Kernel from an arbitrary density y ↦ K(y). Not serializable. The stated
/// bounds and class are metadata; use classify_kernel to test them.
Kernel make_custom_kernel(double sigma, int dimension, EllipticityBounds bounds,
                          SmoothnessClass smoothness, std::function<double(const Point&)> density);

/// K^ε(y) = η(|y|/ε)·λ(2−σ)/|y|^{n+σ} + (1 − η(|y|/ε))·K(y).
Kernel regularize_kernel(const Kernel& kernel, double epsilon, double lambda);

/// y ↦ (K(y) + K(−y))/2.
Kernel symmetrize(const Kernel& kernel);

/// Builds a kernel from its JSON descriptor. A missing "sigma" or
/// "dimension" is taken from the overrides.
Kernel kernel_from_json(const nlohmann::json& descriptor, std::optional<double> sigma = {},
                        std::optional<int> dimension = {});

struct ClassViolation {
  std::string bound;  // "evenness", "lower", "upper", "gradient", "hessian"
  Point y{};
  double value = 0.0;
  double limit = 0.0;
};

struct ClassReport {
  bool is_L0 = false;
  bool is_L1 = false;
  bool is_L2 = false;
  bool even = true;
  double lambda_emp = 0.0;
  double Lambda_emp = 0.0;
  double C1_emp = 0.0;
  double C2_emp = 0.0;
  /// sup of the normalized derivative near 0 or ∞ over its sup at unit scale.
  double gradient_growth = 0.0;
  double hessian_growth = 0.0;
  std::vector<ClassViolation> worst_points;
};

/// Samples log-uniform radii in [1e-3, 1e3] and uniform directions and tests
/// evenness, the ellipticity bounds, and the gradient/Hessian decay rates.
ClassReport classify_kernel(const Kernel& kernel, int sample_count);

nlohmann::json to_json(const ClassReport& report);

}  // namespace nlb
