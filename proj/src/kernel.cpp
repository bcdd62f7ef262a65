#include "nlbellman/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlbellman/errors.hpp"

namespace nlb {

namespace {

using nlohmann::json;

void check_order(double sigma, int dimension) {
  if (!(sigma > 0.0 && sigma < kMaxSigma))
    throw ValidationError("sigma", "order must lie in (0, 2 - 1e-6), got " + std::to_string(sigma));
  if (dimension != 1 && dimension != 2)
    throw ValidationError("dimension", "must be 1 or 2, got " + std::to_string(dimension));
}

double angle_of(const Point& d) { return std::atan2(d[1], d[0]); }

class PowerModel final : public DensityModel {
public:
  PowerModel(double sigma, int n) : sigma_(sigma), n_(n) {}
  double coefficient(double, const Point&) const override { return 2.0 - sigma_; }
  json descriptor() const override {
    return {{"type", "power"}, {"sigma", sigma_}, {"dimension", n_}};
  }

private:
  double sigma_;
  int n_;
};

class AnisotropicModel final : public DensityModel {
public:
  AnisotropicModel(double sigma, int n, AngularProfile profile, EllipticityBounds b)
      : sigma_(sigma), n_(n), profile_(std::move(profile)), bounds_(b) {}
  double coefficient(double, const Point& direction) const override {
    // Clamping is a no-op for validated profiles; it pins the bound in floating point.
    const double p = std::clamp(profile_(direction), bounds_.lambda, bounds_.Lambda);
    return (2.0 - sigma_) * p;
  }
  json descriptor() const override {
    return {{"type", "anisotropic"},
            {"sigma", sigma_},
            {"dimension", n_},
            {"lambda", bounds_.lambda},
            {"Lambda", bounds_.Lambda},
            {"profile",
             {{"c0", profile_.c0}, {"cos", profile_.cos_terms}, {"sin", profile_.sin_terms}}}};
  }

private:
  double sigma_;
  int n_;
  AngularProfile profile_;
  EllipticityBounds bounds_;
};

class RadialModel final : public DensityModel {
public:
  RadialModel(double sigma, int n, RadialModulation m, EllipticityBounds b)
      : sigma_(sigma), n_(n), modulation_(m), bounds_(b) {}
  double coefficient(double r, const Point&) const override {
    const double m = std::clamp(modulation_(r), bounds_.lambda, bounds_.Lambda);
    return (2.0 - sigma_) * m;
  }
  json descriptor() const override {
    json mod;
    if (modulation_.shape == RadialModulation::Shape::Blend) {
      mod = {{"shape", "blend"},
             {"inner", modulation_.inner},
             {"outer", modulation_.outer},
             {"radius", modulation_.radius}};
    } else {
      mod = {{"shape", "log_sine"},
             {"mid", modulation_.mid},
             {"amplitude", modulation_.amplitude},
             {"frequency", modulation_.frequency},
             {"phase", modulation_.phase}};
    }
    return {{"type", "radial"},     {"sigma", sigma_},           {"dimension", n_},
            {"lambda", bounds_.lambda}, {"Lambda", bounds_.Lambda}, {"modulation", mod}};
  }

private:
  double sigma_;
  int n_;
  RadialModulation modulation_;
  EllipticityBounds bounds_;
};

class CustomModel final : public DensityModel {
public:
  CustomModel(double sigma, int n, std::function<double(const Point&)> f)
      : sigma_(sigma), n_(n), density_(std::move(f)) {}
  double coefficient(double r, const Point& direction) const override {
    return density_(r * direction) * std::pow(r, static_cast<double>(n_) + sigma_);
  }
  json descriptor() const override { return nullptr; }

private:
  double sigma_;
  int n_;
  std::function<double(const Point&)> density_;
};

class RegularizedModel final : public DensityModel {
public:
  RegularizedModel(Kernel base, double epsilon, double lambda)
      : base_(std::move(base)), epsilon_(epsilon), lambda_(lambda) {}
  double coefficient(double r, const Point& direction) const override {
    const double eta = cutoff(r / epsilon_);
    const double outer = base_.coefficient(r, direction);
    if (eta == 0.0) return outer;
    const double inner = lambda_ * (2.0 - base_.sigma());
    // Keep the blend between its endpoints in floating point.
    return std::clamp(eta * inner + (1.0 - eta) * outer, std::min(inner, outer),
                      std::max(inner, outer));
  }
  json descriptor() const override {
    json base = base_.model().descriptor();
    if (base.is_null()) return nullptr;
    return {{"type", "regularized"}, {"sigma", base_.sigma()}, {"dimension", base_.dimension()},
            {"epsilon", epsilon_},   {"lambda_reg", lambda_}, {"base", base}};
  }

private:
  Kernel base_;
  double epsilon_;
  double lambda_;
};

class SymmetrizedModel final : public DensityModel {
public:
  explicit SymmetrizedModel(Kernel base) : base_(std::move(base)) {}
  double coefficient(double r, const Point& direction) const override {
    return 0.5 * (base_.coefficient(r, direction) + base_.coefficient(r, -direction));
  }
  json descriptor() const override {
    json base = base_.model().descriptor();
    if (base.is_null()) return nullptr;
    return {{"type", "symmetrized"}, {"sigma", base_.sigma()}, {"dimension", base_.dimension()},
            {"base", base}};
  }

private:
  Kernel base_;
};

AngularProfile profile_from_json(const json& j) {
  AngularProfile p;
  p.c0 = j.value("c0", 1.0);
  p.cos_terms = j.value("cos", std::vector<double>{});
  p.sin_terms = j.value("sin", std::vector<double>{});
  return p;
}

RadialModulation modulation_from_json(const json& j) {
  RadialModulation m;
  const std::string shape = j.at("shape").get<std::string>();
  if (shape == "blend") {
    m.shape = RadialModulation::Shape::Blend;
    m.inner = j.at("inner").get<double>();
    m.outer = j.at("outer").get<double>();
    m.radius = j.at("radius").get<double>();
  } else if (shape == "log_sine") {
    m.shape = RadialModulation::Shape::LogSine;
    m.mid = j.at("mid").get<double>();
    m.amplitude = j.at("amplitude").get<double>();
    m.frequency = j.at("frequency").get<double>();
    m.phase = j.value("phase", 0.0);
  } else {
    throw ValidationError("modulation.shape", "unknown shape '" + shape + "'");
  }
  return m;
}

EllipticityBounds bounds_from_json(const json& j) {
  if (!j.contains("lambda") || !j.contains("Lambda"))
    throw ValidationError("kernel", "descriptor needs 'lambda' and 'Lambda'");
  return {j.at("lambda").get<double>(), j.at("Lambda").get<double>()};
}

}  // namespace

std::string to_string(SmoothnessClass c) {
  switch (c) {
    case SmoothnessClass::L0: return "L0";
    case SmoothnessClass::L1: return "L1";
    case SmoothnessClass::L2: return "L2";
  }
  return "L0";
}

SmoothnessClass smoothness_from_string(const std::string& s) {
  if (s == "L0") return SmoothnessClass::L0;
  if (s == "L1") return SmoothnessClass::L1;
  if (s == "L2") return SmoothnessClass::L2;
  throw ValidationError("smoothness_class", "unknown class '" + s + "'");
}

void EllipticityBounds::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ValidationError("lambda", "must be positive and finite");
  if (!(Lambda >= lambda) || !std::isfinite(Lambda))
    throw ValidationError("Lambda", "must be finite and at least lambda");
}

double AngularProfile::operator()(const Point& direction) const {
  // Fold onto the upper half-plane so that θ and −θ see identical rounding.
  const bool flip = direction[1] < 0.0 || (direction[1] == 0.0 && direction[0] < 0.0);
  const double theta = angle_of(flip ? -1.0 * direction : direction);
  double v = c0;
  for (std::size_t k = 0; k < cos_terms.size(); ++k)
    v += cos_terms[k] * std::cos(2.0 * static_cast<double>(k + 1) * theta);
  for (std::size_t k = 0; k < sin_terms.size(); ++k)
    v += sin_terms[k] * std::sin(2.0 * static_cast<double>(k + 1) * theta);
  return v;
}

AngularProfile AngularProfile::cos_squared(double base, double amplitude) {
  // cos²θ = (1 + cos 2θ)/2
  return AngularProfile{base + 0.5 * amplitude, {0.5 * amplitude}, {}};
}

double RadialModulation::operator()(double r) const {
  if (shape == Shape::Blend) return inner + (outer - inner) * (1.0 - cutoff(r / radius));
  if (!(r > 0.0)) return mid;
  return mid + amplitude * std::sin(frequency * std::log(r) + phase);
}

double RadialModulation::min_value() const {
  if (shape == Shape::Blend) return std::min(inner, outer);
  return mid - std::abs(amplitude);
}

double RadialModulation::max_value() const {
  if (shape == Shape::Blend) return std::max(inner, outer);
  return mid + std::abs(amplitude);
}

Kernel::Kernel(double sigma, int dimension, EllipticityBounds bounds, SmoothnessClass smoothness,
               std::shared_ptr<const DensityModel> model, std::optional<double> gradient_constant,
               std::optional<double> hessian_constant)
    : sigma_(sigma),
      dimension_(dimension),
      bounds_(bounds),
      smoothness_(smoothness),
      model_(std::move(model)),
      gradient_constant_(gradient_constant),
      hessian_constant_(hessian_constant) {
  check_order(sigma, dimension);
  bounds.validate();
  if (!model_) throw ValidationError("kernel", "density model is null");
}

double Kernel::density(const Point& y) const {
  const double r = norm(y);
  return density_polar(r, (1.0 / r) * y);
}

nlohmann::json Kernel::descriptor() const {
  json d = model_->descriptor();
  if (d.is_null()) throw ValidationError("kernel", "custom densities have no JSON descriptor");
  return d;
}

Kernel make_power_kernel(double sigma, int dimension) {
  check_order(sigma, dimension);
  // |∇K| = (2−σ)p r^{-p-1}; Frobenius norm of D²K = (2−σ)p sqrt((p+1)² + n − 1) r^{-p-2}.
  const double p = dimension + sigma;
  const double c1 = (2.0 - sigma) * p;
  const double c2 = (2.0 - sigma) * p * std::sqrt((p + 1.0) * (p + 1.0) + (dimension - 1));
  return Kernel(sigma, dimension, {1.0, 1.0}, SmoothnessClass::L2,
                std::make_shared<PowerModel>(sigma, dimension), c1, c2);
}

Kernel make_anisotropic_kernel(double sigma, int dimension, const AngularProfile& profile,
                               EllipticityBounds bounds) {
  check_order(sigma, dimension);
  bounds.validate();
  constexpr int kChecks = 4096;
  for (int i = 0; i < kChecks; ++i) {
    const double theta = 2.0 * M_PI * i / kChecks;
    const double v = profile(Point{std::cos(theta), std::sin(theta)});
    if (!(v >= bounds.lambda * (1 - 1e-12) && v <= bounds.Lambda * (1 + 1e-12)))
      throw ValidationError("profile", "value " + std::to_string(v) + " at angle " +
                                           std::to_string(theta) + " outside [lambda, Lambda]");
  }
  return Kernel(sigma, dimension, bounds, SmoothnessClass::L2,
                std::make_shared<AnisotropicModel>(sigma, dimension, profile, bounds));
}

Kernel make_radial_kernel(double sigma, int dimension, const RadialModulation& modulation,
                          EllipticityBounds bounds) {
  check_order(sigma, dimension);
  bounds.validate();
  if (modulation.shape == RadialModulation::Shape::Blend && !(modulation.radius > 0.0))
    throw ValidationError("modulation.radius", "must be positive");
  if (!(modulation.min_value() >= bounds.lambda * (1 - 1e-12) &&
        modulation.max_value() <= bounds.Lambda * (1 + 1e-12)))
    throw ValidationError("modulation", "range outside [lambda, Lambda]");
  return Kernel(sigma, dimension, bounds, SmoothnessClass::L2,
                std::make_shared<RadialModel>(sigma, dimension, modulation, bounds));
}

Kernel make_custom_kernel(double sigma, int dimension, EllipticityBounds bounds,
                          SmoothnessClass smoothness, std::function<double(const Point&)> density) {
  check_order(sigma, dimension);
  if (!density) throw ValidationError("density", "empty function");
  return Kernel(sigma, dimension, bounds, smoothness,
                std::make_shared<CustomModel>(sigma, dimension, std::move(density)));
}

Kernel regularize_kernel(const Kernel& kernel, double epsilon, double lambda) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ValidationError("epsilon", "must lie in (0, 1)");
  if (!(lambda > 0.0)) throw ValidationError("lambda", "must be positive");
  const EllipticityBounds b{std::min(lambda, kernel.bounds().lambda),
                            std::max(lambda, kernel.bounds().Lambda)};
  return Kernel(kernel.sigma(), kernel.dimension(), b, kernel.smoothness(),
                std::make_shared<RegularizedModel>(kernel, epsilon, lambda));
}

Kernel symmetrize(const Kernel& kernel) {
  return Kernel(kernel.sigma(), kernel.dimension(), kernel.bounds(), kernel.smoothness(),
                std::make_shared<SymmetrizedModel>(kernel), kernel.gradient_constant(),
                kernel.hessian_constant());
}

Kernel kernel_from_json(const nlohmann::json& j, std::optional<double> sigma_override,
                        std::optional<int> dimension_override) {
  if (!j.is_object()) throw ValidationError("kernel", "descriptor must be an object");
  const std::string type = j.value("type", "");
  const double sigma = j.contains("sigma") ? j.at("sigma").get<double>()
                       : sigma_override    ? *sigma_override
                                           : throw ValidationError("kernel.sigma", "missing");
  const int n = j.contains("dimension") ? j.at("dimension").get<int>()
                : dimension_override    ? *dimension_override
                                        : 1;
  if (type == "power") {
    return make_power_kernel(sigma, n);
  }
  if (type == "anisotropic") {
    return make_anisotropic_kernel(sigma, n, profile_from_json(j.value("profile", json::object())),
                                   bounds_from_json(j));
  }
  if (type == "radial") {
    return make_radial_kernel(sigma, n, modulation_from_json(j.at("modulation")),
                              bounds_from_json(j));
  }
  if (type == "regularized") {
    const Kernel base = kernel_from_json(j.at("base"), sigma, n);
    return regularize_kernel(base, j.at("epsilon").get<double>(),
                             j.value("lambda_reg", base.bounds().lambda));
  }
  if (type == "symmetrized") {
    return symmetrize(kernel_from_json(j.at("base"), sigma, n));
  }
  throw ValidationError("kernel.type", "unknown kernel type '" + type + "'");
}

ClassReport classify_kernel(const Kernel& kernel, int sample_count) {
  if (sample_count < 100) throw ValidationError("sample_count", "must be at least 100");
  const int n = kernel.dimension();
  const double sigma = kernel.sigma();
  const double p = n + sigma;
  const auto& b = kernel.bounds();
  constexpr double kGolden = 0.6180339887498949;

  ClassReport rep;
  rep.lambda_emp = std::numeric_limits<double>::infinity();
  rep.Lambda_emp = 0.0;

  std::vector<ClassViolation> worst;
  auto record = [&](const std::string& bound, const Point& y, double value, double limit,
                    double severity) {
    for (auto& w : worst) {
      if (w.bound != bound) continue;
      if (severity > std::abs(w.value - w.limit) / std::max(std::abs(w.limit), 1e-300))
        w = {bound, y, value, limit};
      return;
    }
    worst.push_back({bound, y, value, limit});
  };

  auto eval = [&](const Point& y) {
    const double k = kernel.density(y);
    if (!std::isfinite(k) || k < 0.0)
      throw KernelEvaluationError("density evaluation failed (value " + std::to_string(k) + ")",
                                  y);
    return k;
  };

  double g_inner = 0, g_mid = 0, g_outer = 0, h_inner = 0, h_mid = 0, h_outer = 0;
  bool lower_ok = true, upper_ok = true;

  for (int i = 0; i < sample_count; ++i) {
    const double r = std::pow(10.0, -3.0 + 6.0 * (i + 0.5) / sample_count);
    Point dir{1.0, 0.0};
    if (n == 2) {
      const double frac = std::fmod(i * kGolden, 1.0);
      dir = {std::cos(2.0 * M_PI * frac), std::sin(2.0 * M_PI * frac)};
    }
    const Point y = r * dir;
    const double k = eval(y);
    const double k_mirror = eval(-y);
    const double asym = std::abs(k - k_mirror) / std::max(std::max(k, k_mirror), 1e-300);
    if (asym > 1e-10) {
      rep.even = false;
      record("evenness", y, k_mirror, k, asym);
    }

    const double ratio = k * std::pow(r, p) / (2.0 - sigma);
    rep.lambda_emp = std::min(rep.lambda_emp, ratio);
    rep.Lambda_emp = std::max(rep.Lambda_emp, ratio);
    if (ratio < b.lambda * (1.0 - 1e-12)) {
      lower_ok = false;
      record("lower", y, ratio, b.lambda, (b.lambda - ratio) / b.lambda);
    }
    if (ratio > b.Lambda * (1.0 + 1e-12)) {
      upper_ok = false;
      record("upper", y, ratio, b.Lambda, (ratio - b.Lambda) / b.Lambda);
    }

    const double d = r * 1e-4;
    double grad2 = 0.0, hess2 = 0.0;
    for (int a = 0; a < n; ++a) {
      Point e{0.0, 0.0};
      e[a] = d;
      const double kp = eval(y + e), km = eval(y - e);
      grad2 += std::pow((kp - km) / (2.0 * d), 2);
      hess2 += std::pow((kp - 2.0 * k + km) / (d * d), 2);
    }
    if (n == 2) {
      const double kpp = eval(y + Point{d, d}), kpm = eval(y + Point{d, -d});
      const double kmp = eval(y + Point{-d, d}), kmm = eval(y + Point{-d, -d});
      hess2 += 2.0 * std::pow((kpp - kpm - kmp + kmm) / (4.0 * d * d), 2);
    }
    const double g = std::sqrt(grad2) * std::pow(r, p + 1.0);
    const double h = std::sqrt(hess2) * std::pow(r, p + 2.0);
    rep.C1_emp = std::max(rep.C1_emp, g);
    rep.C2_emp = std::max(rep.C2_emp, h);
    if (r < 1e-2) {
      g_inner = std::max(g_inner, g);
      h_inner = std::max(h_inner, h);
    } else if (r > 1e2) {
      g_outer = std::max(g_outer, g);
      h_outer = std::max(h_outer, h);
    } else if (r >= 1e-1 && r <= 1e1) {
      g_mid = std::max(g_mid, g);
      h_mid = std::max(h_mid, h);
    }
  }

  // A normalized derivative that stays O(1) at unit scale but grows by more
  // than this factor towards 0 or ∞ is not bounded by C/|y|^{n+k+σ}.
  constexpr double kGrowthLimit = 10.0;
  const double floor_g = 1e-12 * (2.0 - sigma) * b.Lambda;
  rep.gradient_growth = std::max(g_inner, g_outer) / std::max(g_mid, floor_g);
  rep.hessian_growth = std::max(h_inner, h_outer) / std::max(h_mid, floor_g);

  bool grad_ok = rep.gradient_growth <= kGrowthLimit;
  bool hess_ok = rep.hessian_growth <= kGrowthLimit;
  // Finite differences carry O(1e-8) relative error; the slack covers it.
  if (auto c = kernel.gradient_constant(); c && rep.C1_emp > *c * (1.0 + 1e-4)) {
    grad_ok = false;
    record("gradient", Point{}, rep.C1_emp, *c, rep.C1_emp / *c - 1.0);
  }
  if (auto c = kernel.hessian_constant(); c && rep.C2_emp > *c * (1.0 + 1e-4)) {
    hess_ok = false;
    record("hessian", Point{}, rep.C2_emp, *c, rep.C2_emp / *c - 1.0);
  }
  if (!grad_ok && rep.gradient_growth > kGrowthLimit)
    record("gradient", Point{}, rep.gradient_growth, kGrowthLimit, rep.gradient_growth);
  if (!hess_ok && rep.hessian_growth > kGrowthLimit)
    record("hessian", Point{}, rep.hessian_growth, kGrowthLimit, rep.hessian_growth);

  rep.is_L0 = rep.even && lower_ok && upper_ok;
  rep.is_L1 = rep.is_L0 && grad_ok;
  rep.is_L2 = rep.is_L1 && hess_ok;
  rep.worst_points = std::move(worst);
  return rep;
}

nlohmann::json to_json(const ClassReport& r) {
  json pts = json::array();
  for (const auto& v : r.worst_points)
    pts.push_back({{"bound", v.bound}, {"y", {v.y[0], v.y[1]}}, {"value", v.value},
                   {"limit", v.limit}});
  return {{"is_L0", r.is_L0},
          {"is_L1", r.is_L1},
          {"is_L2", r.is_L2},
          {"even", r.even},
          {"lambda_emp", r.lambda_emp},
          {"Lambda_emp", r.Lambda_emp},
          {"C1_emp", r.C1_emp},
          {"C2_emp", r.C2_emp},
          {"gradient_growth", r.gradient_growth},
          {"hessian_growth", r.hessian_growth},
          {"worst_points", pts}};
}

}  // namespace nlb
