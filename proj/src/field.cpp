#include "nlbellman/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlbellman/errors.hpp"

namespace nlb {

using nlohmann::json;

namespace {

const char* shape_name(ClosureTerm::Shape s) {
  switch (s) {
    case ClosureTerm::Shape::Cosine: return "cosine";
    case ClosureTerm::Shape::QuadraticBump: return "quadratic_bump";
    case ClosureTerm::Shape::Bump: return "bump";
    case ClosureTerm::Shape::Hat: return "hat";
  }
  return "cosine";
}

std::optional<ClosureTerm::Shape> shape_from_name(const std::string& s) {
  if (s == "cosine") return ClosureTerm::Shape::Cosine;
  if (s == "quadratic_bump") return ClosureTerm::Shape::QuadraticBump;
  if (s == "bump") return ClosureTerm::Shape::Bump;
  if (s == "hat") return ClosureTerm::Shape::Hat;
  return std::nullopt;
}

json term_params(const ClosureTerm& t) {
  json p = {{"amplitude", t.amplitude}, {"scale", t.scale}};
  if (t.shape == ClosureTerm::Shape::Cosine) p["xi"] = {t.xi[0], t.xi[1]};
  if (t.shape == ClosureTerm::Shape::QuadraticBump || t.shape == ClosureTerm::Shape::Bump)
    p["radius"] = t.radius;
  return p;
}

ClosureTerm term_from_params(ClosureTerm::Shape shape, const json& p) {
  ClosureTerm t;
  t.shape = shape;
  t.amplitude = p.value("amplitude", 1.0);
  t.scale = p.value("scale", 1.0);
  if (p.contains("xi")) {
    const auto xi = p.at("xi").get<std::vector<double>>();
    if (xi.empty() || xi.size() > 2) throw ValidationError("exterior.xi", "needs 1 or 2 entries");
    t.xi = {xi[0], xi.size() > 1 ? xi[1] : 0.0};
  }
  t.radius = p.value("radius", 1.0);
  if (!(t.scale > 0.0)) throw ValidationError("exterior.scale", "must be positive");
  if (!(t.radius > 0.0)) throw ValidationError("exterior.radius", "must be positive");
  return t;
}

}  // namespace

double ClosureTerm::operator()(const Point& z) const {
  const Point w = scale * z;
  switch (shape) {
    case Shape::Cosine: return amplitude * std::cos(dot(xi, w));
    case Shape::QuadraticBump: {
      const double r = norm(w);
      return amplitude * r * r * cutoff(r / radius);
    }
    case Shape::Bump: return amplitude * cutoff(norm(w) / radius);
    case Shape::Hat: return amplitude * std::max(0.0, 1.0 - norm(w));
  }
  return 0.0;
}

double ClosureTerm::base_bound() const {
  return shape == Shape::QuadraticBump ? radius * radius : 1.0;
}

double ClosureTerm::support_radius() const {
  switch (shape) {
    case Shape::Cosine: return std::numeric_limits<double>::infinity();
    case Shape::QuadraticBump:
    case Shape::Bump: return radius / scale;
    case Shape::Hat: return 1.0 / scale;
  }
  return std::numeric_limits<double>::infinity();
}

ExteriorClosure::ExteriorClosure(double offset, std::vector<ClosureTerm> terms)
    : offset_(offset), terms_(std::move(terms)) {
  if (!std::isfinite(offset_)) throw ValidationError("exterior.offset", "must be finite");
}

ExteriorClosure ExteriorClosure::cosine(double amplitude, Point xi, double offset) {
  ClosureTerm t;
  t.shape = ClosureTerm::Shape::Cosine;
  t.amplitude = amplitude;
  t.xi = xi;
  return ExteriorClosure(offset, {t});
}

ExteriorClosure ExteriorClosure::quadratic_bump(double amplitude, double radius, double offset) {
  ClosureTerm t;
  t.shape = ClosureTerm::Shape::QuadraticBump;
  t.amplitude = amplitude;
  t.radius = radius;
  return ExteriorClosure(offset, {t});
}

ExteriorClosure ExteriorClosure::bump(double amplitude, double radius, double offset) {
  ClosureTerm t;
  t.shape = ClosureTerm::Shape::Bump;
  t.amplitude = amplitude;
  t.radius = radius;
  return ExteriorClosure(offset, {t});
}

ExteriorClosure ExteriorClosure::hat(double amplitude, double scale, double offset) {
  ClosureTerm t;
  t.shape = ClosureTerm::Shape::Hat;
  t.amplitude = amplitude;
  t.scale = scale;
  return ExteriorClosure(offset, {t});
}

double ExteriorClosure::operator()(const Point& z) const {
  double v = offset_;
  for (const auto& t : terms_) v += t(z);
  return v;
}

double ExteriorClosure::bound() const {
  double b = std::abs(offset_);
  for (const auto& t : terms_) b += std::abs(t.amplitude) * t.base_bound();
  return b;
}

double ExteriorClosure::far_oscillation(double radius) const {
  double b = 0.0;
  for (const auto& t : terms_)
    if (t.support_radius() > radius) b += std::abs(t.amplitude) * t.base_bound();
  return b;
}

double ExteriorClosure::modulus(double delta, double from, double to, int dimension) const {
  if (terms_.empty() || !(delta > 0.0) || !(to > from)) return 0.0;
  double support = 0.0;
  for (const auto& t : terms_) support = std::max(support, t.support_radius());
  if (support + delta <= from) return 0.0;
  const double hi = std::min(to, support + delta);
  const int steps = std::clamp(static_cast<int>((hi - from) / (0.25 * delta)), 1, 4000);
  const int rays = dimension == 1 ? 2 : 16;
  double worst = 0.0;
  for (int k = 0; k < rays; ++k) {
    const double theta = 2.0 * M_PI * k / rays;
    const Point dir = dimension == 1 ? Point{k == 0 ? 1.0 : -1.0, 0.0}
                                     : Point{std::cos(theta), std::sin(theta)};
    for (int s = 0; s <= steps; ++s) {
      const Point z = (from + (hi - from) * s / steps) * dir;
      const double gz = (*this)(z);
      for (int a = 0; a < dimension; ++a) {
        Point d{0.0, 0.0};
        d[a] = delta;
        worst = std::max({worst, std::abs((*this)(z + d) - gz), std::abs((*this)(z - d) - gz)});
      }
    }
  }
  return worst;
}

ExteriorClosure ExteriorClosure::rescaled(double scale) const {
  auto terms = terms_;
  for (auto& t : terms) t.scale *= scale;
  return ExteriorClosure(offset_, std::move(terms));
}

ExteriorClosure ExteriorClosure::combined(double a, const ExteriorClosure& other, double b) const {
  std::vector<ClosureTerm> terms;
  for (auto t : terms_) {
    t.amplitude *= a;
    terms.push_back(t);
  }
  for (auto t : other.terms_) {
    t.amplitude *= b;
    terms.push_back(t);
  }
  return ExteriorClosure(a * offset_ + b * other.offset_, std::move(terms));
}

json ExteriorClosure::to_json() const {
  if (terms_.empty()) return {{"kind", "constant"}, {"params", {{"value", offset_}}}};
  if (terms_.size() == 1) {
    json p = term_params(terms_[0]);
    p["offset"] = offset_;
    return {{"kind", shape_name(terms_[0].shape)}, {"params", p}};
  }
  json terms = json::array();
  for (const auto& t : terms_) {
    json p = term_params(t);
    p["shape"] = shape_name(t.shape);
    terms.push_back(p);
  }
  return {{"kind", "sum"}, {"params", {{"offset", offset_}, {"terms", terms}}}};
}

ExteriorClosure ExteriorClosure::from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw ValidationError("exterior", "closure needs a 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  const json params = j.value("params", json::object());
  if (kind == "constant") return ExteriorClosure(params.value("value", 0.0));
  if (kind == "sum") {
    std::vector<ClosureTerm> terms;
    for (const auto& tj : params.value("terms", json::array())) {
      const auto shape = shape_from_name(tj.value("shape", ""));
      if (!shape) throw ValidationError("exterior.terms.shape", "unknown shape");
      terms.push_back(term_from_params(*shape, tj));
    }
    return ExteriorClosure(params.value("offset", 0.0), std::move(terms));
  }
  const auto shape = shape_from_name(kind);
  if (!shape) throw ValidationError("exterior.kind", "unknown closure kind '" + kind + "'");
  return ExteriorClosure(params.value("offset", 0.0), {term_from_params(*shape, params)});
}

// ---------------------------------------------------------------------------

Grid::Grid(int dimension, double h, double box_radius) : n_(dimension), h_(h), R_(box_radius) {
  if (dimension != 1 && dimension != 2)
    throw ValidationError("dimension", "must be 1 or 2");
  if (!(h > 0.0)) throw ValidationError("h", "must be positive");
  if (!(box_radius >= 2.0)) throw ValidationError("box_radius", "must be at least 2");
  const double cells = 2.0 * R_ / h_;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9 * rounded)
    throw ValidationError("h", "2R/h must be an integer");
  m_ = static_cast<int>(rounded) + 1;
}

std::size_t Grid::size() const {
  return n_ == 1 ? static_cast<std::size_t>(m_) : static_cast<std::size_t>(m_) * m_;
}

std::array<int, 2> Grid::indices(std::size_t flat) const {
  return {static_cast<int>(flat % m_), static_cast<int>(flat / m_)};
}

Point Grid::coordinate(std::size_t flat) const {
  const auto ij = indices(flat);
  return {axis_coordinate(ij[0]), n_ == 2 ? axis_coordinate(ij[1]) : 0.0};
}

bool Grid::in_box(const Point& z) const {
  for (int a = 0; a < n_; ++a)
    if (std::abs(z[a]) > R_) return false;
  return true;
}

std::optional<std::size_t> Grid::node_at(const Point& z) const {
  if (!in_box(z)) return std::nullopt;
  std::array<int, 2> ij{0, 0};
  for (int a = 0; a < n_; ++a) {
    const double t = (z[a] + R_) / h_;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-9) return std::nullopt;
    ij[a] = static_cast<int>(r);
  }
  return index(ij[0], ij[1]);
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(Grid grid, std::vector<double> values, ExteriorClosure exterior)
    : grid_(grid), values_(std::move(values)), exterior_(std::move(exterior)) {
  if (values_.size() != grid_.size())
    throw ValidationError("values", "expected " + std::to_string(grid_.size()) + " nodes, got " +
                                        std::to_string(values_.size()));
  double s = exterior_.bound();
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("values", "non-finite node value");
    s = std::max(s, std::abs(v));
  }
  sup_norm_ = s;

  const int m = grid_.nodes_per_axis();
  const int n = grid_.dimension();
  curvature_.assign(values_.size(), 0.0);
  fourth_.assign(values_.size(), 0.0);
  auto value_at = [&](int i, int j) {
    if (i >= 0 && i < m && j >= 0 && (n == 1 ? j == 0 : j < m)) return values_[grid_.index(i, j)];
    return exterior_(Point{grid_.axis_coordinate(i), n == 2 ? grid_.axis_coordinate(j) : 0.0});
  };
  for (std::size_t f = 0; f < values_.size(); ++f) {
    const auto [i, j] = grid_.indices(f);
    const double c = values_[f];
    double k = std::abs(value_at(i + 1, j) + value_at(i - 1, j) - 2.0 * c);
    if (n == 2) k = std::max(k, std::abs(value_at(i, j + 1) + value_at(i, j - 1) - 2.0 * c));
    curvature_[f] = k;
    double q = 0.0;
    for (int a = 0; a < n; ++a) {
      const int di = a == 0 ? 1 : 0, dj = a == 1 ? 1 : 0;
      q = std::max(q, std::abs(value_at(i + 2 * di, j + 2 * dj) - 4.0 * value_at(i + di, j + dj) +
                               6.0 * c - 4.0 * value_at(i - di, j - dj) +
                               value_at(i - 2 * di, j - 2 * dj)));
    }
    fourth_[f] = q;
  }
}

ScalarField ScalarField::sampled(const Grid& grid, const std::function<double(const Point&)>& f,
                                 ExteriorClosure exterior) {
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(grid.coordinate(k));
  return ScalarField(grid, std::move(v), std::move(exterior));
}

ScalarField ScalarField::from_closure(const Grid& grid, ExteriorClosure exterior) {
  const ExteriorClosure g = exterior;
  return sampled(grid, [&](const Point& z) { return g(z); }, std::move(exterior));
}

ScalarField ScalarField::with_exterior_region(double radius) const {
  if (!(radius > 0.0)) throw ValidationError("exterior_radius", "must be positive");
  ScalarField f = *this;
  f.exterior_radius_ = radius;
  return f;
}

double ScalarField::sample(const Point& z, int order) const {
  if (uses_closure(z)) return exterior_(z);
  double v = 0.0;
  grid_.interpolation_weights(z, order, [&](std::size_t k, double w) { v += w * values_[k]; });
  return v;
}

double ScalarField::interpolation_error(const Point& z, int order) const {
  if (uses_closure(z)) return 0.0;
  double worst = 0.0;
  int count = 0;
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  grid_.interpolation_weights(z, 1, [&](std::size_t k, double) {
    ++count;
    worst = std::max(worst, curvature_[k]);
    vmin = std::min(vmin, values_[k]);
    vmax = std::max(vmax, values_[k]);
  });
  if (count <= 1) return 0.0;
  if (order == 3) {
    // Cubic Lagrange remainder |ω(t)| h⁴ max|u''''| / 24 per axis, with
    // ω(t) = t(t−1)(t−2)(t−3) on the stencil nodes 0..3 and h⁴|u''''| ≈ the
    // fourth difference; factor 2 as below.
    double w4 = 0.0;
    grid_.interpolation_weights(z, 3, [&](std::size_t k, double) { w4 = std::max(w4, fourth_[k]); });
    const int m = grid_.nodes_per_axis();
    double coef = 0.0;
    for (int a = 0; a < grid_.dimension(); ++a) {
      const double t = (z[a] + grid_.box_radius()) / grid_.h();
      const int i = std::clamp(static_cast<int>(std::floor(t)), 0, m - 2);
      const double s = t - std::clamp(i - 1, 0, m - 4);
      coef += std::abs(s * (s - 1.0) * (s - 2.0) * (s - 3.0)) / 24.0;
    }
    return 2.0 * coef * w4;
  }
  // Multilinear: |u − Iu| ≤ n h² max|u''| / 8, with h²|u''| ≈ the second
  // difference; factor 2 for the estimate of the derivative.
  if (order >= 1) return grid_.dimension() * worst / 4.0;
  return vmax - vmin;
}

double ScalarField::local_fourth_derivative(const Point& x) const {
  const int n = grid_.dimension();
  const int m = grid_.nodes_per_axis();
  const double h = grid_.h();
  std::array<int, 2> c{0, 0};
  for (int a = 0; a < n; ++a)
    c[a] = static_cast<int>(std::lround((x[a] + grid_.box_radius()) / h));
  auto value_at = [&](int i, int j) {
    if (i >= 0 && i < m && j >= 0 && (n == 1 ? j == 0 : j < m)) return values_[grid_.index(i, j)];
    return exterior_(Point{grid_.axis_coordinate(i), n == 2 ? grid_.axis_coordinate(j) : 0.0});
  };
  double worst = 0.0;
  const int span = 2;
  for (int dj = (n == 2 ? -span : 0); dj <= (n == 2 ? span : 0); ++dj) {
    for (int di = -span; di <= span; ++di) {
      const int i = c[0] + di, j = c[1] + dj;
      for (int a = 0; a < n; ++a) {
        const int ei = a == 0 ? 1 : 0, ej = a == 1 ? 1 : 0;
        const double d4 = value_at(i + 2 * ei, j + 2 * ej) - 4.0 * value_at(i + ei, j + ej) +
                          6.0 * value_at(i, j) - 4.0 * value_at(i - ei, j - ej) +
                          value_at(i - 2 * ei, j - 2 * ej);
        worst = std::max(worst, std::abs(d4));
      }
    }
  }
  return 2.0 * worst / (h * h * h * h);
}

ScalarField ScalarField::combined(double a, const ScalarField& other, double b) const {
  if (!(grid_ == other.grid_)) throw ValidationError("field", "grids differ");
  std::vector<double> v(values_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a * values_[k] + b * other.values_[k];
  ScalarField f(grid_, std::move(v), exterior_.combined(a, other.exterior_, b));
  if (exterior_radius_ && exterior_radius_ == other.exterior_radius_)
    f.exterior_radius_ = exterior_radius_;
  return f;
}

ScalarField ScalarField::shifted(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x += c;
  ScalarField f(grid_, std::move(v), exterior_.shifted(c));
  f.exterior_radius_ = exterior_radius_;
  return f;
}

}  // namespace nlb
