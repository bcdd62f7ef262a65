#include "nlbellman/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "nlbellman/errors.hpp"
#include "nlbellman/parallel.hpp"
#include "nlbellman/solver.hpp"

namespace nlb {

namespace {

bool in_mask_region(const QuadratureLayout& L, std::size_t atom) {
  return L.radius(L.atom_radial(atom)) < kMaskRadius;
}

void check_mask_point(const Point& x) {
  if (norm(x) > kMaskRadius * (1.0 + 1e-12))
    throw ValidationError("x", "point must lie in the ball of radius 1/2");
}

struct Line {
  double slope = 0.0, intercept = 0.0, rms = 0.0;
};

Line fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  Line l;
  l.slope = sxx > 0 ? sxy / sxx : 0.0;
  l.intercept = my - l.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - l.intercept - l.slope * x[i];
    ss += r * r;
  }
  l.rms = std::sqrt(ss / n);
  return l;
}

std::vector<Point> sphere_points(const Point& c, double r, int n) {
  if (n == 1) return {c + Point{r, 0.0}, c - Point{r, 0.0}};
  std::vector<Point> p;
  for (int k = 0; k < 16; ++k) {
    const double t = 2.0 * M_PI * k / 16;
    p.push_back(c + r * Point{std::cos(t), std::sin(t)});
  }
  return p;
}

}  // namespace

std::size_t MaskedKernel::atom_count(const QuadratureLayout& L) {
  std::size_t c = L.direction_count();
  for (std::size_t a = 0; a < L.atom_count(); ++a)
    if (in_mask_region(L, a)) ++c;
  return c;
}

MaskedKernel MaskedKernel::full(double sigma, const QuadratureLayout& L) {
  return {sigma, std::vector<std::uint8_t>(atom_count(L), 1)};
}

MaskedKernel MaskedKernel::random(double sigma, const QuadratureLayout& L, std::mt19937_64& rng) {
  MaskedKernel m{sigma, std::vector<std::uint8_t>(atom_count(L))};
  std::bernoulli_distribution coin(0.5);
  for (auto& v : m.mask) v = coin(rng) ? 1 : 0;
  return m;
}

MaskedKernel MaskedKernel::complement() const {
  MaskedKernel m = *this;
  for (auto& v : m.mask) v = v ? 0 : 1;
  return m;
}

double mask_bump(const Point& x) { return cutoff(norm(x) / kMaskRadius); }

Increments gather_increments(const ScalarField& u, const Point& x, double sigma,
                             const QuadratureLayout& L) {
  check_mask_point(x);
  const KernelTable T = tabulate_power(2.0 - sigma, sigma, L);
  const PointSamples sx = gather_samples(u, x, L);
  const PointSamples s0 = gather_samples(u, Point{0.0, 0.0}, L);
  Increments inc;
  inc.bump = mask_bump(x);
  double m2 = 0.0, m4 = 0.0, ring_err = 0.0;
  for (std::size_t k = 0; k < L.direction_count(); ++k) {
    inc.terms.push_back(L.direction_weight(k) * (T.core[k] * (sx.core[k] - s0.core[k])));
    m2 += L.direction_weight(k) * T.core[k];
    m4 += L.direction_weight(k) * T.core4[k];
  }
  for (std::size_t a = 0; a < L.atom_count(); ++a) {
    if (!in_mask_region(L, a)) continue;
    const double w = L.atom_weight(a) * T.ring[a];
    inc.terms.push_back(w * (sx.ring[a] - s0.ring[a]));
    ring_err += w * (sx.ring_error[a] + s0.ring_error[a]);
  }
  const double M4 = std::max(sx.fourth, s0.fourth);
  const double core_err = M4 / 12.0 * m4 + L.dimension() * M4 * sx.h * sx.h / 12.0 * m2;
  inc.error = inc.bump * (2.0 * core_err + ring_err);
  return inc;
}

double masked_sum(const Increments& inc, const std::vector<std::uint8_t>& mask) {
  if (mask.size() != inc.terms.size())
    throw ValidationError("mask", "size does not match the quadrature atoms in B_1/2");
  double s = 0.0;
  for (std::size_t j = 0; j < inc.terms.size(); ++j) s += mask[j] ? inc.terms[j] : 0.0;
  return inc.bump * s;
}

double compute_w_A(const ScalarField& u, const Point& x, const MaskedKernel& mask,
                   const QuadratureScheme& scheme) {
  const QuadratureLayout L(scheme, u.dimension());
  return masked_sum(gather_increments(u, x, mask.sigma, L), mask.mask);
}

PN compute_P_N(const Increments& inc) {
  PN r;
  double p = 0.0, n = 0.0, all = 0.0;
  r.sign_mask.resize(inc.terms.size());
  for (std::size_t j = 0; j < inc.terms.size(); ++j) {
    const double t = inc.terms[j];
    r.sign_mask[j] = t > 0.0 ? 1 : 0;
    p += t > 0.0 ? t : 0.0;
    n += t < 0.0 ? -t : 0.0;
    all += t;
  }
  r.P = inc.bump * p;
  r.N = inc.bump * n;
  r.w_full = inc.bump * all;
  r.error = inc.error;
  return r;
}

PN compute_P_N(const ScalarField& u, const Point& x, double sigma, const QuadratureScheme& scheme) {
  const QuadratureLayout L(scheme, u.dimension());
  return compute_P_N(gather_increments(u, x, sigma, L));
}

EvalResult absolute_mass(const ScalarField& u, const Point& x, double sigma,
                         const QuadratureScheme& scheme) {
  const QuadratureLayout L(scheme, u.dimension());
  const KernelTable T = tabulate_power(2.0 - sigma, sigma, L);
  return apply_absolute(T, L, gather_samples(u, x, L));
}

PNReport pn_comparability(const ScalarField& u, const std::vector<Point>& points,
                          EllipticityBounds bounds, double sigma, const QuadratureScheme& scheme,
                          double cap) {
  bounds.validate();
  const QuadratureLayout L(scheme, u.dimension());
  PNReport rep;
  rep.cap = cap;
  rep.entries.resize(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const PN pn = compute_P_N(gather_increments(u, points[i], sigma, L));
    PNEntry& e = rep.entries[i];
    e.x = points[i];
    e.P = pn.P;
    e.N = pn.N;
    const double r = norm(points[i]);
    const double lower_gap = bounds.lambda / bounds.Lambda * pn.N - pn.P;
    const double upper_gap = pn.P - bounds.Lambda / bounds.lambda * pn.N;
    const double gap = std::max({0.0, lower_gap, upper_gap});
    e.required_C = gap == 0.0 ? 0.0 : (r > 0.0 ? gap / r : std::numeric_limits<double>::infinity());
  });
  for (const auto& e : rep.entries) {
    if (e.required_C > cap) {
      rep.violations.push_back(e.x);
    } else {
      rep.C_emp = std::max(rep.C_emp, e.required_C);
    }
  }
  rep.holds = rep.violations.empty();
  return rep;
}

std::vector<double> default_holder_radii() { return {0.25, 0.125, 0.0625, 0.03125}; }

HolderFit holder_fit(const ScalarField& u, const Point& center, double sigma,
                     const std::vector<double>& radii, const QuadratureScheme& scheme) {
  if (radii.size() < 4) throw ValidationError("radii", "need at least 4 levels");
  for (double r : radii)
    if (!(r > 0.0) || r > 0.25 * (1.0 + 1e-12))
      throw ValidationError("radii", "must lie in (0, 1/4]");
  const LinearOperator op(make_power_kernel(sigma, u.dimension()), scheme);
  const EvalResult vc = op(u, center);
  // Rounding: γ_N times the absolute weight of the operator against samples
  // of size 4·sup|u| (ring) and 4·sup|u|/h² (core stencils).
  const QuadratureLayout& L = op.layout();
  PointSamples unit;
  unit.dimension = L.dimension();
  unit.core.assign(L.direction_count(), 1.0 / (u.grid().h() * u.grid().h()));
  unit.ring.assign(L.atom_count(), 1.0);
  unit.ring_error.assign(L.atom_count(), 0.0);
  unit.tail_delta = 1.0;
  const double N = static_cast<double>(L.atom_count() + L.direction_count() + 16);
  const double eps = std::numeric_limits<double>::epsilon();
  const double round_off =
      N * eps / (1.0 - N * eps) * 4.0 * u.sup_norm() * apply_absolute(op.table(), L, unit).value;
  const double center_error = vc.error() + round_off;

  HolderFit fit;
  fit.levels.resize(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) {
    HolderLevel& lv = fit.levels[i];
    lv.radius = radii[i];
    double err = 0.0;
    for (const Point& x : sphere_points(center, radii[i], u.dimension())) {
      const EvalResult vx = op(u, x);
      lv.oscillation = std::max(lv.oscillation, std::abs(vx.value - vc.value));
      err = std::max(err, vx.error() + round_off);
    }
    lv.error = err + center_error;
    lv.resolved = lv.oscillation >= 10.0 * lv.error && lv.oscillation > 0.0;
  });

  std::vector<double> lx, ly;
  for (const auto& lv : fit.levels)
    if (lv.resolved) {
      lx.push_back(std::log(lv.radius));
      ly.push_back(std::log(lv.oscillation));
    }
  if (lx.size() < 2) {
    fit.note = "oscillation below 10x quadrature error on too many levels";
    return fit;
  }
  const Line l = fit_line(lx, ly);
  fit.resolved = true;
  fit.alpha = l.slope;
  fit.C = std::exp(l.intercept);
  fit.residual = l.rms;
  return fit;
}

ScalarField mollify(const ScalarField& u, double delta) {
  const Grid& g = u.grid();
  const double h = g.h();
  const int n = g.dimension(), m = g.nodes_per_axis();
  const int reach = static_cast<int>(std::floor(delta / h));
  struct W {
    int di, dj;
    double w;
  };
  std::vector<W> weights;
  double total = 0.0;
  for (int dj = (n == 2 ? -reach : 0); dj <= (n == 2 ? reach : 0); ++dj)
    for (int di = -reach; di <= reach; ++di) {
      const double r = h * std::hypot(double(di), double(dj));
      const double w = delta > 0.0 ? cutoff(r / delta) : (r == 0.0 ? 1.0 : 0.0);
      if (w > 0.0 || (di == 0 && dj == 0)) {
        weights.push_back({di, dj, w > 0.0 ? w : 1.0});
        total += weights.back().w;
      }
    }
  for (auto& w : weights) w.w /= total;

  std::vector<double> out(g.size());
  parallel_for(g.size(), [&](std::size_t k) {
    const auto ij = g.indices(k);
    double s = 0.0;
    for (const auto& w : weights) {
      const int i = ij[0] + w.di, j = ij[1] + w.dj;
      const bool inside = i >= 0 && i < m && (n == 1 || (j >= 0 && j < m));
      const double v = inside ? u.values()[g.index(i, j)]
                              : u.exterior()(Point{g.axis_coordinate(i),
                                                   n == 2 ? g.axis_coordinate(j) : 0.0});
      s += w.w * v;
    }
    out[k] = s;
  });
  return ScalarField(g, std::move(out), u.exterior());
}

ConcavityReport concavity_checks(const BellmanProblem& problem, const ScalarField& u,
                                 const ScalarField& v, const QuadratureScheme& scheme, double tol,
                                 const std::vector<double>& deltas) {
  if (!(tol > 0.0)) throw ValidationError("tol", "must be positive");
  const Grid& grid = problem.grid;
  const auto interior_min = [&](const ScalarField& r, double radius) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double d = norm(grid.coordinate(k));
      if (d < 1.0 * (1.0 - 1e-12) && d < radius) m = std::min(m, r.values()[k]);
    }
    return std::isfinite(m) ? m : 0.0;
  };

  ConcavityReport rep;
  const ScalarField avg = u.combined(0.5, v, 0.5);
  rep.min_average_residual = interior_min(residual(problem, avg, scheme), 1.0);
  rep.average_ok = rep.min_average_residual >= -2.0 * tol;

  const EllipticityBounds fb = problem.family_bounds();
  const double sigma = problem.sigma();
  const int n = problem.dimension();
  const double Rb = grid.box_radius();
  for (double delta : deltas) {
    MollifiedCheck mc;
    mc.delta = delta;
    const double radius = 1.0 - std::max(delta, 0.0);
    // Outside the box the mollified field keeps g instead of η∗g.
    const double wg =
        problem.exterior.modulus(delta, Rb, Rb * std::sqrt(double(n)) + 4.0, n);
    const double far = Rb - radius;
    mc.modulus = 2.0 * wg * fb.Lambda * (2.0 - sigma) * sphere_measure(n) *
                 std::pow(far, -sigma) / sigma;
    mc.min_residual = interior_min(residual(problem, mollify(u, delta), scheme), radius);
    mc.ok = mc.min_residual >= -tol - mc.modulus - 1e-10;
    rep.mollified.push_back(mc);
  }
  return rep;
}

PDecay p_decay(const std::vector<Point>& points, const std::vector<double>& P) {
  PDecay d;
  std::vector<double> lx, ly;
  for (int k = 0; k <= 4; ++k) {
    const double r = std::ldexp(1.0, -1 - k);
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (norm(points[i]) <= r * (1.0 + 1e-12)) s = std::max(s, P[i]);
    d.radii.push_back(r);
    d.sup_P.push_back(s);
    if (s > 0.0) {
      lx.push_back(std::log(r));
      ly.push_back(std::log(s));
    }
  }
  if (lx.size() >= 2) d.exponent = fit_line(lx, ly).slope;
  return d;
}

std::vector<Point> sample_nodes(const Grid& grid, double radius, std::size_t max_points) {
  const double h = grid.h();
  const int n = grid.dimension();
  const int half = static_cast<int>(std::floor(radius / h + 1e-9));
  int stride = 1;
  if (n == 2) {
    const double count = M_PI * half * half;
    stride = std::max(1, static_cast<int>(std::ceil(std::sqrt(count / double(max_points)))));
  }
  std::vector<Point> pts;
  for (int j = (n == 2 ? -half : 0); j <= (n == 2 ? half : 0); j += stride)
    for (int i = -half; i <= half; i += (n == 2 ? stride : 1)) {
      const Point x{i * h, n == 2 ? j * h : 0.0};
      if (norm(x) <= radius * (1.0 + 1e-12)) pts.push_back(x);
    }
  return pts;
}

RegularityReport diagnose(const BellmanProblem& problem, const ScalarField& u,
                          const QuadratureScheme& scheme) {
  problem.validate();
  const double sigma = problem.sigma();
  const QuadratureLayout L(scheme, u.dimension());
  const KernelTable power = tabulate_power(2.0 - sigma, sigma, L);

  RegularityReport rep;
  rep.sigma = sigma;
  rep.sup_norm = u.sup_norm();
  const auto pts = sample_nodes(u.grid(), kMaskRadius);
  rep.points.resize(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const PointSamples s = gather_samples(u, pts[i], L);
    PointDiagnostics& d = rep.points[i];
    d.x = pts[i];
    d.A = apply_absolute(power, L, s).value;
    d.v = apply_linear(power, L, s).value;
    const PN pn = compute_P_N(gather_increments(u, pts[i], sigma, L));
    d.P = pn.P;
    d.N = pn.N;
  });
  double maxA = 0.0;
  std::vector<double> P;
  for (const auto& d : rep.points) {
    maxA = std::max(maxA, d.A);
    P.push_back(d.P);
  }
  rep.max_A_over_sup = rep.sup_norm > 0.0 ? maxA / rep.sup_norm : 0.0;
  rep.holder = holder_fit(u, {0.0, 0.0}, sigma, default_holder_radii(), scheme);
  rep.pn = pn_comparability(u, pts, problem.family_bounds(), sigma, scheme);
  rep.decay = p_decay(pts, P);
  return rep;
}

SweepReport sigma_sweep(const nlohmann::json& problem_template, const std::vector<double>& sigmas,
                        const nlohmann::json& solver_quadrature,
                        const nlohmann::json& diagnostics_quadrature, double tol) {
  if (sigmas.empty()) throw ValidationError("sigma_list", "must not be empty");
  for (double s : sigmas)
    if (!(s >= 1.05 && s <= 1.995)) throw ValidationError("sigma_list", "entries must lie in [1.05, 1.995]");
  SweepReport rep;
  rep.rows.resize(sigmas.size());
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    SweepRow& row = rep.rows[i];
    row.sigma = sigmas[i];
    try {
      const BellmanProblem p = BellmanProblem::from_json(problem_template, sigmas[i]);
      const QuadratureScheme qs = QuadratureScheme::from_json(solver_quadrature, p.grid.h());
      const QuadratureScheme qd = QuadratureScheme::from_json(diagnostics_quadrature, p.grid.h());
      const Solution sol = solve_dirichlet(p, qs, tol);
      const RegularityReport d = diagnose(p, sol.field, qd);
      row.ok = true;
      row.iterations = sol.iterations;
      row.residual = sol.residual_sup;
      row.max_A_over_sup = d.max_A_over_sup;
      row.C_emp = d.pn.C_emp;
      row.alpha_resolved = d.holder.resolved;
      row.alpha = d.holder.alpha;
      row.holder_residual = d.holder.residual;
    } catch (const Error& e) {
      row.ok = false;
      row.error = std::string(e.kind()) + ": " + e.what();
    }
  }
  return rep;
}

nlohmann::json to_json(const HolderFit& f) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : f.levels)
    levels.push_back({{"radius", l.radius},
                      {"oscillation", l.oscillation},
                      {"error", l.error},
                      {"resolved", l.resolved}});
  nlohmann::json j{{"resolved", f.resolved}, {"levels", levels}};
  if (f.resolved) {
    j["alpha"] = f.alpha;
    j["C"] = f.C;
    j["residual"] = f.residual;
  } else {
    j["alpha"] = nullptr;
    j["note"] = f.note;
  }
  return j;
}

nlohmann::json to_json(const PNReport& r) {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& p : r.violations) v.push_back(p);
  return {{"C_emp", r.C_emp}, {"holds", r.holds}, {"cap", r.cap}, {"violations", v}};
}

nlohmann::json to_json(const ConcavityReport& r) {
  nlohmann::json m = nlohmann::json::array();
  for (const auto& c : r.mollified)
    m.push_back({{"delta", c.delta},
                 {"min_residual", c.min_residual},
                 {"modulus", c.modulus},
                 {"ok", c.ok}});
  return {{"min_average_residual", r.min_average_residual},
          {"average_ok", r.average_ok},
          {"mollified", m}};
}

nlohmann::json to_json(const RegularityReport& r) {
  nlohmann::json decay{{"radii", r.decay.radii}, {"sup_P", r.decay.sup_P}};
  decay["exponent"] = r.decay.exponent ? nlohmann::json(*r.decay.exponent) : nlohmann::json();
  return {{"sigma", r.sigma},
          {"sup_norm", r.sup_norm},
          {"max_A_over_sup", r.max_A_over_sup},
          {"point_count", r.points.size()},
          {"holder", to_json(r.holder)},
          {"pn_comparability", to_json(r.pn)},
          {"p_decay", decay}};
}

nlohmann::json to_json(const SweepReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : r.rows) {
    nlohmann::json j{{"sigma", s.sigma}, {"ok", s.ok}};
    if (!s.ok) {
      j["error"] = s.error;
    } else {
      j["iterations"] = s.iterations;
      j["residual"] = s.residual;
      j["max_A_over_sup"] = s.max_A_over_sup;
      j["C_emp"] = s.C_emp;
      j["alpha_resolved"] = s.alpha_resolved;
      j["alpha"] = s.alpha_resolved ? nlohmann::json(s.alpha) : nlohmann::json();
      j["holder_residual"] = s.holder_residual;
    }
    rows.push_back(j);
  }
  return {{"rows", rows}};
}

}  // namespace nlb
