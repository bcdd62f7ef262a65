#include <doctest.h>

#include <cmath>
#include <random>

#include "nlbellman/errors.hpp"
#include "nlbellman/regularity.hpp"
#include "nlbellman/solver.hpp"

using namespace nlb;

namespace {

constexpr double kH = 1.0 / 64.0;

BellmanProblem two_kernel(double h = kH) {
  RadialModulation a, b;
  a.inner = 2.0;
  a.outer = 1.0;
  a.radius = 0.5;
  b.inner = 1.0;
  b.outer = 2.0;
  b.radius = 0.5;
  return {{make_radial_kernel(1.5, 1, a, {1.0, 2.0}), make_radial_kernel(1.5, 1, b, {1.0, 2.0})},
          {0.0, 1.0},
          ExteriorClosure::hat(1.0, 0.5),
          Grid(1, h, 2.0)};
}

QuadratureScheme diag_scheme(double h = kH) {
  QuadratureScheme q = QuadratureScheme::for_grid(h);
  q.interpolation_order = 3;
  return q;
}

const Solution& solved() {
  static const Solution s = solve_dirichlet(two_kernel(), QuadratureScheme::for_grid(kH), 1e-8);
  return s;
}

std::vector<Point> sample_points() {
  std::vector<Point> pts;
  for (int k = 1; k <= 8; ++k) {
    pts.push_back({3 * k * kH, 0.0});
    pts.push_back({-3 * k * kH, 0.0});
  }
  return pts;
}

}  // namespace

TEST_SUITE("regularity") {

TEST_CASE("mask bump") {
  CHECK(mask_bump({0.0, 0.0}) == 1.0);
  CHECK(mask_bump({0.25, 0.0}) == 1.0);
  CHECK(mask_bump({0.5, 0.0}) == 0.0);
  CHECK(mask_bump({0.3, 0.2}) > 0.0);
}

TEST_CASE("P and N at the origin vanish exactly") {
  const PN pn = compute_P_N(solved().field, {0.0, 0.0}, 1.5, diag_scheme());
  CHECK(pn.P == 0.0);
  CHECK(pn.N == 0.0);
  const QuadratureLayout L(diag_scheme(), 1);
  std::mt19937_64 rng(4);
  for (int m = 0; m < 10; ++m)
    CHECK(compute_w_A(solved().field, {0.0, 0.0}, MaskedKernel::random(1.5, L, rng), diag_scheme()) == 0.0);
}

TEST_CASE("quadratic fields have x-independent second differences") {
  const Grid g(1, kH, 2.0);
  const auto u = ScalarField::sampled(g, [](const Point& z) { return z[0] * z[0]; }, ExteriorClosure::constant(0.0));
  for (const auto& x : sample_points()) {
    const PN pn = compute_P_N(u, x, 1.5, diag_scheme());
    CHECK(pn.P <= 1e-10);
    CHECK(pn.N <= 1e-10);
  }
}

TEST_CASE("P, N and masked sums on a solved field") {
  const ScalarField& u = solved().field;
  const QuadratureLayout L(diag_scheme(), 1);
  std::mt19937_64 rng(17);
  for (const auto& x : sample_points()) {
    const Increments inc = gather_increments(u, x, 1.5, L);
    const PN pn = compute_P_N(inc);
    CHECK(pn.P >= 0.0);
    CHECK(pn.N >= 0.0);
    const double full = masked_sum(inc, MaskedKernel::full(1.5, L).mask);
    CHECK(std::abs(pn.P - pn.N - full) <= pn.error);
    CHECK(masked_sum(inc, pn.sign_mask) == pn.P);
    for (int m = 0; m < 100; ++m) {
      const MaskedKernel A = MaskedKernel::random(1.5, L, rng);
      const double w = masked_sum(inc, A.mask);
      CHECK(w <= pn.P);
      CHECK(w >= -pn.N);
      CHECK(std::abs(w) <= std::max(pn.P, pn.N));
      const double wc = masked_sum(inc, A.complement().mask);
      CHECK(w + wc == doctest::Approx(full).epsilon(1e-12).scale(pn.P + pn.N));
    }
  }
}

TEST_CASE("absolute mass and the Pucci reconstruction") {
  const ScalarField& u = solved().field;
  const auto q = diag_scheme();
  for (const auto& x : sample_points()) {
    const double A = absolute_mass(u, x, 1.5, q).value;
    const double v = fractional_laplacian(u, x, 1.5, q).value;
    CHECK(A >= std::abs(v) * (1.0 - 1e-14));
    const double hi = evaluate_pucci(u, x, {1.0, 2.0}, 1.5, PucciSign::Plus, q).value;
    const double lo = evaluate_pucci(u, x, {1.0, 2.0}, 1.5, PucciSign::Minus, q).value;
    // M⁺ − M⁻ = (Λ − λ)(∫δu⁺ + ∫δu⁻) and M⁺ + M⁻ = (Λ + λ)∫δu.
    CHECK(hi - lo == doctest::Approx(A).epsilon(1e-12).scale(A));
    CHECK(hi + lo == doctest::Approx(3.0 * v).epsilon(1e-12).scale(A));
  }
  const auto c = ScalarField::from_closure(Grid(1, kH, 2.0), ExteriorClosure::constant(2.0));
  CHECK(absolute_mass(c, {0.1, 0.0}, 1.5, q).value <= 1e-12);
}

TEST_CASE("P/N comparability") {
  const auto q = diag_scheme();
  SUBCASE("origin only") {
    const PNReport r = pn_comparability(solved().field, {{0.0, 0.0}}, {1.0, 2.0}, 1.5, q);
    CHECK(r.holds);
    CHECK(r.C_emp == 0.0);
  }
  SUBCASE("single isotropic kernel") {
    BellmanProblem p{{make_power_kernel(1.5, 1)}, {1.0}, ExteriorClosure::hat(1.0, 0.5), Grid(1, kH, 2.0)};
    const Solution s = solve_dirichlet(p, QuadratureScheme::for_grid(kH), 1e-8);
    const auto pts = sample_points();
    const PNReport r = pn_comparability(s.field, pts, {1.0, 1.0}, 1.5, q);
    CHECK(r.holds);
    for (const auto& e : r.entries) CHECK(std::abs(e.P - e.N) <= r.C_emp * norm(e.x) * (1 + 1e-12) + 1e-15);
  }
}

TEST_CASE("Hoelder fit") {
  SUBCASE("smooth field gives an exponent of at least one") {
    const auto u = ScalarField::from_closure(Grid(1, kH, 2.0), ExteriorClosure::bump(1.0, 1.0));
    const HolderFit f = holder_fit(u, {0.0, 0.0}, 1.5, default_holder_radii(), diag_scheme());
    REQUIRE(f.resolved);
    CHECK(f.alpha >= 1.0 - 0.1);
    CHECK(f.residual < 0.1);
  }
  SUBCASE("constant field is unresolved") {
    const auto u = ScalarField::from_closure(Grid(1, kH, 2.0), ExteriorClosure::constant(1.0));
    const HolderFit f = holder_fit(u, {0.0, 0.0}, 1.5, default_holder_radii(), diag_scheme());
    CHECK_FALSE(f.resolved);
    CHECK_FALSE(f.note.empty());
  }
  SUBCASE("solved instance on a finer grid") {
    const double h = 1.0 / 128.0;
    const Solution s = solve_dirichlet(two_kernel(h), QuadratureScheme::for_grid(h), 1e-8);
    const HolderFit f = holder_fit(s.field, {0.0, 0.0}, 1.5, default_holder_radii(), diag_scheme(h));
    REQUIRE(f.resolved);
    CHECK(f.alpha > 0.0);
    CHECK(f.residual < 0.1);
  }
  SUBCASE("radius contract") {
    const auto u = ScalarField::from_closure(Grid(1, kH, 2.0), ExteriorClosure::constant(1.0));
    CHECK_THROWS_AS(holder_fit(u, {0.0, 0.0}, 1.5, {0.25, 0.125, 0.0625}, diag_scheme()), ValidationError);
    CHECK_THROWS_AS(holder_fit(u, {0.0, 0.0}, 1.5, {0.5, 0.25, 0.125, 0.0625}, diag_scheme()), ValidationError);
  }
}

TEST_CASE("concavity checks") {
  const BellmanProblem p = two_kernel();
  const auto q = QuadratureScheme::for_grid(kH);
  const ScalarField& u = solved().field;
  SUBCASE("v = u") {
    const ConcavityReport r = concavity_checks(p, u, u, q, 1e-8, {});
    CHECK(r.average_ok);
  }
  SUBCASE("solutions with different exterior data") {
    BellmanProblem other = p;
    other.exterior = ExteriorClosure::bump(0.5, 1.4);
    const Solution t = solve_dirichlet(other, q, 1e-8);
    const ConcavityReport r = concavity_checks(p, u, t.field, q, 1e-8, {});
    CHECK(r.min_average_residual >= -2e-8);
  }
  SUBCASE("mollified solutions") {
    const ConcavityReport r = concavity_checks(p, u, u, q, 1e-8, {kH, 2 * kH, 4 * kH});
    REQUIRE(r.mollified.size() == 3);
    for (const auto& m : r.mollified) CHECK(m.ok);
  }
  SUBCASE("discrete delta is the identity") {
    const ScalarField m = mollify(u, 0.5 * kH);
    for (std::size_t k = 0; k < u.values().size(); ++k) CHECK(m.values()[k] == u.values()[k]);
  }
}

TEST_CASE("diagnose and sweep") {
  const BellmanProblem p = two_kernel();
  const RegularityReport rep = diagnose(p, solved().field, diag_scheme());
  CHECK(rep.max_A_over_sup > 0.0);
  for (const auto& d : rep.points) {
    CHECK(d.A >= 0.0);
    CHECK(d.P >= 0.0);
    CHECK(d.N >= 0.0);
  }
  CHECK(rep.decay.radii.size() == 5);

  const nlohmann::json tmpl = {{"sigma", 1.5},
                               {"grid", {{"dimension", 1}, {"h", kH}, {"box_radius", 2.0}}},
                               {"kernels", {p.kernels[0].descriptor(), p.kernels[1].descriptor()}},
                               {"offsets", {0.0, 1.0}},
                               {"exterior", p.exterior.to_json()}};
  const SweepReport sw = sigma_sweep(tmpl, {1.5}, nlohmann::json::object(), {{"interpolation_order", 3}}, 1e-8);
  REQUIRE(sw.rows.size() == 1);
  CHECK(sw.rows[0].ok);
  CHECK(sw.rows[0].max_A_over_sup == rep.max_A_over_sup);
  CHECK(sw.rows[0].C_emp == rep.pn.C_emp);
  CHECK_THROWS_AS(sigma_sweep(tmpl, {1.0}, {}, {}, 1e-8), ValidationError);
}

}
