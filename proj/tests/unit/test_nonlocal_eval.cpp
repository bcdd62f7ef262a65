#include <doctest.h>

#include <cmath>
#include <random>

#include "nlbellman/errors.hpp"
#include "nlbellman/nonlocal_eval.hpp"

using namespace nlb;

namespace {

// s(1) for n = 1, σ = 1.5: 4(2−σ)π / (2Γ(1+σ) sin(πσ/2)), cross-checked by an
// independent high-precision quadrature.
constexpr double kS1 = 3.342171032841334;
// (2−σ)∫ δu(0,y)/|y|^{1+σ} dy for u = |x|²η(|x|) at σ = 1.999.
constexpr double kQuadBump1999 = 3.998817124730083;

ScalarField random_field(std::mt19937_64& rng, const Grid& g) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(g.size());
  for (auto& x : v) x = d(rng);
  return ScalarField(g, v, ExteriorClosure::constant(0.3 * d(rng)));
}

}  // namespace

TEST_SUITE("nonlocal_eval") {

TEST_CASE("second differences") {
  const Grid g(1, 1.0 / 64.0, 2.0);
  const auto q = ScalarField::sampled(g, [](const Point& z) { return z[0] * z[0]; }, ExteriorClosure::constant(0.0));
  CHECK(second_difference(q, {0.1, 0.0}, {0.3, 0.0}, 3) == doctest::Approx(0.18).epsilon(1e-12));
  const auto a = ScalarField::sampled(g, [](const Point& z) { return 0.3 - 2.0 * z[0]; }, ExteriorClosure::constant(0.0));
  CHECK(std::abs(second_difference(a, {0.2, 0.0}, {0.7, 0.0})) < 1e-14);
  std::mt19937_64 rng(3);
  const auto r = random_field(rng, g);
  for (int i = 0; i < 100; ++i) {
    const double d = second_difference(r, {-1.0 + 0.02 * i, 0.0}, {0.37 * i, 0.0});
    CHECK(std::abs(d) <= 4.0 * r.sup_norm());
  }
}

TEST_CASE("constant fields give zero") {
  const Grid g(2, 1.0 / 16.0, 2.0);
  const auto u = ScalarField::from_closure(g, ExteriorClosure::constant(0.7));
  const auto q = QuadratureScheme::for_grid(1.0 / 16.0);
  const auto r = evaluate_linear(make_power_kernel(1.5, 2), u, {0.25, -0.5}, q);
  // Interpolation weights sum to one only up to rounding.
  CHECK(std::abs(r.value) <= 1e-12);
  CHECK(r.error() <= 1e-12);
  for (auto s : {PucciSign::Plus, PucciSign::Minus})
    CHECK(std::abs(evaluate_pucci(u, {0.0, 0.0}, {1.0, 2.0}, 1.5, s, q).value) <= 1e-12);
  CHECK(std::abs(fractional_laplacian(u, {0.5, 0.5}, 1.2, q).value) <= 1e-12);
}

TEST_CASE("cosine oracle") {
  const double h = 1.0 / 64.0;
  const Grid g(1, h, 2.0);
  const auto u = ScalarField::from_closure(g, ExteriorClosure::cosine(1.0, {1.0, 0.0}));
  const auto q = QuadratureScheme::for_grid(h);
  const auto r = evaluate_linear(make_power_kernel(1.5, 1), u, {0.0, 0.0}, q);
  CHECK(std::abs(r.value + kS1) <= r.error());
  CHECK(r.value == doctest::Approx(-kS1).epsilon(1e-3));
  const auto f = fractional_laplacian(u, {0.5, 0.0}, 1.5, q);
  CHECK(std::abs(f.value + kS1 * std::cos(0.5)) <= f.error());
}

TEST_CASE("second-order limit of x^2 bump") {
  const double h = 1.0 / 64.0;
  const Grid g(1, h, 2.0);
  const auto u = ScalarField::from_closure(g, ExteriorClosure::quadratic_bump(1.0, 1.0));
  const auto r = fractional_laplacian(u, {0.0, 0.0}, 1.999, QuadratureScheme::for_grid(h));
  CHECK(std::abs(r.value - kQuadBump1999) <= r.error());
  CHECK(std::abs(r.value - 4.0) <= 0.02 * 4.0);
}

TEST_CASE("error honesty under refinement") {
  const Grid g(1, 1.0 / 128.0, 2.0);
  const Kernel K = make_power_kernel(1.5, 1);
  for (const auto& c : {ExteriorClosure::cosine(1.0, {2.0, 0.0}), ExteriorClosure::quadratic_bump(1.0, 1.0),
                        ExteriorClosure::bump(1.0, 0.8)}) {
    const auto u = ScalarField::from_closure(g, c);
    QuadratureScheme coarse = QuadratureScheme::for_grid(1.0 / 128.0);
    QuadratureScheme fine = coarse;
    fine.inner_radius /= 2.0;
    fine.radial_nodes_per_decade *= 2;
    for (double x : {0.0, 0.3, -0.55}) {
      const auto a = evaluate_linear(K, u, {x, 0.0}, coarse);
      const auto b = evaluate_linear(K, u, {x, 0.0}, fine);
      CHECK(std::abs(a.value - b.value) <= a.error() + b.error());
    }
  }
}

TEST_CASE("Pucci sandwich is exact on shared nodes") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  const double h = 1.0 / 16.0;
  const Grid g(1, h, 2.0);
  const auto layout = std::make_shared<const QuadratureLayout>(QuadratureScheme::for_grid(h), 1);
  const PucciOperator P({1.0, 2.0}, 1.5, layout);
  std::vector<LinearOperator> ops;
  for (int k = 0; k < 20; ++k) {
    RadialModulation m;
    m.inner = 1.0 + d(rng);
    m.outer = 1.0 + d(rng);
    m.radius = 0.05 + d(rng);
    ops.emplace_back(make_radial_kernel(1.5, 1, m, {1.0, 2.0}), layout);
  }
  ops.emplace_back(make_power_kernel(1.5, 1), layout);
  for (int f = 0; f < 5; ++f) {
    const auto u = random_field(rng, g);
    for (int i = -15; i <= 15; ++i) {
      const auto s = gather_samples(u, {i * h, 0.0}, *layout);
      const double lo = P(s, PucciSign::Minus).value, hi = P(s, PucciSign::Plus).value;
      for (const auto& op : ops) {
        const double l = op(s).value;
        CHECK(lo <= l);
        CHECK(l <= hi);
      }
    }
  }
}

TEST_CASE("Pucci on a nonnegative second difference") {
  // u = |x|² near 0 with δu(0, y) ≥ 0 everywhere: M⁺ = 2 M⁻ for (λ, Λ) = (1, 2).
  const double h = 1.0 / 32.0;
  const Grid g(1, h, 2.0);
  const auto u = ScalarField::from_closure(g, ExteriorClosure::quadratic_bump(1.0, 8.0));
  const auto q = QuadratureScheme::for_grid(h);
  const double lo = evaluate_pucci(u, {0.0, 0.0}, {1.0, 2.0}, 1.5, PucciSign::Minus, q).value;
  const double hi = evaluate_pucci(u, {0.0, 0.0}, {1.0, 2.0}, 1.5, PucciSign::Plus, q).value;
  const double iso = fractional_laplacian(u, {0.0, 0.0}, 1.5, q).value;
  CHECK(lo > 0.0);
  CHECK(lo == doctest::Approx(iso).epsilon(1e-13));
  CHECK(hi == doctest::Approx(2.0 * lo).epsilon(1e-13));
}

TEST_CASE("linearity and monotonicity") {
  std::mt19937_64 rng(5);
  const double h = 1.0 / 32.0;
  const Grid g(1, h, 2.0);
  const LinearOperator L(make_power_kernel(1.3, 1), QuadratureScheme::for_grid(h));
  const auto u = random_field(rng, g), v = random_field(rng, g);
  const auto w = u.combined(2.0, v, -0.5);
  for (int i = -20; i <= 20; ++i) {
    const Point x{i * h, 0.0};
    const double lin = 2.0 * L(u, x).value - 0.5 * L(v, x).value;
    CHECK(L(w, x).value == doctest::Approx(lin).epsilon(1e-12).scale(100.0));
  }
  // u ≤ v with equality at x: L u(x) ≤ L v(x).
  std::vector<double> a(u.values().begin(), u.values().end()), b = a;
  std::uniform_real_distribution<double> d(0.0, 1.0);
  const std::size_t center = g.index(g.nodes_per_axis() / 2);
  for (std::size_t k = 0; k < b.size(); ++k)
    if (k != center) b[k] += d(rng);
  const ScalarField lo(g, a, ExteriorClosure::constant(0.0)), hi(g, b, ExteriorClosure::constant(0.5));
  CHECK(L(lo, {0.0, 0.0}).value <= L(hi, {0.0, 0.0}).value);
}

TEST_CASE("Bellman evaluation") {
  const double h = 1.0 / 32.0;
  const Grid g(1, h, 2.0);
  const auto q = QuadratureScheme::for_grid(h);
  const auto u = ScalarField::from_closure(g, ExteriorClosure::cosine(1.0, {1.0, 0.0}));
  const Kernel K = make_power_kernel(1.5, 1);
  SUBCASE("single kernel") {
    BellmanProblem p{{K}, {0.25}, ExteriorClosure::constant(0.0), g};
    const auto r = evaluate_bellman(p, u, {0.1, 0.0}, q);
    CHECK(r.value == doctest::Approx(evaluate_linear(K, u, {0.1, 0.0}, q).value + 0.25).epsilon(1e-14));
    CHECK(r.argmin == 0);
  }
  SUBCASE("least index attains the minimum") {
    // L₁u(0) = 0.4 and L₂u(0) = −0.2 by scaling the cosine field.
    const double s = evaluate_linear(K, u, {0.0, 0.0}, q).value;
    const auto u1 = ScalarField::from_closure(g, ExteriorClosure::cosine(0.4 / s, {1.0, 0.0}));
    BellmanProblem p{{K, K}, {0.0, -0.6}, ExteriorClosure::constant(0.0), g};
    const auto r = evaluate_bellman(p, u1, {0.0, 0.0}, q);
    CHECK(r.values[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(r.value == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(r.argmin == 1);
    BellmanProblem tie{{K, K}, {0.0, 0.0}, ExteriorClosure::constant(0.0), g};
    CHECK(evaluate_bellman(tie, u1, {0.0, 0.0}, q).argmin == 0);
  }
  SUBCASE("I(-u) <= -I(u)") {
    RadialModulation m;
    m.inner = 2.0;
    const Kernel K2 = make_radial_kernel(1.5, 1, m, {1.0, 2.0});
    BellmanProblem p{{K, K2}, {0.0, 0.0}, ExteriorClosure::constant(0.0), g};
    std::mt19937_64 rng(9);
    const auto r = random_field(rng, g);
    const auto neg = r.combined(-1.0, r, 0.0);
    for (int i = -10; i <= 10; ++i)
      CHECK(evaluate_bellman(p, neg, {i * 0.05, 0.0}, q).value <=
            -evaluate_bellman(p, r, {i * 0.05, 0.0}, q).value + 1e-12);
  }
}

TEST_CASE("concavity of the Bellman operator on random pairs") {
  std::mt19937_64 rng(21);
  const double h = 1.0 / 32.0;
  const Grid g(1, h, 2.0);
  RadialModulation a, b;
  a.inner = 2.0;
  b.outer = 2.0;
  BellmanProblem p{{make_power_kernel(1.5, 1), make_radial_kernel(1.5, 1, a, {1.0, 2.0}),
                    make_radial_kernel(1.5, 1, b, {1.0, 2.0})},
                   {0.0, 0.3, -0.2},
                   ExteriorClosure::constant(0.0),
                   g};
  const auto q = QuadratureScheme::for_grid(h);
  for (int pair = 0; pair < 3; ++pair) {
    const auto u = random_field(rng, g), v = random_field(rng, g);
    const auto w = u.combined(0.5, v, 0.5);
    for (int i = -31; i <= 31; ++i) {
      const Point x{i * h, 0.0};
      const double lhs = evaluate_bellman(p, w, x, q).value;
      const double rhs = 0.5 * (evaluate_bellman(p, u, x, q).value + evaluate_bellman(p, v, x, q).value);
      CHECK(lhs >= rhs - 1e-10);
    }
  }
}

TEST_CASE("scaling identity") {
  // u_r(x) = u(r x) satisfies (Lu_r)(x) = r^σ (Lu)(r x) for the power kernel.
  const double h = 1.0 / 128.0, r = 2.0, sigma = 1.5;
  const Grid g(1, h, 2.0);
  const auto u = ScalarField::from_closure(g, ExteriorClosure::cosine(1.0, {1.0, 0.0}));
  const auto ur = ScalarField::from_closure(g, ExteriorClosure::cosine(1.0, {r, 0.0}));
  const auto q = QuadratureScheme::for_grid(h);
  const auto a = fractional_laplacian(ur, {0.1, 0.0}, sigma, q);
  const auto b = fractional_laplacian(u, {0.2, 0.0}, sigma, q);
  CHECK(std::abs(a.value - std::pow(r, sigma) * b.value) <= a.error() + std::pow(r, sigma) * b.error());
}

TEST_CASE("tail bound") {
  CHECK(tail_bound(0.0, 2.0, 1.5, 1.0, 1) == 0.0);
  CHECK(tail_bound(1.0, 2.0, 1.5, 1.0, 1) == doctest::Approx(0.9428090415820634).epsilon(1e-14));
  const double a = tail_bound(1.0, 3.0, 1.3, 2.0, 2), b = tail_bound(1.0, 6.0, 1.3, 2.0, 2);
  CHECK(a / b == doctest::Approx(std::pow(2.0, 1.3)).epsilon(1e-14));

  const Grid g(1, 1.0 / 32.0, 2.0);
  std::mt19937_64 rng(1);
  const auto u = random_field(rng, g);
  const auto q = QuadratureScheme::for_grid(1.0 / 32.0);
  const auto r = evaluate_linear(make_power_kernel(1.5, 1), u, {0.3, 0.0}, q);
  CHECK(r.tail_error >= 0.0);
  CHECK(r.inner_error >= 0.0);
  CHECK(r.tail_error <= tail_bound(u.sup_norm(), q.outer_radius, 1.5, 1.0, 1));
}

TEST_CASE("points outside the box are rejected") {
  const Grid g(1, 1.0 / 32.0, 2.0);
  const auto u = ScalarField::from_closure(g, ExteriorClosure::constant(0.0));
  CHECK_THROWS_AS(fractional_laplacian(u, {2.5, 0.0}, 1.5, QuadratureScheme::for_grid(1.0 / 32.0)),
                  ConfigurationError);
  CHECK_THROWS_AS(fractional_laplacian(u, {0.0, 0.0}, 1.5, QuadratureScheme::for_grid(1.0 / 16.0)),
                  ValidationError);
}

}
