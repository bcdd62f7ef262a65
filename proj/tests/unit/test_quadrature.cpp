#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlbellman/errors.hpp"
#include "nlbellman/quadrature.hpp"

using namespace nlb;

TEST_SUITE("quadrature") {

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2k-1 exactly") {
  for (int k : {1, 2, 4, 8, 16}) {
    const GaussRule& g = gauss_legendre(k);
    REQUIRE(g.nodes.size() == static_cast<std::size_t>(k));
    for (int p = 0; p < 2 * k; ++p) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += g.weights[i] * std::pow(g.nodes[i], p);
      CHECK(s == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("scheme validation") {
  QuadratureScheme q;
  CHECK_NOTHROW(q.validate());
  q.inner_radius = 0.0;
  CHECK_THROWS_AS(q.validate(), ValidationError);
  q = QuadratureScheme::for_grid(1.0 / 64.0);
  CHECK_NOTHROW(q.validate_for_grid(1.0 / 64.0));
  CHECK_THROWS_AS(q.validate_for_grid(1.0 / 128.0), ValidationError);
  q.interpolation_order = 2;
  CHECK_THROWS_AS(q.validate(), ValidationError);
}

TEST_CASE("from_json names unknown fields") {
  try {
    QuadratureScheme::from_json({{"radial_nodes", 3}}, 1.0 / 64.0);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "quadrature.radial_nodes");
  }
  const QuadratureScheme q = QuadratureScheme::from_json({{"interpolation_order", 3}}, 1.0 / 32.0);
  CHECK(q.interpolation_order == 3);
  CHECK(q.inner_radius == 1.0 / 32.0);
  const QuadratureScheme back = QuadratureScheme::from_json(q.to_json(), 1.0 / 32.0);
  CHECK(back.to_json() == q.to_json());
}

TEST_CASE("layout weights") {
  const QuadratureScheme q = QuadratureScheme::for_grid(1.0 / 32.0);
  SUBCASE("1D ring integrates r^-1 exactly over [r0, R]") {
    const QuadratureLayout L(q, 1);
    double s = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < L.radial_count(); ++i) {
      CHECK(L.radial_weight(i) > 0.0);
      s += L.radial_weight(i) / L.radius(i);
      wsum += L.radial_weight(i);
    }
    CHECK(wsum == doctest::Approx(q.outer_radius - q.inner_radius).epsilon(1e-13));
    CHECK(s == doctest::Approx(std::log(q.outer_radius / q.inner_radius)).epsilon(1e-8));
    CHECK(L.max_panel_width() <= 2.0 / 32.0 + 1e-15);
  }
  SUBCASE("2D direction weights cover half the circle") {
    const QuadratureLayout L(q, 2);
    double s = 0.0;
    for (std::size_t k = 0; k < L.direction_count(); ++k) s += L.direction_weight(k);
    CHECK(s == doctest::Approx(std::numbers::pi).epsilon(1e-14));
    CHECK(L.direction_count() == static_cast<std::size_t>(q.angular_nodes / 2));
  }
  SUBCASE("breakpoints are panel edges") {
    const QuadratureLayout L(q, 1);
    double below = 0.0;
    for (std::size_t i = 0; i < L.radial_count(); ++i)
      if (L.radius(i) < 0.5) below += L.radial_weight(i);
    CHECK(below == doctest::Approx(0.5 - q.inner_radius).epsilon(1e-13));
  }
}

TEST_CASE("tabulated power kernel matches the closed form") {
  const QuadratureScheme q = QuadratureScheme::for_grid(1.0 / 32.0);
  const QuadratureLayout L(q, 1);
  const KernelTable t = tabulate(make_power_kernel(1.5, 1), L);
  const KernelTable p = tabulate_power(0.5, 1.5, L);
  REQUIRE(t.ring.size() == p.ring.size());
  for (std::size_t i = 0; i < t.ring.size(); ++i) CHECK(t.ring[i] == p.ring[i]);
  // Paired density 2·0.5·r^{-2.5}: core moment ∫₀^{r₀} r² of it is 2√r₀,
  // the tail on both sides is 2·0.5·R^{-1.5}/1.5.
  CHECK(t.core[0] == doctest::Approx(2.0 * std::sqrt(q.inner_radius)).epsilon(1e-12));
  CHECK(t.tail == doctest::Approx(0.5 * 2.0 * std::pow(q.outer_radius, -1.5) / 1.5).epsilon(1e-12));
}

TEST_CASE("negative density is rejected") {
  const QuadratureLayout L(QuadratureScheme::for_grid(1.0 / 32.0), 1);
  const Kernel bad = make_custom_kernel(1.5, 1, {1, 1}, SmoothnessClass::L0,
                                        [](const Point& y) { return norm(y) > 1.0 ? -1.0 : 1.0; });
  CHECK_THROWS_AS(tabulate(bad, L), KernelEvaluationError);
}

}
