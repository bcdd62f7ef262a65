#include <doctest.h>

#include <cmath>
#include <random>

#include "nlbellman/errors.hpp"
#include "nlbellman/field.hpp"

using namespace nlb;

TEST_SUITE("field") {

TEST_CASE("grid contract") {
  CHECK_THROWS_AS(Grid(1, 1.0 / 64.0, 1.5), ValidationError);
  CHECK_THROWS_AS(Grid(1, 0.3, 2.0), ValidationError);
  CHECK_THROWS_AS(Grid(3, 0.25, 2.0), ValidationError);
  const Grid g(2, 0.25, 2.0);
  CHECK(g.nodes_per_axis() == 17);
  CHECK(g.size() == 289u);
  CHECK(g.coordinate(g.index(8, 8)) == Point{0.0, 0.0});
  CHECK(g.node_at({0.5, -0.25}).has_value());
  CHECK_FALSE(g.node_at({0.1, 0.0}).has_value());
}

TEST_CASE("sup_norm covers nodes and closure") {
  const Grid g(1, 0.25, 2.0);
  std::vector<double> v(g.size(), 0.0);
  v[3] = -0.7;
  const ScalarField u(g, v, ExteriorClosure::cosine(0.2, {1.0, 0.0}, 0.1));
  CHECK(u.sup_norm() == doctest::Approx(0.7));
  const ScalarField w(g, std::vector<double>(g.size(), 0.0), ExteriorClosure::constant(-2.0));
  CHECK(w.sup_norm() == 2.0);
}

TEST_CASE("interpolation reproduces polynomials of its order") {
  const Grid g(2, 1.0 / 16.0, 2.0);
  const auto lin = ScalarField::sampled(g, [](const Point& z) { return 1.0 + 2.0 * z[0] - z[1]; },
                                        ExteriorClosure::constant(0.0));
  const auto cub = ScalarField::sampled(
      g, [](const Point& z) { return z[0] * z[0] * z[0] - 2.0 * z[0] * z[1] * z[1] + z[1]; },
      ExteriorClosure::constant(0.0));
  for (const Point z : {Point{0.013, -0.41}, Point{-1.3, 0.77}, Point{1.99, -1.99}}) {
    CHECK(lin.sample(z, 1) == doctest::Approx(1.0 + 2.0 * z[0] - z[1]).epsilon(1e-13));
    const double exact = z[0] * z[0] * z[0] - 2.0 * z[0] * z[1] * z[1] + z[1];
    CHECK(cub.sample(z, 3) == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("linear interpolation is monotone") {
  const Grid g(1, 1.0 / 16.0, 2.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> a(g.size()), b(g.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = d(rng);
    b[k] = a[k] + d(rng);
  }
  const ScalarField u(g, a, ExteriorClosure::constant(0.0));
  const ScalarField v(g, b, ExteriorClosure::constant(0.0));
  for (int i = 0; i < 500; ++i) {
    const Point z{-2.0 + 4.0 * d(rng), 0.0};
    CHECK(u.sample(z) <= v.sample(z));
  }
}

TEST_CASE("interpolation error estimate bounds the true error") {
  const Grid g(1, 1.0 / 32.0, 2.0);
  auto f = [](const Point& z) { return std::sin(3.0 * z[0]); };
  const auto u = ScalarField::sampled(g, f, ExteriorClosure::constant(0.0));
  for (int i = 0; i < 200; ++i) {
    const Point z{-1.9 + 0.0191 * i, 0.0};
    for (int order : {1, 3}) CHECK(std::abs(u.sample(z, order) - f(z)) <= u.interpolation_error(z, order) + 1e-15);
  }
}

TEST_CASE("closure outside the box and in the exterior region") {
  const Grid g(1, 0.25, 2.0);
  const ExteriorClosure c = ExteriorClosure::hat(1.0, 0.5);
  const auto u = ScalarField::sampled(g, [](const Point&) { return 5.0; }, c);
  CHECK(u.sample({3.0, 0.0}) == c({3.0, 0.0}));
  CHECK(u.sample({1.1, 0.0}) == 5.0);
  const auto v = ScalarField::from_closure(g, c).with_exterior_region(1.0);
  CHECK(v.sample({1.1, 0.0}) == c({1.1, 0.0}));
  CHECK(v.interpolation_error({1.1, 0.0}) == 0.0);
}

TEST_CASE("closure descriptors round-trip") {
  for (const auto& c : {ExteriorClosure::constant(0.25), ExteriorClosure::cosine(0.5, {1.0, 2.0}, 0.1),
                        ExteriorClosure::quadratic_bump(1.0, 0.75), ExteriorClosure::bump(2.0, 0.5, -1.0),
                        ExteriorClosure::hat(1.0, 0.5),
                        ExteriorClosure::hat(1.0, 0.5).combined(2.0, ExteriorClosure::cosine(1.0, {1.0, 0.0}), 0.5)}) {
    const auto back = ExteriorClosure::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    for (double x : {-3.0, -0.4, 0.0, 1.7}) CHECK(back({x, 0.3}) == c({x, 0.3}));
  }
  CHECK_THROWS_AS(ExteriorClosure::from_json({{"kind", "spline"}}), ValidationError);
}

TEST_CASE("cutoff") {
  CHECK(cutoff(0.0) == 1.0);
  CHECK(cutoff(0.5) == 1.0);
  CHECK(cutoff(0.75) == doctest::Approx(0.5));
  CHECK(cutoff(1.0) == 0.0);
  for (int i = 0; i < 100; ++i) CHECK(cutoff(0.5 + 0.005 * i) >= cutoff(0.5 + 0.005 * (i + 1)));
}

}
