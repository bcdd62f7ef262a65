#include <doctest.h>

#include <cmath>

#include "nlbellman/errors.hpp"
#include "nlbellman/kernel.hpp"

using namespace nlb;

TEST_SUITE("kernel") {

TEST_CASE("power kernel values") {
  const Kernel k = make_power_kernel(1.5, 1);
  CHECK(k.density({1.0, 0.0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(k.density({2.0, 0.0}) == doctest::Approx(0.5 / std::pow(2.0, 2.5)).epsilon(1e-14));
  CHECK(k.density({2.0, 0.0}) == doctest::Approx(0.0883883).epsilon(1e-6));
  const Kernel k2 = make_power_kernel(1.99, 2);
  CHECK(k2.density({1.0, 0.0}) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("power kernel rejects bad orders") {
  CHECK_THROWS_AS(make_power_kernel(0.0, 1), ValidationError);
  CHECK_THROWS_AS(make_power_kernel(2.0, 1), ValidationError);
  CHECK_THROWS_AS(make_power_kernel(1.5, 3), ValidationError);
}

TEST_CASE("evenness and ellipticity bounds on samples") {
  const Kernel k = make_anisotropic_kernel(1.5, 2, AngularProfile::cos_squared(1.0, 0.5), {1.0, 1.5});
  for (int i = 1; i <= 50; ++i) {
    const double r = std::exp(-4.0 + 0.16 * i);
    const double t = 0.37 * i;
    const Point y{r * std::cos(t), r * std::sin(t)};
    CHECK(k.density(y) == k.density(-y));
    const double base = 0.5 * std::pow(r, -3.5);
    CHECK(k.density(y) >= base * (1.0 - 1e-14));
    CHECK(k.density(y) <= 1.5 * base * (1.0 + 1e-14));
  }
}

TEST_CASE("constant profile matches the power kernel") {
  const Kernel a = make_anisotropic_kernel(1.3, 2, AngularProfile{}, {1.0, 1.0});
  const Kernel p = make_power_kernel(1.3, 2);
  for (double r : {0.01, 0.3, 1.0, 7.0})
    for (double t : {0.0, 0.4, 2.0}) {
      const Point y{r * std::cos(t), r * std::sin(t)};
      CHECK(a.density(y) == doctest::Approx(p.density(y)).epsilon(1e-14));
    }
}

TEST_CASE("anisotropic profile at theta = 0") {
  const Kernel k = make_anisotropic_kernel(1.5, 2, AngularProfile::cos_squared(1.0, 0.5), {1.0, 1.5});
  CHECK(k.density({1.0, 0.0}) == doctest::Approx(0.5 * 1.5).epsilon(1e-14));
}

TEST_CASE("profile outside the bounds is rejected") {
  CHECK_THROWS_AS(make_anisotropic_kernel(1.5, 2, AngularProfile::cos_squared(1.0, 1.0), {1.0, 1.5}),
                  ValidationError);
  RadialModulation m;
  m.inner = 0.5;
  CHECK_THROWS_AS(make_radial_kernel(1.5, 1, m, {1.0, 2.0}), ValidationError);
}

TEST_CASE("classification") {
  SUBCASE("power kernel is L2") {
    const ClassReport r = classify_kernel(make_power_kernel(1.5, 1), 1000);
    CHECK(r.is_L0);
    CHECK(r.is_L1);
    CHECK(r.is_L2);
    CHECK(r.even);
  }
  SUBCASE("anisotropic kernel is L0 with empirical bounds inside [1, 1.5]") {
    const Kernel k = make_anisotropic_kernel(1.5, 2, AngularProfile::cos_squared(1.0, 0.5), {1.0, 1.5});
    const ClassReport r = classify_kernel(k, 1000);
    CHECK(r.is_L0);
    CHECK(r.lambda_emp >= 1.0 - 1e-12);
    CHECK(r.Lambda_emp <= 1.5 + 1e-12);
  }
  SUBCASE("odd perturbation breaks evenness") {
    const Kernel k = make_custom_kernel(1.5, 1, {0.5, 1.5}, SmoothnessClass::L0, [](const Point& y) {
      return 0.5 * (1.0 + 0.5 * (y[0] > 0 ? 1.0 : -1.0)) * std::pow(norm(y), -2.5);
    });
    const ClassReport r = classify_kernel(k, 500);
    CHECK_FALSE(r.even);
    CHECK_FALSE(r.is_L0);
  }
  SUBCASE("oscillation at the origin is L0 but not L1") {
    const Kernel k = make_custom_kernel(1.5, 1, {0.6, 1.4}, SmoothnessClass::L0, [](const Point& y) {
      const double r = norm(y);
      return 0.5 * (1.0 + 0.4 * std::sin(1.0 / r)) * std::pow(r, -2.5);
    });
    const ClassReport r = classify_kernel(k, 2000);
    CHECK(r.is_L0);
    CHECK_FALSE(r.is_L1);
  }
}

TEST_CASE("regularized kernel") {
  const Kernel base = make_anisotropic_kernel(1.5, 2, AngularProfile::cos_squared(1.0, 0.5), {1.0, 1.5});
  const double eps = 0.25;
  const Kernel k = regularize_kernel(base, eps, 1.0);
  SUBCASE("unchanged outside B_eps") {
    for (double r : {0.25, 0.3, 1.0, 5.0}) {
      const Point y{r * std::cos(0.7), r * std::sin(0.7)};
      CHECK(k.density(y) == doctest::Approx(base.density(y)).epsilon(1e-14));
    }
  }
  SUBCASE("power law with lambda inside B_eps/2") {
    for (double r : {0.001, 0.05, 0.125}) {
      const Point y{r * std::cos(0.7), r * std::sin(0.7)};
      CHECK(k.density(y) == doctest::Approx(0.5 * std::pow(r, -3.5)).epsilon(1e-14));
    }
  }
  SUBCASE("smooth input stays L2") {
    const ClassReport r = classify_kernel(regularize_kernel(make_power_kernel(1.5, 1), 0.25, 1.0), 1000);
    CHECK(r.is_L2);
  }
  SUBCASE("blend stays inside the bounds") {
    RadialModulation m;
    m.inner = 2.0;
    m.outer = 2.0;
    const Kernel hi = regularize_kernel(make_radial_kernel(1.5, 1, m, {1.0, 2.0}), 0.5, 1.0);
    for (int i = 0; i < 200; ++i) {
      const double r = 0.2 + 0.0015 * i;
      const double c = hi.coefficient(r, {1.0, 0.0});
      CHECK(c >= 0.5 * 1.0);
      CHECK(c <= 0.5 * 2.0);
    }
  }
}

TEST_CASE("symmetrization") {
  SUBCASE("even input is unchanged") {
    const Kernel p = make_power_kernel(1.5, 2);
    const Kernel s = symmetrize(p);
    for (double t : {0.0, 1.0, 2.5}) {
      const Point y{0.3 * std::cos(t), 0.3 * std::sin(t)};
      CHECK(s.density(y) == doctest::Approx(p.density(y)).epsilon(1e-15));
    }
  }
  SUBCASE("odd part cancels") {
    const Kernel k = make_custom_kernel(1.5, 1, {0.7, 1.3}, SmoothnessClass::L0, [](const Point& y) {
      return 0.5 * (1.0 + 0.3 * (y[0] > 0 ? 1.0 : -1.0)) * std::pow(norm(y), -2.5);
    });
    const Kernel s = symmetrize(k);
    for (double x : {0.1, 0.5, 2.0}) {
      CHECK(s.density({x, 0.0}) == doctest::Approx(0.5 * std::pow(x, -2.5)).epsilon(1e-14));
      CHECK(s.density({-x, 0.0}) == doctest::Approx(0.5 * std::pow(x, -2.5)).epsilon(1e-14));
    }
  }
}

TEST_CASE("descriptor round trip") {
  RadialModulation m;
  m.shape = RadialModulation::Shape::LogSine;
  m.mid = 1.5;
  m.amplitude = 0.25;
  m.frequency = 2.0;
  m.phase = 0.3;
  for (const Kernel& k : {make_power_kernel(1.4, 2),
                          make_anisotropic_kernel(1.5, 2, AngularProfile::cos_squared(1.0, 0.5), {1.0, 1.5}),
                          make_radial_kernel(1.5, 1, m, {1.0, 2.0}),
                          regularize_kernel(make_power_kernel(1.5, 1), 0.25, 1.0)}) {
    const Kernel back = kernel_from_json(k.descriptor());
    CHECK(back.descriptor() == k.descriptor());
    for (double r : {0.01, 0.2, 3.0}) CHECK(back.density({r, 0.0}) == k.density({r, 0.0}));
  }
  CHECK_THROWS_AS(kernel_from_json({{"type", "nope"}, {"sigma", 1.5}}), ValidationError);
  CHECK_THROWS_AS(make_custom_kernel(1.5, 1, {1, 1}, SmoothnessClass::L0,
                                     [](const Point&) { return 1.0; })
                      .descriptor(),
                  ValidationError);
}

}
