#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "seqgeom/quadrature.hpp"

using namespace seqgeom;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("simple integrals", "[gk15]") {
  CHECK_THAT(integrate([](double) { return 1.0; }, 0.0, std::numbers::pi).value,
             WithinRel(std::numbers::pi, 1e-15));
  const auto cubic = integrate([](double x) { return x * x * x; }, 0.0, 1.0);
  CHECK_THAT(cubic.value, WithinAbs(0.25, 1e-15));
  CHECK(cubic.subdivisions == 0);
  CHECK(cubic.evaluations == 15);
}

TEST_CASE("reversed and empty intervals", "[gk15]") {
  auto f = [](double x) { return std::exp(x); };
  CHECK_THROWS_AS(integrate(f, 1.0, 0.0), std::invalid_argument);
  CHECK(integrate(f, 2.0, 2.0).value == 0.0);
}

TEST_CASE("peaked and oscillatory integrands", "[gk15]") {
  const auto peak =
      integrate([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0, {1e-13, 1e-12, 400});
  CHECK_THAT(peak.value, WithinRel(2.0 * std::atan(1.0 / 1e-2) / 1e-2, 1e-11));
  CHECK(peak.subdivisions > 0);
  const auto osc = integrate([](double x) { return std::cos(50.0 * x); }, 0.0, 1.0);
  CHECK_THAT(osc.value, WithinAbs(std::sin(50.0) / 50.0, 1e-12));
  const auto sq = integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, {1e-14, 1e-12, 200});
  CHECK_THAT(sq.value, WithinAbs(2.0 / 3.0, 1e-12));
}

TEST_CASE("error estimate bounds the true error", "[gk15]") {
  const auto r = integrate([](double x) { return std::log(x); }, 0.0, 1.0, {1e-10, 1e-10, 100});
  CHECK(std::fabs(r.value + 1.0) <= std::max(r.abs_error, 1e-12));
}

TEST_CASE("budget exhaustion carries the best estimate", "[gk15]") {
  auto f = [](double x) { return std::sin(1.0 / x); };
  try {
    integrate(f, 1e-6, 1.0, {1e-15, 1e-15, 8});
    FAIL("expected QuadratureError");
  } catch (const QuadratureError& e) {
    CHECK(e.best().subdivisions == 8);
    CHECK(std::isfinite(e.best().value));
    CHECK(e.best().abs_error > 0.0);
  }
}

TEST_CASE("non-finite integrand is rejected", "[gk15]") {
  auto f = [](double x) { return x > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0; };
  CHECK_THROWS_AS(integrate(f, 0.0, 1.0), QuadratureError);
}

TEST_CASE("spec validation", "[gk15]") {
  auto f = [](double) { return 1.0; };
  CHECK_THROWS_AS(integrate(f, 0.0, 1.0, {0.0, 1e-10, 50}), std::invalid_argument);
  CHECK_THROWS_AS(integrate(f, 0.0, 1.0, {1e-10, -1.0, 50}), std::invalid_argument);
  CHECK_THROWS_AS(integrate(f, 0.0, 1.0, {1e-10, 1e-10, 7}), std::invalid_argument);
  CHECK_NOTHROW(QuadratureSpec{1e-10, 1e-10, 8}.validate());
}
