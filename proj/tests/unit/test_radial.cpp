#include <catch_amalgamated.hpp>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <cmath>
#include <numbers>

#include "seqgeom/radial.hpp"
#include "seqgeom/special_functions.hpp"

using namespace seqgeom;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Poisson mixture of central chi-square CDFs.
double noncentral_chi2_cdf_series(int m, double lambda, double x) {
  double sum = 0.0;
  double w = std::exp(-0.5 * lambda);
  for (int j = 0; j < 400; ++j) {
    sum += w * chi2_cdf(m + 2 * j, x);
    w *= 0.5 * lambda / (j + 1);
    if (j > 0.5 * lambda + 20 && w < 1e-18) break;
  }
  return sum;
}

}  // namespace

TEST_CASE("A kernel closed forms", "[radial]") {
  for (double r : {0.0, 0.7, 3.0}) {
    CHECK_THAT(a_kernel({2, 0, 0.0, r}), WithinRel(std::numbers::pi, 1e-13));
    CHECK_THAT(a_kernel({2, 1, 0.0, r}), WithinAbs(0.0, 1e-13));
  }
  CHECK_THAT(a_kernel({3, 0, 1.0, 1.0}), WithinRel(std::exp(1.0) - std::exp(-1.0), 1e-12));
  CHECK_THAT(a_kernel({3, 0, 1.0, 1.0}), WithinAbs(2.3504, 1e-4));
  // m = 2: pi I_0(sr) and pi I_1(sr).
  CHECK_THAT(a_kernel({2, 0, 2.0, 1.5}), WithinRel(std::numbers::pi * bessel_i(0, 3.0), 1e-11));
  CHECK_THAT(a_kernel({2, 1, 2.0, 1.5}), WithinRel(std::numbers::pi * bessel_i(1, 3.0), 1e-11));
}

TEST_CASE("Z kernel at s = 0 is the chi(2) density", "[radial]") {
  for (double r : {0.1, 1.0, 2.5, 6.0}) {
    CHECK_THAT(z_kernel({2, 0, 0.0, r}), WithinRel(r * std::exp(-0.5 * r * r), 1e-12));
  }
}

TEST_CASE("Z kernel does not overflow for large s r", "[radial]") {
  const double z = z_kernel({2, 0, 40.0, 40.0});
  CHECK(std::isfinite(z));
  CHECK(z > 0.0);
  const double scale = 1.0 / std::sqrt(2.0 * std::numbers::pi * 1600.0);
  CHECK_THAT(z, WithinRel(40.0 * scale, 2e-3));
}

TEST_CASE("argument validation", "[radial]") {
  CHECK_THROWS_AS(a_kernel({1, 0, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(a_kernel({2, 4, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(a_kernel({2, 0, -1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(z_kernel({2, 0, 1.0, -0.5}), std::invalid_argument);
}

TEST_CASE("radial density normalizes to one", "[radial]") {
  for (int m = 2; m <= 5; ++m) {
    for (double s : {0.0, 1.0, 3.0, 5.0}) {
      const double total = integrate_z(m, 0, s, 0.0, radial_truncation(m, s));
      CHECK_THAT(total, WithinAbs(1.0, 1e-6));
    }
  }
}

TEST_CASE("truncated radial mass matches the noncentral chi-square CDF", "[radial]") {
  for (int m = 2; m <= 5; ++m) {
    const double c0 = std::sqrt(chi2_quantile(m, 0.05));
    for (double s : {0.0, 0.5, 1.0, 2.0, 3.0, 5.0}) {
      const double mass = integrate_z(m, 0, s, 0.0, c0);
      CHECK_THAT(mass, WithinAbs(noncentral_chi2_cdf_series(m, s * s, c0 * c0), 1e-6));
      if (s > 0.0) {
        const boost::math::non_central_chi_squared dist(m, s * s);
        CHECK_THAT(mass, WithinAbs(boost::math::cdf(dist, c0 * c0), 1e-6));
      }
    }
  }
  const double c = 1.7;
  CHECK_THAT(integrate_z(2, 0, 0.0, 0.0, c), WithinAbs(1.0 - std::exp(-0.5 * c * c), 1e-12));
}
