#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "seqgeom/sampling.hpp"

using namespace seqgeom;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double kPi = std::numbers::pi;

Vec v2(double a, double b) {
  Vec u(2);
  u << a, b;
  return u;
}

Mat minkowski(int n) {
  Mat J = -Mat::Identity(n, n);
  J(0, 0) = 1.0;
  return J;
}

// Asymptotic Kolmogorov survival function.
double ks_pvalue(double d, int n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    sum += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::clamp(sum, 0.0, 1.0);
}

template <class Cdf>
double ks_statistic(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, F - i / n, (i + 1) / n - F});
  }
  return d;
}

}  // namespace

TEST_CASE("colatitude inverse CDF endpoints", "[sampling]") {
  CHECK_THAT(pole_colatitude_vmf(0.7, 1.0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(pole_colatitude_vmf(0.7, 1e-300), WithinAbs(-1.0, 1e-12));
  CHECK_THAT(pole_colatitude_vmf(1e-12, 0.25), WithinAbs(-0.5, 1e-9));
  CHECK_THAT(pole_colatitude_vmf(800.0, 0.5), WithinAbs(1.0 + std::log(0.5) / 800.0, 1e-12));
  CHECK(pole_colatitude_hyperboloid(2.0, 1.0) == 1.0);
  CHECK_THAT(pole_colatitude_hyperboloid(2.0, std::exp(-1.0)), WithinRel(1.5, 1e-15));
}

TEST_CASE("frame transport", "[sampling]") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd;
  for (Model model : {Model::VonMisesFisher, Model::Hyperboloid}) {
    for (int m : {2, 3}) {
      const auto fam = CurvedFamily::make(model, m, 1.0);
      const Mat Q = model == Model::VonMisesFisher ? Mat::Identity(m + 1, m + 1) : minkowski(m + 1);
      CHECK((frame_transport(fam, Vec::Zero(m)) - Mat::Identity(m + 1, m + 1)).norm() < 1e-15);
      for (int i = 0; i < 20; ++i) {
        Vec u(m);
        for (int a = 0; a < m; ++a) u[a] = 0.2 + 2.5 * std::fabs(std::sin(nd(gen)));
        const Mat R = frame_transport(fam, u);
        CHECK((R.transpose() * Q * R - Q).cwiseAbs().maxCoeff() < 1e-12 * R.squaredNorm());
        CHECK((R.col(0) - direction(fam, u)).cwiseAbs().maxCoeff() < 1e-12 * R.norm());
      }
    }
  }
}

TEST_CASE("draws lie on the manifold and are reproducible", "[sampling]") {
  for (Model model : {Model::VonMisesFisher, Model::Hyperboloid}) {
    const auto fam = CurvedFamily::make(model, 2, 2.0);
    const Vec u = v2(1.1, 0.4);
    RngStream a(5, 3), b(5, 3);
    const Sampler sm(fam, u);
    for (int i = 0; i < 2000; ++i) {
      const Vec x = sm.draw(a);
      double y[3];
      sm.draw(b, y);
      CHECK(x[0] == y[0]);
      CHECK(x[1] == y[1]);
      CHECK(x[2] == y[2]);
      if (model == Model::VonMisesFisher) {
        CHECK_THAT(x.squaredNorm(), WithinAbs(1.0, 1e-12));
      } else {
        CHECK_THAT(x[0] * x[0] - x[1] * x[1] - x[2] * x[2], WithinAbs(1.0, 1e-12 * x[0] * x[0]));
        CHECK(x[0] >= 1.0);
      }
    }
  }
  RngStream s(1, 1);
  CHECK_THROWS(sample_vmf(CurvedFamily::make(Model::VonMisesFisher, 3, 1.0), Vec::Zero(3), s));
  CHECK_THROWS(sample_hyperboloid(CurvedFamily::make(Model::VonMisesFisher, 2, 1.0), v2(1, 1), s));
}

TEST_CASE("empirical mean and colatitude law", "[sampling]") {
  const int n = 100000;
  struct Case {
    Model model;
    double r;
    Vec u;
  };
  const std::vector<Case> cases = {{Model::VonMisesFisher, 0.1, v2(kPi / 2, kPi / 2)},
                                   {Model::VonMisesFisher, 3.0, v2(2.2, 4.0)},
                                   {Model::Hyperboloid, 2.0, v2(1.0, kPi / 2)},
                                   {Model::Hyperboloid, 0.5, v2(0.4, 5.5)}};
  for (const auto& c : cases) {
    const auto fam = CurvedFamily::make(c.model, 2, c.r);
    const Vec xi = direction(fam, c.u);
    const Sampler sm(fam, c.u);
    RngStream stream(77, 0);
    Vec sum = Vec::Zero(3), sum2 = Vec::Zero(3);
    std::vector<double> colat(n);
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vec x = sm.draw(stream);
      sum += x;
      sum2 += x.cwiseProduct(x);
      colat[i] = c.model == Model::VonMisesFisher
                     ? x.dot(xi)
                     : x[0] * xi[0] - x[1] * xi[1] - x[2] * xi[2];
      wsum += colat[i] - 1.0;
    }
    const Vec mean = sum / n;
    const Vec var = sum2 / n - mean.cwiseProduct(mean);
    const Vec target = fam.r_dagger * xi;
    for (int i = 0; i < 3; ++i) {
      CHECK(std::fabs(mean[i] - target[i]) < 4.0 * std::sqrt(var[i] / n));
    }
    double d;
    if (c.model == Model::VonMisesFisher) {
      const double r = c.r;
      d = ks_statistic(colat, [r](double t) {
        return std::expm1(r * (t + 1.0)) / std::expm1(2.0 * r);
      });
    } else {
      const double r = c.r;
      d = ks_statistic(colat, [r](double w) { return -std::expm1(-r * (w - 1.0)); });
      const double wmean = wsum / n;
      CHECK(std::fabs(wmean - 1.0 / r) < 4.0 / (r * std::sqrt(n)));
    }
    CHECK(ks_pvalue(d, n) > 1e-3);
  }
}

TEST_CASE("small concentration approaches the uniform sphere", "[sampling]") {
  const auto fam = CurvedFamily::make(Model::VonMisesFisher, 2, 1e-9);
  const Sampler sm(fam, v2(1.0, 1.0));
  RngStream stream(8, 0);
  const Vec xi = direction(fam, v2(1.0, 1.0));
  std::vector<double> t(50000);
  for (auto& v : t) v = sm.draw(stream).dot(xi);
  CHECK(ks_pvalue(ks_statistic(t, [](double x) { return 0.5 * (x + 1.0); }), 50000) > 1e-3);
}
