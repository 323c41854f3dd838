// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Exit status is the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "seqgeom/harness.hpp"
#include "seqgeom/power_theory.hpp"
#include "seqgeom/radial.hpp"
#include "seqgeom/sampling.hpp"
#include "seqgeom/special_functions.hpp"

using namespace seqgeom;

namespace {

const double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void run(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Vec random_point(const CurvedFamily& fam, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec u(fam.m);
  u[0] = fam.model == Model::VonMisesFisher ? 0.15 + (kPi - 0.3) * unit(gen)
                                            : 0.15 + 2.0 * unit(gen);
  double last = 0.15 + (kPi - 0.3) * unit(gen);
  if (unit(gen) < 0.5) last += kPi;
  u[fam.m - 1] = last;
  return u;
}

double ks_pvalue(double d, int n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    sum += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::clamp(sum, 0.0, 1.0);
}

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

Outcome special_functions() {
  double worst = 0.0;
  for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0}) {
    const double i_half = std::sqrt(2.0 / (kPi * x)) * std::sinh(x);
    const double i_3half = std::sqrt(2.0 / (kPi * x)) * (std::cosh(x) - std::sinh(x) / x);
    const double k_half = std::sqrt(kPi / (2.0 * x)) * std::exp(-x);
    const double k_3half = k_half * (1.0 + 1.0 / x);
    worst = std::max({worst, std::fabs(bessel_i(0.5, x) / i_half - 1.0),
                      std::fabs(bessel_i(1.5, x) / i_3half - 1.0),
                      std::fabs(bessel_k(0.5, x) / k_half - 1.0),
                      std::fabs(bessel_k(1.5, x) / k_3half - 1.0)});
  }
  const double q = std::fabs(chi2_quantile(2, 0.05) + 2.0 * std::log(0.05));
  std::string d = fmt("max rel Bessel err %.2e", worst) + fmt(", chi2 quantile err %.2e", q);
  return {worst < 1e-10 && q < 1e-10, d};
}

Outcome radial_kernels() {
  double norm_err = 0.0, cdf_err = 0.0;
  for (int m = 2; m <= 5; ++m) {
    const double c0 = std::sqrt(chi2_quantile(m, 0.05));
    for (double s : {0.0, 1.0, 3.0, 5.0}) {
      norm_err = std::max(norm_err,
                          std::fabs(integrate_z(m, 0, s, 0.0, radial_truncation(m, s)) - 1.0));
      cdf_err = std::max(cdf_err, std::fabs(integrate_z(m, 0, s, 0.0, c0) -
                                            noncentral_chi2_cdf_series(m, s * s, c0 * c0)));
    }
  }
  return {norm_err < 1e-6 && cdf_err < 1e-6,
          fmt("max |mass-1| %.2e", norm_err) + fmt(", max CDF err %.2e", cdf_err)};
}

Outcome envelope_first_order() {
  double level_err = 0.0;
  bool monotone = true;
  for (int m = 2; m <= 5; ++m) {
    const auto ctx = PowerContext::make(m, 0.05);
    level_err = std::max(level_err, std::fabs(envelope_power_first(ctx, 0.0) - 0.05));
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double p = envelope_power_first(ctx, 0.05 * i);
      if (p < prev) monotone = false;
      prev = p;
    }
  }
  return {level_err < 1e-8 && monotone,
          fmt("max |P1*(0)-alpha| %.2e", level_err) + (monotone ? ", monotone" : ", NOT monotone")};
}

Outcome coefficient_properties() {
  bool zero_at_origin = true;
  double min_xi = 1e300, dp_err = 0.0, k2_err = 0.0;
  for (int m = 2; m <= 5; ++m) {
    const auto ctx = PowerContext::make(m, 0.05);
    const auto c0 = coefficients(ctx, 0.0);
    zero_at_origin = zero_at_origin && c0.xi0 == 0.0 && c0.xi1 == 0.0 && c0.xi2prime == 0.0 &&
                     c0.xi2 == 0.0 && c0.xi3 == 0.0 && c0.xi4 == 0.0;
    for (double s : default_s_grid()) {
      const auto c = coefficients(ctx, s);
      min_xi = std::min({min_xi, c.xi0, c.xi1, c.xi2});
      dp_err = std::max(dp_err, std::fabs(delta_p(c, c.K1, c.K2).dp1));
      if (s == 0.0) continue;  // the identity divides by xi2(0) = 0
      k2_err = std::max(k2_err, std::fabs(c.K2 - (c.J2 + c.xi1 * (c.J1 - c.J2) / c.xi2)));
    }
  }
  const bool pass = zero_at_origin && min_xi >= -1e-9 && dp_err < 1e-12 && k2_err < 1e-12;
  return {pass, std::string(zero_at_origin ? "xi(0)=0" : "xi(0)!=0") +
                    fmt(", min xi %.2e", min_xi) + fmt(", |dP1(K1)| %.2e", dp_err) +
                    fmt(", K2 identity err %.2e", k2_err)};
}

Outcome umbilicity() {
  double k_max = 0.0, h_err = 0.0, g_err = 0.0;
  for (const auto& fam : {CurvedFamily::make(Model::VonMisesFisher, 2, 0.1),
                          CurvedFamily::make(Model::Hyperboloid, 2, 2.0)}) {
    std::mt19937_64 gen(101);
    for (int i = 0; i < 1000; ++i) {
      const GeometryAt G = geometry(fam, random_point(fam, gen));
      k_max = std::max(k_max, G.K.cwiseAbs().maxCoeff());
      h_err = std::max(h_err, std::fabs(G.H_mean + 1.0 / fam.r_dagger));
      g_err = std::max(g_err, std::fabs(G.scalars.gamma2 -
                                        fam.m / (fam.r_dagger * fam.r_dagger)));
    }
  }
  return {k_max < 1e-8 && h_err < 1e-8 && g_err == 0.0,
          fmt("max |K| %.2e", k_max) + fmt(", max |H+1/r'| %.2e", h_err) +
              fmt(", gamma2 err %.2e", g_err)};
}

Outcome conformal_flatness() {
  double worst = 0.0;
  for (const auto& fam : {CurvedFamily::make(Model::VonMisesFisher, 2, 0.1),
                          CurvedFamily::make(Model::Hyperboloid, 2, 2.0)}) {
    std::mt19937_64 gen(202);
    for (int i = 0; i < 100; ++i) {
      worst = std::max(worst, fd_connection_scaled(fam, random_point(fam, gen)).max_abs());
    }
  }
  return {worst < 1e-4, fmt("max |Gamma~| %.2e", worst)};
}

Outcome samplers() {
  const int n = 100000;
  struct Case {
    Model model;
    double r;
    double u1, u2;
  };
  const Case cases[] = {{Model::VonMisesFisher, 0.1, kPi / 2, kPi / 2},
                        {Model::VonMisesFisher, 0.2, kPi / 2, kPi / 2},
                        {Model::Hyperboloid, 2.0, 1.0, kPi / 2}};
  double worst_z = 0.0, worst_p = 1.0;
  for (const auto& c : cases) {
    const auto fam = CurvedFamily::make(c.model, 2, c.r);
    Vec u(2);
    u << c.u1, c.u2;
    const Vec xi = direction(fam, u);
    const Sampler sm(fam, u);
    RngStream stream(4242, 0);
    Vec sum = Vec::Zero(3), sum2 = Vec::Zero(3);
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) {
      const Vec x = sm.draw(stream);
      sum += x;
      sum2 += x.cwiseProduct(x);
      t[i] = c.model == Model::VonMisesFisher ? x.dot(xi)
                                              : x[0] * xi[0] - x[1] * xi[1] - x[2] * xi[2];
    }
    const Vec mean = sum / n;
    const Vec var = sum2 / n - mean.cwiseProduct(mean);
    for (int i = 0; i < 3; ++i) {
      worst_z = std::max(worst_z, std::fabs(mean[i] - fam.r_dagger * xi[i]) /
                                      std::sqrt(var[i] / n));
    }
    std::sort(t.begin(), t.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
      const double F = c.model == Model::VonMisesFisher
                           ? std::expm1(c.r * (t[i] + 1.0)) / std::expm1(2.0 * c.r)
                           : -std::expm1(-c.r * (t[i] - 1.0));
      d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
    }
    worst_p = std::min(worst_p, ks_pvalue(d, n));
  }
  return {worst_z < 4.0 && worst_p > 1e-3,
          fmt("max |z| of mean %.2f", worst_z) + fmt(", min KS p %.3g", worst_p)};
}

Outcome nonseq_level() {
  const double band = 3.0 * std::sqrt(0.05 * 0.95 / 1e4);
  bool pass = true;
  std::string d;
  for (Model model : {Model::VonMisesFisher, Model::Hyperboloid}) {
    auto c = ExperimentConfig::reference_defaults("nonseq-sim", model);
    c.s_grid = {0.0};
    c.H1 = 1000;
    c.reps = 10;
    const auto rep = run_nonseq_experiment(c);
    d += to_string(model) + ":";
    for (const char* t : {"MLT", "LRT", "EST"}) {
      const auto& row = rep.find(0.0, t);
      const bool ok = row.trials == 10000 && std::fabs(row.power - 0.05) <= band;
      pass = pass && ok;
      d += std::string(" ") + t + fmt("=%.4f", row.power) + (ok ? "" : "(out)");
    }
    d += " ";
  }
  return {pass, d + fmt("band 0.05+-%.4f", band)};
}

Outcome stopping_time() {
  auto c = ExperimentConfig::reference_defaults("seq-sim", Model::VonMisesFisher);
  c.s_grid = {0.0};
  c.H1 = 500;
  c.reps = 20;
  const auto rep = run_seq_experiment(c);
  const auto& row = rep.find(0.0, "CMLT");
  const double target = c.K * gauge_nu(c.family(), c.u0_vec());
  const double ratio = row.mean_tau / target;
  const double trunc = static_cast<double>(row.truncated) / row.trials;
  return {row.trials == 10000 && std::fabs(ratio - 1.0) <= 0.02 && trunc < 1e-3,
          fmt("E[tau]=%.1f", row.mean_tau) + fmt(" vs K nu=%.1f", target) +
              fmt(" (ratio %.4f)", ratio) + fmt(", truncation %.2e", trunc)};
}

double calibrated_epsilon(const ExperimentConfig& seq) {
  auto cal = seq;
  cal.experiment = "calibrate";
  cal.K_list = {seq.K};
  cal.reps = 100000;
  cal.seed = seq.seed + 1;
  const CsvTable t = run_calibration(cal);
  const auto col = std::find(t.header.begin(), t.header.end(), "epsilon") - t.header.begin();
  return std::stod(t.rows.at(0).at(col));
}

Outcome headline_claim() {
  bool pass = true;
  std::string d;
  for (Model model : {Model::VonMisesFisher, Model::Hyperboloid}) {
    auto c = ExperimentConfig::reference_defaults("seq-sim", model);
    c.epsilon_tilde = calibrated_epsilon(c);
    c.reps = (2500 + c.H1 - 1) / c.H1;
    const auto rep = run_seq_experiment(c);
    d += to_string(model) + fmt("(eps~=%.3f):", c.epsilon_tilde);
    for (const char* t : {"OMLT", "OLRT", "OEST"}) {
      int positive = 0, points = 0;
      double worst_z = 1e300, max_sigma = 0.0;
      for (double s : c.s_grid) {
        if (s <= 0.0) continue;
        const auto& row = rep.find(s, t);
        ++points;
        if (row.diff > 0.0) ++positive;
        max_sigma = std::max(max_sigma, row.diff_se);
        worst_z = std::min(worst_z, row.diff_se > 0.0 ? row.diff / row.diff_se : 0.0);
      }
      const double frac = static_cast<double>(positive) / points;
      const bool ok = worst_z >= -2.0 && frac >= 0.7 && max_sigma <= 0.01;
      pass = pass && ok;
      d += std::string(" ") + t + fmt(" pos=%.2f", frac) + fmt(" minz=%.2f", worst_z) +
           fmt(" sigma<=%.4f", max_sigma) + (ok ? "" : "(fail)");
    }
    d += "; ";
  }
  return {pass, d};
}

Outcome determinism() {
  bool pass = true;
  for (const char* exp : {"nonseq-sim", "seq-sim", "calibrate"}) {
    for (Model model : {Model::VonMisesFisher, Model::Hyperboloid}) {
      auto c = ExperimentConfig::reference_defaults(exp, model);
      c.s_grid = {0.0, 2.5};
      c.H1 = 20;
      c.reps = std::string(exp) == "calibrate" ? 200 : 2;
      if (model == Model::VonMisesFisher && std::string(exp) != "nonseq-sim") c.K = 100.0;
      c.workers = 1;
      const std::string a = run_experiment(c).str();
      c.workers = 2;
      const std::string b = run_experiment(c).str();
      pass = pass && a == b && run_experiment(c).str() == b;
    }
  }
  return {pass, pass ? "identical CSV for 1 and 2 workers" : "CSV differs"};
}

}  // namespace

int main() {
  std::printf("seqgeom %s acceptance\n", library_version().c_str());
  run(1, "special functions", special_functions);
  run(2, "radial kernels", radial_kernels);
  run(3, "first-order envelope power", envelope_first_order);
  run(4, "power coefficients", coefficient_properties);
  run(5, "total e-umbilicity", umbilicity);
  run(6, "conformal flatness", conformal_flatness);
  run(7, "samplers", samplers);
  run(8, "nonsequential level", nonseq_level);
  run(9, "sequential stopping time", stopping_time);
  run(10, "sequential tests beat fixed-size tests", headline_claim);
  run(11, "determinism", determinism);
  std::printf("%d criteria failed\n", failures);
  return failures;
}
