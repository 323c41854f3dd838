#include "seqgeom/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "seqgeom/parallel.hpp"
#include "seqgeom/sampling.hpp"
#include "seqgeom/special_functions.hpp"

namespace seqgeom {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDegenerate = 1e-12;

double wrap_angle(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  return y;
}

// Euclidean norm on the sphere, Minkowski norm (or -1 if not future timelike) on H^m.
double resultant_norm(const CurvedFamily& fam, const Vec& x) {
  if (fam.model == Model::VonMisesFisher) return x.norm();
  const double q = x[0] * x[0] - x.tail(fam.m).squaredNorm();
  if (!(x[0] > 0.0) || !(q > 0.0)) return -1.0;
  return std::sqrt(q);
}

// d_a d_b theta(u) . x as an m x m matrix.
Mat hessian_theta_dot(const CurvedFamily& fam, const Vec& u, const Vec& x) {
  const int m = fam.m;
  const DirectionJet jet = direction_jet(fam, u, 2);
  Mat Hx(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Vec t = fam.r * jet.d2[a * m + b];
      if (fam.model == Model::Hyperboloid) t[0] = -t[0];
      Hx(a, b) = t.dot(x);
    }
  return Hx;
}

}  // namespace

SuffStats SuffStats::zero(int n) {
  SuffStats s;
  s.sum_x = Vec::Zero(n);
  return s;
}

void SuffStats::add(const Vec& x) {
  sum_x += x;
  ++count;
}

void SuffStats::add(const double* x) {
  for (int i = 0; i < sum_x.size(); ++i) sum_x[i] += x[i];
  ++count;
}

Vec SuffStats::mean() const {
  if (count < 1) throw std::invalid_argument("SuffStats: empty");
  return sum_x / static_cast<double>(count);
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::MLT: return "MLT";
    case Variant::Wald: return "Wald";
    case Variant::LRT: return "LRT";
    case Variant::EST: return "EST";
    case Variant::DesignedK: return "DesignedK";
  }
  return "?";
}

Variant variant_from_string(const std::string& name) {
  if (name == "MLT") return Variant::MLT;
  if (name == "Wald") return Variant::Wald;
  if (name == "LRT") return Variant::LRT;
  if (name == "EST") return Variant::EST;
  if (name == "DesignedK") return Variant::DesignedK;
  throw std::invalid_argument("unknown test variant '" + name + "'");
}

TestDesign TestDesign::make(Variant variant, double alpha, const Vec& u0, double k1, double k2) {
  TestDesign d;
  d.variant = variant;
  d.alpha = alpha;
  d.u0 = u0;
  switch (variant) {
    case Variant::MLT:
    case Variant::Wald: d.k1 = d.k2 = 0.0; break;
    case Variant::LRT: d.k1 = d.k2 = 0.5; break;
    case Variant::EST: d.k1 = d.k2 = 1.0; break;
    case Variant::DesignedK:
      d.k1 = k1;
      d.k2 = k2;
      break;
  }
  return d;
}

double TestDesign::critical_radius() const {
  return std::sqrt(chi2_quantile(static_cast<int>(u0.size()), alpha));
}

void StoppingConfig::validate() const {
  if (!(K > 0.0)) throw std::invalid_argument("StoppingConfig: K must be positive");
  if (n_min < 1) throw std::invalid_argument("StoppingConfig: n_min must be >= 1");
  if (n_max != 0 && n_max < n_min) throw std::invalid_argument("StoppingConfig: n_max < n_min");
}

Vec direction_to_coords(const CurvedFamily& fam, const Vec& d) {
  const int m = fam.m;
  Vec u(m);
  if (fam.model == Model::VonMisesFisher) {
    u[0] = std::acos(std::clamp(d[0], -1.0, 1.0));
  } else {
    u[0] = std::acosh(std::max(1.0, d[0]));
  }
  for (int a = 1; a < m - 1; ++a) {
    const double rem = d.segment(a, m + 1 - a).norm();
    u[a] = rem > 0.0 ? std::acos(std::clamp(d[a] / rem, -1.0, 1.0)) : 0.0;
  }
  u[m - 1] = wrap_angle(std::atan2(d[m], d[m - 1]));
  return u;
}

Vec mean_direction(const CurvedFamily& fam, const Vec& xbar) {
  const double nrm = resultant_norm(fam, xbar);
  if (!(nrm > kDegenerate)) throw DegenerateMleError("mle: degenerate mean resultant");
  return xbar / nrm;
}

Vec mle(const CurvedFamily& fam, const SuffStats& stats) {
  return direction_to_coords(fam, mean_direction(fam, stats.mean()));
}

Vec coordinate_difference(const Vec& u, const Vec& u0) {
  Vec d = u - u0;
  const int last = static_cast<int>(d.size()) - 1;
  d[last] = std::remainder(d[last], kTwoPi);
  if (d[last] == -std::numbers::pi) d[last] = std::numbers::pi;
  return d;
}

Vec designed_estimate(const CurvedFamily& fam, const TestDesign& design, const SuffStats& stats,
                      const Vec& u_hat) {
  const int m = fam.m;
  const Vec xbar = stats.mean();
  const Mat g = metric(fam, u_hat);
  const Mat a_bc = g + hessian_theta_dot(fam, u_hat, xbar);
  const double a = (g.inverse() * a_bc).trace();
  const Mat A = design.k1 * (a_bc - g * (a / m)) + design.k2 * g * (a / m);
  const Vec delta = coordinate_difference(u_hat, design.u0);
  return u_hat - g.ldlt().solve(A * delta);
}

TestOutcome nonseq_statistic(const CurvedFamily& fam, const TestDesign& design,
                             const SuffStats& stats) {
  const double N = static_cast<double>(stats.count);
  const Vec xbar = stats.mean();
  TestOutcome out;
  out.u_hat = mle(fam, stats);
  out.tau = stats.count;
  const Vec& u0 = design.u0;
  const Vec delta = coordinate_difference(out.u_hat, u0);
  switch (design.variant) {
    case Variant::Wald:
      out.statistic = N * delta.dot(metric(fam, u0) * delta);
      break;
    case Variant::MLT:
      out.statistic = N * delta.dot(metric(fam, out.u_hat) * delta);
      break;
    case Variant::LRT: {
      const Vec th_hat = embed(fam, out.u_hat).theta;
      const Vec th0 = embed(fam, u0).theta;
      out.statistic = 2.0 * N * (th_hat - th0).dot(xbar);
      break;
    }
    case Variant::EST: {
      const GeometryAt G0 = geometry(fam, u0);
      const Vec eta0 = embed(fam, u0).eta;
      const Vec score = G0.B_theta * (xbar - eta0);
      out.statistic = N * score.dot(G0.g_inv * score);
      break;
    }
    case Variant::DesignedK: {
      const Vec up = designed_estimate(fam, design, stats, out.u_hat);
      const Vec d = coordinate_difference(up, u0);
      out.statistic = N * d.dot(metric(fam, u0) * d);
      break;
    }
  }
  const double c0 = design.critical_radius();
  out.reject = out.statistic >= c0 * c0;
  return out;
}

double observed_mean_curvature(const CurvedFamily& fam, const SuffStats& running,
                               const Vec& u_hat) {
  const Mat gi = metric(fam, u_hat).inverse();
  const Mat Hx = hessian_theta_dot(fam, u_hat, running.sum_x);
  return -(gi.array() * Hx.array()).sum() / fam.m;
}

StopCheck stopping_check(const CurvedFamily& fam, double K, double c, const SuffStats& stats) {
  StopCheck chk;
  const double nrm = resultant_norm(fam, stats.sum_x);
  if (!(nrm > kDegenerate * static_cast<double>(stats.count))) return chk;
  const double last = std::fabs(stats.sum_x[fam.m]) / nrm;  // |xi_{m+1}(u_hat)|
  if (!(last > kSingularityMargin)) return chk;
  chk.valid = true;
  chk.statistic = nrm / fam.r_dagger;
  chk.threshold = K / last + c;
  return chk;
}

TestOutcome sequential_decision(const CurvedFamily& fam, const TestDesign& design,
                                const StoppingConfig& cfg, const SuffStats& at_tau) {
  TestOutcome out;
  out.tau = at_tau.count;
  out.u_hat = mle(fam, at_tau);
  Vec u_est = out.u_hat;
  if (design.k1 != 0.0 || design.k2 != 0.0) u_est = designed_estimate(fam, design, at_tau, u_est);
  const ConformalChart base = conformal_chart(fam, design.u0, design.u0);
  const double nu0 = gauge_nu(fam, design.u0);
  const double c0 = design.critical_radius();
  const double crit = (c0 + cfg.epsilon_tilde) * (c0 + cfg.epsilon_tilde);
  try {
    const Vec ut = std::sqrt(cfg.K * nu0) * (conformal_coords(fam, u_est) - base.utilde);
    out.statistic = ut.dot(base.g_tilde * ut);
  } catch (const SingularCoordinateError&) {
    // The gauge blows up on the boundary of the chart: the estimate is infinitely far out.
    out.statistic = std::numeric_limits<double>::infinity();
  }
  out.reject = out.statistic >= crit;
  return out;
}

std::int64_t default_n_max(const CurvedFamily& fam, double K, const Vec& u0, const Vec& true_u) {
  double nu_max = gauge_nu(fam, u0);
  try {
    nu_max = std::max(nu_max, gauge_nu(fam, true_u));
  } catch (const SingularCoordinateError&) {
  }
  return static_cast<std::int64_t>(std::ceil(10.0 * K * nu_max));
}

TestOutcome sequential_run(const CurvedFamily& fam, const TestDesign& design,
                           const StoppingConfig& cfg, const Vec& true_u, RngStream& stream) {
  cfg.validate();
  const std::int64_t n_max =
      cfg.n_max > 0 ? cfg.n_max : default_n_max(fam, cfg.K, design.u0, true_u);
  const double c = bias_c(fam, design.u0);
  const Sampler sampler(fam, true_u);
  SuffStats stats = SuffStats::zero(fam.n());
  double x[16];
  bool stopped = false;
  while (stats.count < n_max) {
    sampler.draw(stream, x);
    stats.add(x);
    if (stats.count >= cfg.n_min && stopping_check(fam, cfg.K, c, stats).stop()) {
      stopped = true;
      break;
    }
  }
  TestOutcome out = sequential_decision(fam, design, cfg, stats);
  out.truncated = !stopped;
  return out;
}

EpsilonEstimate calibrate_epsilon(const CurvedFamily& fam, const TestDesign& design,
                                  const StoppingConfig& cfg, std::int64_t replications,
                                  const RngStream& stream, int workers) {
  if (replications < 1) throw std::invalid_argument("calibrate_epsilon: replications < 1");
  std::vector<double> stat(replications);
  std::vector<char> trunc(replications);
  StoppingConfig zero = cfg;
  zero.epsilon_tilde = 0.0;
  parallel_for(replications, workers, [&](std::int64_t i) {
    RngStream s(stream.master_seed(), static_cast<std::uint64_t>(i));
    const TestOutcome o = sequential_run(fam, design, zero, design.u0, s);
    stat[i] = o.statistic;
    trunc[i] = o.truncated ? 1 : 0;
  });
  EpsilonEstimate est;
  est.replications = replications;
  est.insufficient = replications < 10000;
  const double c0 = design.critical_radius();
  std::int64_t rej = 0;
  for (std::int64_t i = 0; i < replications; ++i) {
    if (stat[i] >= c0 * c0) ++rej;
    est.truncated += trunc[i];
  }
  est.level_uncalibrated = static_cast<double>(rej) / replications;

  std::sort(stat.begin(), stat.end());
  const double n = static_cast<double>(replications);
  const double a = design.alpha;
  auto eps_at = [&](double pos) {
    const auto k = static_cast<std::int64_t>(std::clamp(std::ceil(pos), 1.0, n)) - 1;
    return std::sqrt(stat[k]) - c0;
  };
  // Threshold at order statistic n(1 - alpha) + 1 leaves n * alpha values at or above it.
  const double pos = n * (1.0 - a) + 1.0;
  est.epsilon = eps_at(pos);
  const double spread = std::sqrt(n * a * (1.0 - a));
  est.standard_error = 0.5 * (eps_at(pos + spread) - eps_at(pos - spread));
  return est;
}

}  // namespace seqgeom
