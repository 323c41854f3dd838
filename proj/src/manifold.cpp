#include "seqgeom/manifold.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "seqgeom/special_functions.hpp"

namespace seqgeom {
namespace {

bool hyperbolic(const CurvedFamily& fam) { return fam.model == Model::Hyperboloid; }

// n-th derivative of the chain factor for coordinate j. kind: 0 = "sine" factor, 1 = "cosine".
double factor_derivative(bool hyp, int kind, int n, double x) {
  if (hyp) {
    const bool even = (n % 2) == 0;
    if (kind == 0) return even ? std::sinh(x) : std::cosh(x);
    return even ? std::cosh(x) : std::sinh(x);
  }
  const double shift = 0.5 * std::numbers::pi * n;
  return kind == 0 ? std::sin(x + shift) : std::cos(x + shift);
}

// Derivative of xi(u) with multiplicities counts[j] in coordinate j.
Vec chain_derivative(const CurvedFamily& fam, const Vec& u, const std::array<int, 16>& counts) {
  const int m = fam.m;
  Vec out(m + 1);
  for (int k = 0; k <= m; ++k) {
    double prod = 1.0;
    for (int j = 0; j < m && prod != 0.0; ++j) {
      const bool hyp = hyperbolic(fam) && j == 0;
      if (j < k) {
        prod *= factor_derivative(hyp, 0, counts[j], u[j]);
      } else if (j == k) {
        prod *= factor_derivative(hyp, 1, counts[j], u[j]);
      } else if (counts[j] > 0) {
        prod = 0.0;
      }
    }
    out[k] = prod;
  }
  return out;
}

void check_dims(const CurvedFamily& fam, const Vec& u) {
  if (u.size() != fam.m) throw std::invalid_argument("coordinate vector has wrong dimension");
  for (int a = 0; a < fam.m; ++a) {
    if (!std::isfinite(u[a])) throw std::invalid_argument("coordinate is not finite");
  }
}

// theta = r J xi: flip the first component on the hyperboloid.
Vec to_theta(const CurvedFamily& fam, const Vec& dxi) {
  Vec t = fam.r * dxi;
  if (hyperbolic(fam)) t[0] = -t[0];
  return t;
}

// Ambient quadratic form used by psi = Phi(q): identity or Minkowski.
double ambient_pair(const CurvedFamily& fam, const Vec& x, const Vec& y) {
  double s = x.dot(y);
  if (hyperbolic(fam)) s = 2.0 * x[0] * y[0] - s;
  return s;
}

struct Frames {
  DirectionJet jet;
  std::vector<Vec> th1, et1, th2, et2, th3, et3;
};

Frames frames(const CurvedFamily& fam, const Vec& u, int order) {
  Frames f;
  f.jet = direction_jet(fam, u, order);
  for (const auto& v : f.jet.d1) {
    f.th1.push_back(to_theta(fam, v));
    f.et1.push_back(fam.r_dagger * v);
  }
  for (const auto& v : f.jet.d2) {
    f.th2.push_back(to_theta(fam, v));
    f.et2.push_back(fam.r_dagger * v);
  }
  for (const auto& v : f.jet.d3) {
    f.th3.push_back(to_theta(fam, v));
    f.et3.push_back(fam.r_dagger * v);
  }
  return f;
}

Mat metric_from(const Frames& f, int m) {
  Mat g(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) g(a, b) = 0.5 * (f.th1[a].dot(f.et1[b]) + f.th1[b].dot(f.et1[a]));
  return g;
}

Mat eta_frame(const CurvedFamily& fam, const Vec& u) {
  const DirectionJet jet = direction_jet(fam, u, 1);
  Mat B(fam.m, fam.n());
  for (int a = 0; a < fam.m; ++a) B.row(a) = fam.r_dagger * jet.d1[a].transpose();
  return B;
}

// The 15 ways of pairing six slots.
std::vector<std::array<int, 6>> perfect_matchings6() {
  std::vector<std::array<int, 6>> out;
  for (int p = 1; p < 6; ++p) {
    std::array<int, 4> rest{};
    int k = 0;
    for (int i = 1; i < 6; ++i)
      if (i != p) rest[k++] = i;
    for (int q = 1; q < 4; ++q) {
      std::array<int, 2> last{};
      int t = 0;
      for (int i = 1; i < 4; ++i)
        if (i != q) last[t++] = rest[i];
      out.push_back({0, p, rest[0], rest[q], last[0], last[1]});
    }
  }
  return out;
}

}  // namespace

std::string to_string(Model model) {
  return model == Model::VonMisesFisher ? "vMF" : "hyperboloid";
}

Model model_from_string(const std::string& name) {
  if (name == "vMF" || name == "vmf") return Model::VonMisesFisher;
  if (name == "hyperboloid" || name == "hyp") return Model::Hyperboloid;
  throw std::invalid_argument("unknown model '" + name + "'");
}

double mean_resultant_length(Model model, int m, double r) {
  if (!(r > 0.0)) throw DomainError("mean_resultant_length: r must be positive");
  const double lo = 0.5 * (m - 1);
  if (model == Model::VonMisesFisher) return bessel_i(lo + 1.0, r) / bessel_i(lo, r);
  return bessel_k(lo + 1.0, r) / bessel_k(lo, r);
}

double mean_resultant_length_derivative(Model model, int m, double r, double rd) {
  if (model == Model::VonMisesFisher) return 1.0 - rd * rd - (m / r) * rd;
  return rd * rd - (m / r) * rd - 1.0;
}

CurvedFamily CurvedFamily::make(Model model, int m, double r) {
  if (m < 2) throw std::invalid_argument("CurvedFamily: m must be >= 2");
  if (m > 15) throw std::invalid_argument("CurvedFamily: m must be <= 15");
  CurvedFamily fam;
  fam.model = model;
  fam.m = m;
  fam.r = r;
  fam.r_dagger = mean_resultant_length(model, m, r);
  return fam;
}

double Tensor3::max_abs() const {
  double mx = 0.0;
  for (double x : v) mx = std::max(mx, std::fabs(x));
  return mx;
}

double Tensor4::max_abs() const {
  double mx = 0.0;
  for (double x : v) mx = std::max(mx, std::fabs(x));
  return mx;
}

DirectionJet direction_jet(const CurvedFamily& fam, const Vec& u, int order) {
  check_dims(fam, u);
  const int m = fam.m;
  DirectionJet jet;
  std::array<int, 16> counts{};
  jet.xi = chain_derivative(fam, u, counts);
  if (order >= 1) {
    for (int a = 0; a < m; ++a) {
      counts.fill(0);
      counts[a] = 1;
      jet.d1.push_back(chain_derivative(fam, u, counts));
    }
  }
  if (order >= 2) {
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        counts.fill(0);
        ++counts[a];
        ++counts[b];
        jet.d2.push_back(chain_derivative(fam, u, counts));
      }
  }
  if (order >= 3) {
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c) {
          counts.fill(0);
          ++counts[a];
          ++counts[b];
          ++counts[c];
          jet.d3.push_back(chain_derivative(fam, u, counts));
        }
  }
  return jet;
}

Vec direction(const CurvedFamily& fam, const Vec& u) {
  check_dims(fam, u);
  std::array<int, 16> counts{};
  return chain_derivative(fam, u, counts);
}

Embedding embed(const CurvedFamily& fam, const Vec& u) {
  const Vec xi = direction(fam, u);
  return {to_theta(fam, xi), fam.r_dagger * xi};
}

void check_regular(const CurvedFamily& fam, const Vec& u, bool include_last) {
  check_dims(fam, u);
  const int last = include_last ? fam.m : fam.m - 1;
  for (int a = 0; a < last; ++a) {
    const double f = (hyperbolic(fam) && a == 0) ? std::sinh(u[a]) : std::sin(u[a]);
    if (std::fabs(f) < kSingularityMargin) {
      throw SingularCoordinateError("coordinate u" + std::to_string(a + 1) +
                                    " is within the singularity margin");
    }
  }
}

Mat metric(const CurvedFamily& fam, const Vec& u) {
  check_regular(fam, u, false);
  return metric_from(frames(fam, u, 1), fam.m);
}

double gauge_nu(const CurvedFamily& fam, const Vec& u) {
  check_regular(fam, u, true);
  double prod = 1.0;
  for (int a = 0; a < fam.m; ++a) {
    prod *= (hyperbolic(fam) && a == 0) ? std::fabs(std::sinh(u[a])) : std::fabs(std::sin(u[a]));
  }
  return 1.0 / prod;
}

Vec gauge_score(const CurvedFamily& fam, const Vec& u) {
  check_regular(fam, u, true);
  Vec s(fam.m);
  for (int a = 0; a < fam.m; ++a) {
    s[a] = (hyperbolic(fam) && a == 0) ? -1.0 / std::tanh(u[a]) : -1.0 / std::tan(u[a]);
  }
  return s;
}

GeometryAt geometry(const CurvedFamily& fam, const Vec& u) {
  check_regular(fam, u, true);
  const int m = fam.m;
  const int n = fam.n();
  const Frames f = frames(fam, u, 2);
  GeometryAt G;
  G.u = u;
  G.g = metric_from(f, m);
  G.g_inv = G.g.inverse();
  G.B_theta.resize(m, n);
  G.B_eta.resize(m, n);
  for (int a = 0; a < m; ++a) {
    G.B_theta.row(a) = f.th1[a].transpose();
    G.B_eta.row(a) = f.et1[a].transpose();
  }
  G.normal_lower = f.jet.xi;
  G.normal_upper = f.jet.xi;
  if (hyperbolic(fam)) G.normal_upper.tail(n - 1) *= -1.0;
  G.H.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) G.H(a, b) = f.th2[a * m + b].dot(G.normal_lower);
  G.H = 0.5 * (G.H + G.H.transpose()).eval();
  G.H_mean = (G.g_inv * G.H).trace() / m;
  G.K = G.H - G.g * G.H_mean;
  // Both models are totally umbilic with H_mean = -1/r_dagger; the scalars use the exact
  // values, the tensors above are computed from the frames and checked against them.
  G.scalars.kappa2 = 0.0;
  G.scalars.gamma2 = m / (fam.r_dagger * fam.r_dagger);
  G.scalars.HA2 = 0.0;
  G.nu = gauge_nu(fam, u);
  G.gauge_score = gauge_score(fam, u);
  return G;
}

double bias_c(const CurvedFamily& fam, const Vec& /*u*/) {
  const double rd = fam.r_dagger;
  const double lead = fam.m / (fam.r * rd);
  if (hyperbolic(fam)) return -0.5 * (-lead - 1.0 / (rd * rd));
  return -0.5 * (lead - 1.0 / (rd * rd));
}

Vec conformal_coords(const CurvedFamily& fam, const Vec& u) {
  const double nu = gauge_nu(fam, u);
  const Vec eta = fam.r_dagger * direction(fam, u);
  return nu * eta.head(fam.m);
}

Mat conformal_jacobian(const CurvedFamily& fam, const Vec& u) {
  const int m = fam.m;
  const double nu = gauge_nu(fam, u);
  const Vec s = gauge_score(fam, u);
  const DirectionJet jet = direction_jet(fam, u, 1);
  Mat J(m, m);
  for (int b = 0; b < m; ++b)
    for (int a = 0; a < m; ++a)
      J(b, a) = nu * fam.r_dagger * (s[a] * jet.xi[b] + jet.d1[a][b]);
  return J;
}

ConformalChart conformal_chart(const CurvedFamily& fam, const Vec& u, const Vec& base) {
  ConformalChart chart;
  chart.utilde = conformal_coords(fam, u);
  chart.jacobian = conformal_jacobian(fam, base);
  Eigen::FullPivLU<Mat> lu(chart.jacobian);
  if (lu.rank() < fam.m) throw ChartError("conformal chart Jacobian is rank deficient");
  const Mat P = lu.inverse();
  chart.g_tilde = P.transpose() * metric(fam, base) * P;
  return chart;
}

double fd_step(double ua, double scale) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::fabs(ua)) * scale;
}

Tensor3 connection_m(const CurvedFamily& fam, const Vec& u) {
  const int m = fam.m;
  const Frames f = frames(fam, u, 2);
  Tensor3 C(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) C(a, b, c) = f.et2[a * m + b].dot(f.th1[c]);
  return C;
}

Tensor3 connection_e(const CurvedFamily& fam, const Vec& u) {
  const int m = fam.m;
  const Frames f = frames(fam, u, 2);
  Tensor3 G(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) G(a, b, c) = f.th2[a * m + b].dot(f.et1[c]);
  return G;
}

Tensor3 fd_connection(const CurvedFamily& fam, const Vec& u, double step_scale) {
  const int m = fam.m;
  const Frames f = frames(fam, u, 1);
  Tensor3 C(m);
  for (int a = 0; a < m; ++a) {
    const double h = fd_step(u[a], step_scale);
    Vec up = u, dn = u;
    up[a] += h;
    dn[a] -= h;
    const Mat d = (eta_frame(fam, up) - eta_frame(fam, dn)) / (2.0 * h);
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) C(a, b, c) = d.row(b).dot(f.th1[c]);
  }
  return C;
}

Tensor3 fd_connection_scaled(const CurvedFamily& fam, const Vec& base, double step_scale) {
  const int m = fam.m;
  check_regular(fam, base, true);
  const Tensor3 C = fd_connection(fam, base, step_scale);
  const Mat g = metric(fam, base);
  const Vec s = gauge_score(fam, base);
  const Mat J = conformal_jacobian(fam, base);
  Eigen::FullPivLU<Mat> lu(J);
  if (lu.rank() < m) throw ChartError("conformal chart Jacobian is rank deficient");
  const Mat P = lu.inverse();  // P(a, A) = d u^a / d u~^A

  // ddu[a][b](E) = d_a d_b u~^E by differencing the analytic Jacobian.
  std::vector<Mat> ddu(m, Mat::Zero(m, m));
  for (int a = 0; a < m; ++a) {
    const double h = fd_step(base[a], step_scale);
    Vec up = base, dn = base;
    up[a] += h;
    dn[a] -= h;
    const Mat dJ = (conformal_jacobian(fam, up) - conformal_jacobian(fam, dn)) / (2.0 * h);
    for (int b = 0; b < m; ++b) ddu[a].row(b) = dJ.col(b).transpose();
  }

  // Gauge-scaled connection in u coordinates, then the affine transformation law.
  Tensor3 W(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        const double scaled = C(a, b, c) + g(c, a) * s[b] + g(c, b) * s[a];
        double inhom = 0.0;
        for (int d = 0; d < m; ++d)
          for (int E = 0; E < m; ++E) inhom += g(d, c) * P(d, E) * ddu[a](b, E);
        W(a, b, c) = scaled - inhom;
      }
  Tensor3 out(m);
  for (int A = 0; A < m; ++A)
    for (int B = 0; B < m; ++B)
      for (int Cc = 0; Cc < m; ++Cc) {
        double acc = 0.0;
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) acc += P(a, A) * P(b, B) * P(c, Cc) * W(a, b, c);
        out(A, B, Cc) = acc;
      }
  return out;
}

Vec w_chart(const CurvedFamily& fam, const Vec& u, double v) {
  if (fam.r_dagger + v <= 0.0) throw ChartError("w_chart: fold-over of the ancillary line");
  return (fam.r_dagger + v) * direction(fam, u);
}

double ambient_psi(const CurvedFamily& fam, const Vec& theta) {
  const double nu = 0.5 * (fam.m - 1);
  const double pi2 = 2.0 * std::numbers::pi;
  if (hyperbolic(fam)) {
    const double q = ambient_pair(fam, theta, theta);
    if (!(q > 0.0) || !(theta[0] < 0.0)) throw DomainError("ambient_psi: theta outside domain");
    const double rho = std::sqrt(q);
    return std::log(2.0) + nu * std::log(pi2) + std::log(bessel_k(nu, rho)) - nu * std::log(rho);
  }
  const double rho = theta.norm();
  return 0.5 * fam.n() * std::log(pi2) + std::log(bessel_i(nu, rho)) - nu * std::log(rho);
}

Vec ambient_eta(const CurvedFamily& fam, const Vec& theta) {
  if (hyperbolic(fam)) {
    const double q = ambient_pair(fam, theta, theta);
    if (!(q > 0.0) || !(theta[0] < 0.0)) throw DomainError("ambient_eta: theta outside domain");
    const double rho = std::sqrt(q);
    Vec Mt = -theta;
    Mt[0] = theta[0];
    return -mean_resultant_length(fam.model, fam.m, rho) / rho * Mt;
  }
  const double rho = theta.norm();
  return mean_resultant_length(fam.model, fam.m, rho) / rho * theta;
}

Tensor3 skewness_direct(const CurvedFamily& fam, const Vec& u) {
  const int m = fam.m;
  const Frames f = frames(fam, u, 3);
  const Vec eta = fam.r_dagger * f.jet.xi;
  Tensor3 T(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        T(a, b, c) = -(f.th2[c * m + b].dot(f.et1[a]) + f.th2[c * m + a].dot(f.et1[b]) +
                       f.th2[b * m + a].dot(f.et1[c])) -
                     eta.dot(f.th3[(a * m + b) * m + c]);
      }
  return T;
}

AppendixTensors appendix_tensors(const CurvedFamily& fam, const Vec& u, double k1, double k2) {
  const int m = fam.m;
  const GeometryAt G = geometry(fam, u);
  const Frames f = frames(fam, u, 3);
  const Mat& gi = G.g_inv;

  AppendixTensors out;
  out.C = connection_m(fam, u);
  const Tensor3 Ge = connection_e(fam, u);
  out.T = Tensor3(m);
  for (size_t i = 0; i < out.T.v.size(); ++i) out.T.v[i] = out.C.v[i] - Ge.v[i];

  // psi = Phi(q): only the Phi'' G G term survives the pull-back to the model.
  const double r = fam.r;
  const double rd = fam.r_dagger;
  const double drd = mean_resultant_length_derivative(fam.model, m, r, rd);
  const double sign = hyperbolic(fam) ? -1.0 : 1.0;
  const double phi2 = sign * (drd * r - rd) / (r * r * r);
  Mat Gq(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) Gq(a, b) = ambient_pair(fam, f.th1[a], f.th1[b]);

  out.S = Tensor4(m);
  out.D = Tensor4(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) {
          out.S(a, b, c, d) =
              phi2 * (Gq(a, b) * Gq(c, d) + Gq(a, c) * Gq(b, d) + Gq(a, d) * Gq(b, c));
          out.D(a, b, c, d) = f.et3[(a * m + b) * m + c].dot(f.th1[d]);
        }

  out.Kabc = Tensor3(m);
  for (size_t i = 0; i < out.Kabc.v.size(); ++i) out.Kabc.v[i] = out.T.v[i] - 3.0 * out.C.v[i];

  // K_ab = C_cda C_efb g^ce g^df + 2 H_ac H_bd g^cd (unit normal, g^kk = 1).
  out.Kab = Mat::Zero(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double acc = 0.0;
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d)
          for (int e = 0; e < m; ++e)
            for (int ff = 0; ff < m; ++ff)
              acc += out.C(c, d, a) * out.C(e, ff, b) * gi(c, e) * gi(d, ff);
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) acc += 2.0 * G.H(a, c) * G.H(b, d) * gi(c, d);
      out.Kab(a, b) = acc;
    }

  out.Kabcd = Tensor4(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) {
          double acc = 0.0;
          for (int e = 0; e < m; ++e)
            for (int ff = 0; ff < m; ++ff)
              acc += (out.C(e, a, b) + out.C(a, b, e) - out.T(a, b, e)) * out.C(ff, c, d) *
                     gi(e, ff);
          out.Kabcd(a, b, c, d) = out.S(a, b, c, d) - 4.0 * out.D(a, b, c, d) + 12.0 * acc;
        }

  out.bias = Vec::Zero(m);
  for (int a = 0; a < m; ++a)
    for (int d = 0; d < m; ++d)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c) out.bias[a] += gi(a, d) * out.C(b, c, d) * gi(b, c);

  LevelContractions& t = out.contractions;
  t.KabGab = (out.Kab.array() * gi.array()).sum();
  t.Kabcd3g = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d)
          t.Kabcd3g += out.Kabcd(a, b, c, d) *
                       (gi(a, b) * gi(c, d) + gi(a, c) * gi(b, d) + gi(a, d) * gi(b, c));

  static const std::vector<std::array<int, 6>> matchings = perfect_matchings6();
  t.KKg15 = 0.0;
  std::array<int, 6> idx{};
  const int total = static_cast<int>(std::pow(m, 6));
  for (int code = 0; code < total; ++code) {
    int rem = code;
    for (int p = 5; p >= 0; --p) {
      idx[p] = rem % m;
      rem /= m;
    }
    const double kk = out.Kabc(idx[0], idx[1], idx[2]) * out.Kabc(idx[3], idx[4], idx[5]);
    if (kk == 0.0) continue;
    double gsum = 0.0;
    for (const auto& mt : matchings) {
      gsum += gi(idx[mt[0]], idx[mt[1]]) * gi(idx[mt[2]], idx[mt[3]]) * gi(idx[mt[4]], idx[mt[5]]);
    }
    t.KKg15 += kk * gsum;
  }

  t.HA2 = 0.0;
  const Mat Q = k1 * G.K + k2 * G.g * G.H_mean;
  double q1 = 0.0, q2 = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) {
          q1 += Q(a, b) * (Q(c, d) - 2.0 * G.H(c, d)) * gi(a, c) * gi(b, d);
          q2 += Q(a, b) * (Q(c, d) - G.H(c, d)) *
                (gi(a, b) * gi(c, d) + gi(a, c) * gi(b, d) + gi(a, d) * gi(b, c)) / 3.0;
        }
  t.Q1 = q1;
  t.Q2 = q2;
  return out;
}

}  // namespace seqgeom
