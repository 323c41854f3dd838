#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqgeom/power_theory.hpp"

namespace seqgeom {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Model { VonMisesFisher, Hyperboloid };

std::string to_string(Model model);
Model model_from_string(const std::string& name);

/// Margin around coordinate singularities (radians).
inline constexpr double kSingularityMargin = 1e-6;

class SingularCoordinateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ChartError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An (m+1, m)-curved exponential family on the sphere or the hyperboloid.
struct CurvedFamily {
  Model model = Model::VonMisesFisher;
  int m = 2;
  double r = 1.0;
  double r_dagger = 0.0;

  int n() const { return m + 1; }

  static CurvedFamily make(Model model, int m, double r);
};

/// Mean resultant length: I ratio on the sphere, K ratio on the hyperboloid.
double mean_resultant_length(Model model, int m, double r);
/// d r_dagger / d r from the Bessel recurrences.
double mean_resultant_length_derivative(Model model, int m, double r, double r_dagger);

/// Dense rank-3 / rank-4 arrays over m coordinate indices.
struct Tensor3 {
  int m = 0;
  std::vector<double> v;
  Tensor3() = default;
  explicit Tensor3(int dim) : m(dim), v(dim * dim * dim, 0.0) {}
  double& operator()(int a, int b, int c) { return v[(a * m + b) * m + c]; }
  double operator()(int a, int b, int c) const { return v[(a * m + b) * m + c]; }
  double max_abs() const;
};

struct Tensor4 {
  int m = 0;
  std::vector<double> v;
  Tensor4() = default;
  explicit Tensor4(int dim) : m(dim), v(dim * dim * dim * dim, 0.0) {}
  double& operator()(int a, int b, int c, int d) { return v[((a * m + b) * m + c) * m + d]; }
  double operator()(int a, int b, int c, int d) const { return v[((a * m + b) * m + c) * m + d]; }
  double max_abs() const;
};

/// Unit direction xi(u) and its coordinate derivatives up to third order.
struct DirectionJet {
  Vec xi;
  std::vector<Vec> d1;  // [a]
  std::vector<Vec> d2;  // [a*m + b]
  std::vector<Vec> d3;  // [(a*m + b)*m + c]
};

DirectionJet direction_jet(const CurvedFamily& fam, const Vec& u, int order);
/// Unit direction xi(u) on S^m or H^m.
Vec direction(const CurvedFamily& fam, const Vec& u);

/// theta = r J xi (J flips the first sign on the hyperboloid); eta = r_dagger xi.
struct Embedding {
  Vec theta;
  Vec eta;
};

/// The embedding is smooth for every finite u; only frames and gauges are singular.
Embedding embed(const CurvedFamily& fam, const Vec& u);

/// Throws SingularCoordinateError when u lies within kSingularityMargin of a point where
/// the metric degenerates (include_last also checks sin u^m, which the gauge needs).
void check_regular(const CurvedFamily& fam, const Vec& u, bool include_last);

struct GeometryAt {
  Vec u;
  Mat g;
  Mat g_inv;
  Mat B_theta;  // m x n, rows d_a theta
  Mat B_eta;    // m x n, rows d_a eta
  Vec normal_lower;  // pairs to zero with B_theta rows
  Vec normal_upper;  // pairs to zero with B_eta rows
  Mat H;             // exponential embedding curvature H_ab
  double H_mean = 0.0;
  Mat K;  // H - g H_mean
  double nu = 0.0;
  Vec gauge_score;  // d_a log nu
  CurvatureScalars scalars;
};

GeometryAt geometry(const CurvedFamily& fam, const Vec& u);

/// Metric g_ab = d_a theta . d_b eta only (cheaper than geometry()).
Mat metric(const CurvedFamily& fam, const Vec& u);

double gauge_nu(const CurvedFamily& fam, const Vec& u);
Vec gauge_score(const CurvedFamily& fam, const Vec& u);

/// Bias constant c of the stopping rule; independent of u for both models.
double bias_c(const CurvedFamily& fam, const Vec& u);

struct ConformalChart {
  Vec utilde;    // u~(u)
  Mat jacobian;  // d u~^b / d u^a at base, entry (b, a)
  Mat g_tilde;   // metric in u~ coordinates at base
};

/// u~^b = nu(u) eta_b(u), b = 1..m.
Vec conformal_coords(const CurvedFamily& fam, const Vec& u);
Mat conformal_jacobian(const CurvedFamily& fam, const Vec& u);
ConformalChart conformal_chart(const CurvedFamily& fam, const Vec& u, const Vec& base);

/// Central-difference step for coordinate u_a: cbrt(eps) * max(1, |u_a|) * scale.
double fd_step(double ua, double scale = 1.0);

/// Mixture connection Gamma_abc = d_a d_b eta . d_c theta from analytic second derivatives.
Tensor3 connection_m(const CurvedFamily& fam, const Vec& u);
/// Exponential connection d_a d_b theta . d_c eta.
Tensor3 connection_e(const CurvedFamily& fam, const Vec& u);

/// Mixture connection by central differences of the analytic eta frame.
Tensor3 fd_connection(const CurvedFamily& fam, const Vec& u, double step_scale = 1.0);

/**
 * Gauge-scaled mixture connection expressed in the conformal coordinates u~.
 * Finite differences of the eta frame and of the chart Jacobian; vanishes for
 * both models when the conformal chart is a (-1)-affine coordinate system.
 */
Tensor3 fd_connection_scaled(const CurvedFamily& fam, const Vec& base, double step_scale = 1.0);

/// eta(u) + v xi(u): the mixture-flat line orthogonal to the model at u.
Vec w_chart(const CurvedFamily& fam, const Vec& u, double v);

/// Ambient log-normaliser psi(theta) and its gradient, for arbitrary theta.
double ambient_psi(const CurvedFamily& fam, const Vec& theta);
Vec ambient_eta(const CurvedFamily& fam, const Vec& theta);

struct AppendixTensors {
  Tensor3 C;   // Gamma^(-1)_abc
  Tensor3 T;   // skewness, Gamma^(-1) - Gamma^(1)
  Tensor4 S;   // fourth cumulant pulled back
  Tensor4 D;   // d_a d_b d_c eta . d_d theta
  Tensor3 Kabc;
  Mat Kab;
  Tensor4 Kabcd;
  Vec bias;    // Gamma^(-1)a_bc g^bc
  LevelContractions contractions;
};

/// Edgeworth tensors at u. (k1, k2) fix the ancillary angles Q = k1 K + k2 g H_mean.
AppendixTensors appendix_tensors(const CurvedFamily& fam, const Vec& u, double k1 = 0.0,
                                 double k2 = 0.0);

/// Same skewness contraction by the direct formula in theta and eta derivatives.
Tensor3 skewness_direct(const CurvedFamily& fam, const Vec& u);

}  // namespace seqgeom
