#pragma once

#include "seqgeom/quadrature.hpp"

namespace seqgeom {

struct PowerContext {
  int m = 2;
  double alpha = 0.05;
  double c0 = 0.0;  // sqrt of the upper alpha point of chi-square(m)

  static PowerContext make(int m, double alpha);
};

struct PowerCoefficients {
  double s = 0.0;
  double xi0 = 0.0;
  double xi1 = 0.0;
  double xi2prime = 0.0;
  double xi2 = 0.0;  // xi1 + m * xi2prime
  double xi3 = 0.0;
  double xi4 = 0.0;
  double J1 = 0.0;
  double J2 = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
  /// True when J/K are the s -> 0+ limit evaluated at kLimitS.
  bool limit = false;
};

struct CurvatureScalars {
  double kappa2 = 0.0;
  double gamma2 = 0.0;
  double HA2 = 0.0;
};

struct HermitePolyValues {
  double h1 = 0.0;
  double h3 = 0.0;
  double h5 = 0.0;
};

/// Scalar contractions of the Edgeworth tensors consumed by level_correction.
struct LevelContractions {
  double KabGab = 0.0;   // K_ab g^ab
  double Kabcd3g = 0.0;  // K_abcd 3 g^(ab g^cd)
  double KKg15 = 0.0;    // K_abc K_def 15 g^(ab g^cd g^ef)
  double HA2 = 0.0;      // squared (-1)-curvature of the ancillary family
  double Q1 = 0.0;       // Q_ab (Q_cd - 2 H_cd) g^ac g^bd
  double Q2 = 0.0;       // Q_ab (Q_cd - H_cd) g^(ab g^cd)
};

/// N*eps0 and N*eps1: radial shift of the critical boundary restoring level alpha.
struct LevelCorrection {
  double eps0 = 0.0;
  double eps1 = 0.0;
};

struct DeltaP {
  double dp1 = 0.0;
  double dp2 = 0.0;
};

/// Coefficients of the ball integrals of the tensorial Hermite polynomials under the
/// standard normal: int_{|u|<c0} h^{ab} phi = beta2 g^ab, h^{abcd} -> beta4 * 3g^(ab g^cd),
/// h^{abcdef} -> beta6 * 15 g^(ab g^cd g^ef).
struct HermiteBallIntegrals {
  double beta2 = 0.0;
  double beta4 = 0.0;
  double beta6 = 0.0;
};

inline constexpr double kLimitS = 1e-4;

QuadratureSpec coefficient_spec();

/// P_1*(s) = 1 - int_0^c0 Z_m^(0)(s, r) dr.
double envelope_power_first(const PowerContext& ctx, double s);

PowerCoefficients coefficients(const PowerContext& ctx, double s,
                               const QuadratureSpec& spec = coefficient_spec());

DeltaP delta_p(const PowerContext& ctx, double s, double k1, double k2);
DeltaP delta_p(const PowerCoefficients& c, double k1, double k2);

double third_order_loss(const PowerContext& ctx, double s, double k1, double k2,
                        const CurvatureScalars& scalars);
double third_order_loss(const PowerCoefficients& c, double k1, double k2,
                        const CurvatureScalars& scalars);

HermitePolyValues hermite_values(const PowerContext& ctx);
HermitePolyValues hermite_values(int m, double c0);

LevelCorrection level_correction(const PowerContext& ctx, const LevelContractions& t);

HermiteBallIntegrals hermite_ball_integrals(const PowerContext& ctx);

}  // namespace seqgeom
