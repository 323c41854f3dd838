#include "seqgeom/power_theory.hpp"

#include <cmath>
#include <stdexcept>

#include "seqgeom/radial.hpp"
#include "seqgeom/special_functions.hpp"

namespace seqgeom {
namespace {

// The xi integrands are linear in four radial moments over [0, c0].
struct RadialMoments {
  double z0 = 0.0;   // int Z^(0)
  double z2 = 0.0;   // int Z^(2)
  double rz1 = 0.0;  // int r Z^(1)
  double rz3 = 0.0;  // int r Z^(3)
};

RadialMoments radial_moments(int m, double s, double c0, const QuadratureSpec& spec) {
  RadialMoments out;
  out.z0 = integrate([&](double r) { return z_kernel({m, 0, s, r}); }, 0.0, c0, spec).value;
  out.z2 = integrate([&](double r) { return z_kernel({m, 2, s, r}); }, 0.0, c0, spec).value;
  out.rz1 = integrate([&](double r) { return r * z_kernel({m, 1, s, r}); }, 0.0, c0, spec).value;
  out.rz3 = integrate([&](double r) { return r * z_kernel({m, 3, s, r}); }, 0.0, c0, spec).value;
  return out;
}

PowerCoefficients raw_coefficients(const PowerContext& ctx, double s, const QuadratureSpec& spec) {
  const int m = ctx.m;
  const double c0 = ctx.c0;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double zb0 = z_kernel({m, 0, s, c0});
  const double zb1 = z_kernel({m, 1, s, c0});
  const double zb2 = z_kernel({m, 2, s, c0});
  const RadialMoments mo = radial_moments(m, s, c0, spec);

  // Integrals of f_0 .. f_4 over [0, c0].
  const double if1 = -m * s * mo.rz1 + s2 * ((m + 2) * mo.z0 - 2.0 * m * mo.z2) +
                     2.0 * s3 * (mo.rz1 - mo.rz3);
  const double if2 = s * mo.rz1 - s2 * (2.0 * mo.z0 - m * mo.z2) - s3 * (mo.rz1 - mo.rz3);
  const double if3 = -2.0 * m * s * mo.rz1 + 2.0 * m * s2 * mo.z0;
  const double if4 = 2.0 * s * mo.rz1 - 2.0 * s2 * mo.z0;
  const double if0 = -s * mo.rz1 + s2 * mo.z0;

  const double pre = 1.0 / (2.0 * m * (m + 2));
  const double c02 = c0 * c0;
  PowerCoefficients c;
  c.s = s;
  c.xi1 = pre * (2.0 * c02 * s * zb1 - 2.0 * c0 * s2 * (zb0 - zb2) + if1);
  c.xi2prime = pre * (c02 * s * zb1 + c0 * s2 * (zb0 - zb2) + if2);
  c.xi3 = pre * (4.0 * c02 * s * zb1 - 2.0 * c0 * s2 * zb0 + if3);
  c.xi4 = pre * (2.0 * c02 * s * zb1 - c0 * s2 * zb0 + if4);
  c.xi0 = if0 / (4.0 * m);
  c.xi2 = c.xi1 + m * c.xi2prime;
  c.J1 = c.xi3 / (2.0 * c.xi1);
  c.J2 = c.xi4 / (2.0 * c.xi2prime);
  c.K1 = c.J1;
  c.K2 = c.J2 + c.xi1 * (c.J1 - c.J2) / c.xi2;
  return c;
}

}  // namespace

PowerContext PowerContext::make(int m, double alpha) {
  if (m < 2) throw std::invalid_argument("PowerContext: m must be >= 2");
  PowerContext ctx;
  ctx.m = m;
  ctx.alpha = alpha;
  ctx.c0 = std::sqrt(chi2_quantile(m, alpha));
  return ctx;
}

QuadratureSpec coefficient_spec() { return {1e-13, 1e-11, 400}; }

double envelope_power_first(const PowerContext& ctx, double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("envelope_power_first: s must be >= 0");
  const double inside = integrate_z(ctx.m, 0, s, 0.0, ctx.c0, {1e-14, 1e-12, 400});
  return 1.0 - inside;
}

PowerCoefficients coefficients(const PowerContext& ctx, double s, const QuadratureSpec& spec) {
  if (!(s >= 0.0)) throw std::invalid_argument("coefficients: s must be >= 0");
  if (s > 0.0) return raw_coefficients(ctx, s, spec);
  // Every xi carries a factor s; J1, J2 are 0/0 and taken from s = kLimitS.
  const PowerCoefficients near = raw_coefficients(ctx, kLimitS, spec);
  PowerCoefficients c;
  c.s = 0.0;
  c.J1 = near.J1;
  c.J2 = near.J2;
  c.K1 = near.K1;
  c.K2 = near.K2;
  c.limit = true;
  return c;
}

DeltaP delta_p(const PowerCoefficients& c, double k1, double k2) {
  const double d1 = k1 - c.K1;
  const double d2 = k2 - c.K2;
  return {c.xi1 * d1 * d1, c.xi2 * d2 * d2};
}

DeltaP delta_p(const PowerContext& ctx, double s, double k1, double k2) {
  return delta_p(coefficients(ctx, s), k1, k2);
}

double third_order_loss(const PowerCoefficients& c, double k1, double k2,
                        const CurvatureScalars& sc) {
  const DeltaP dp = delta_p(c, k1, k2);
  return sc.kappa2 * dp.dp1 + sc.gamma2 * dp.dp2 + sc.HA2 * c.xi0;
}

double third_order_loss(const PowerContext& ctx, double s, double k1, double k2,
                        const CurvatureScalars& scalars) {
  return third_order_loss(coefficients(ctx, s), k1, k2, scalars);
}

HermitePolyValues hermite_values(int m, double c0) {
  const double c2 = c0 * c0;
  HermitePolyValues h;
  h.h1 = c0;
  h.h3 = c2 * c0 - (m + 2) * c0;
  h.h5 = c2 * c2 * c0 - 2.0 * (m + 4) * c2 * c0 + (m + 2.0) * (m + 4.0) * c0;
  return h;
}

HermitePolyValues hermite_values(const PowerContext& ctx) { return hermite_values(ctx.m, ctx.c0); }

LevelCorrection level_correction(const PowerContext& ctx, const LevelContractions& t) {
  const double m = ctx.m;
  const HermitePolyValues h = hermite_values(ctx);
  LevelCorrection out;
  out.eps0 = t.KabGab * h.h1 / (4.0 * m) + t.Kabcd3g * h.h3 / (24.0 * m * (m + 2.0)) +
             t.KKg15 * h.h5 / (72.0 * m * (m + 2.0) * (m + 4.0));
  out.eps1 = (t.HA2 / (4.0 * m) + t.Q1 / (2.0 * m)) * h.h1 + t.Q2 * h.h3 / (2.0 * m * (m + 2.0));
  return out;
}

HermiteBallIntegrals hermite_ball_integrals(const PowerContext& ctx) {
  // The boundary density Z_m^(0)(0, c0) multiplies each closed form.
  const double m = ctx.m;
  const double zb = z_kernel({ctx.m, 0, 0.0, ctx.c0});
  const HermitePolyValues h = hermite_values(ctx);
  HermiteBallIntegrals out;
  out.beta2 = -h.h1 * zb / m;
  out.beta4 = -h.h3 * zb / (m * (m + 2.0));
  out.beta6 = -h.h5 * zb / (m * (m + 2.0) * (m + 4.0));
  return out;
}

}  // namespace seqgeom
