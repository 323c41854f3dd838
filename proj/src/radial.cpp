#include "seqgeom/radial.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "seqgeom/special_functions.hpp"

namespace seqgeom {
namespace {

// Integral over [0, pi/2] of sin^{m-2} cos^l [e^{a c - shift} +- e^{-a c - shift}], using the
// reflection phi -> pi - phi. Odd l gives the antisymmetric (sinh-type) combination.
double folded_angular(int m, int l, double a, double shift, const QuadratureSpec& spec) {
  const bool odd = (l % 2) == 1;
  auto f = [=](double phi) {
    const double c = std::cos(phi);
    const double sn = std::sin(phi);
    const double ac = a * c;
    const double e = std::exp(ac - shift);
    const double comb = odd ? e * (-std::expm1(-2.0 * ac)) : e * (1.0 + std::exp(-2.0 * ac));
    return std::pow(sn, m - 2) * std::pow(c, l) * comb;
  };
  return integrate(f, 0.0, 0.5 * std::numbers::pi, spec).value;
}

}  // namespace

void RadialKernelArgs::validate() const {
  if (m < 2) throw std::invalid_argument("RadialKernelArgs: m must be >= 2");
  if (l < 0 || l > 3) throw std::invalid_argument("RadialKernelArgs: l must be in 0..3");
  if (!(s >= 0.0) || !(r >= 0.0)) throw std::invalid_argument("RadialKernelArgs: s, r must be >= 0");
}

QuadratureSpec angular_spec() { return {1e-300, 1e-13, 200}; }

double a_kernel(const RadialKernelArgs& args, const QuadratureSpec& spec) {
  args.validate();
  return folded_angular(args.m, args.l, args.s * args.r, 0.0, spec);
}

double z_kernel(const RadialKernelArgs& args, const QuadratureSpec& spec) {
  args.validate();
  if (args.r == 0.0) return 0.0;
  const int m = args.m;
  const double shift = 0.5 * (args.s * args.s + args.r * args.r);
  const double pref = std::pow(2.0 * std::numbers::pi, -0.5 * m) * std::pow(args.r, m - 1) *
                      unit_sphere_area(m - 2);
  return pref * folded_angular(m, args.l, args.s * args.r, shift, spec);
}

double radial_truncation(int m, double s) {
  auto z = [&](double r) { return z_kernel({m, 0, s, r}); };
  const double step = 0.25;
  double r = step;
  double peak = z(r);
  double prev = peak;
  // Walk to the mode, then on until the density falls under 1e-16 of it.
  for (double next = z(r + step); next >= prev; next = z(r + step)) {
    r += step;
    prev = next;
  }
  peak = std::max(peak, prev);
  while (z(r) >= 1e-16 * peak) r += step;
  return r;
}

double integrate_z(int m, int l, double s, double lo, double hi, const QuadratureSpec& outer) {
  if (!(lo <= hi)) throw std::invalid_argument("integrate_z: need lo <= hi");
  auto f = [&](double r) { return z_kernel({m, l, s, r}); };
  return integrate(f, lo, hi, outer).value;
}

}  // namespace seqgeom
