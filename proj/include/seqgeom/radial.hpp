#pragma once

#include "seqgeom/quadrature.hpp"

namespace seqgeom {

struct RadialKernelArgs {
  int m = 2;     // dimension, >= 2
  int l = 0;     // moment order, 0..3
  double s = 0;  // noncentrality distance
  double r = 0;  // radial coordinate

  void validate() const;
};

/// Default tolerances for the angular integral.
QuadratureSpec angular_spec();

/// A_m^(l)(s, r) = int_0^pi sin^{m-2}(phi) cos^l(phi) exp(s r cos phi) dphi.
double a_kernel(const RadialKernelArgs& args, const QuadratureSpec& spec = angular_spec());

/**
 * Z_m^(l)(s, r) = (2 pi)^{-m/2} r^{m-1} S_{m-2} exp(-(s^2+r^2)/2) A_m^(l)(s, r).
 *
 * For l = 0 this is the density of the distance sqrt(X) where X is
 * noncentral chi-square with m degrees of freedom and noncentrality s^2.
 * The Gaussian factor is folded into the angular integrand so large s*r
 * does not overflow.
 */
double z_kernel(const RadialKernelArgs& args, const QuadratureSpec& spec = angular_spec());

/// Radius past the peak of Z_m^(0)(s, .) where it drops below 1e-16 of the peak.
double radial_truncation(int m, double s);

/// int_lo^hi Z_m^(l)(s, r) dr.
double integrate_z(int m, int l, double s, double lo, double hi,
                   const QuadratureSpec& outer = {1e-13, 1e-11, 400});

}  // namespace seqgeom
