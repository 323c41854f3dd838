#pragma once

#include <stdexcept>

namespace seqgeom {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/**
 * Modified Bessel function of the first kind I_order(x).
 *
 * Supported orders are integers and half-integers in [0, 20]. Half-integer
 * orders use the elementary closed form when x >= 2*order and the power
 * series otherwise; integer orders use the series for x <= 20 and the
 * Hankel asymptotic expansion beyond.
 */
double bessel_i(double order, double x);

/**
 * Modified Bessel function of the third kind K_order(x).
 *
 * Half-integer orders are exact finite sums. Integer orders are evaluated
 * from K_n(x) = int_0^inf exp(-x cosh t) cosh(n t) dt.
 */
double bessel_k(double order, double x);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed directly.
double gamma_q(double a, double x);

double chi2_cdf(double df, double x);
double chi2_sf(double df, double x);

/// Upper alpha point of chi-square with df degrees of freedom: P(X > q) = alpha.
double chi2_quantile(int df, double alpha);

/// Surface area of the unit dim-sphere embedded in R^{dim+1}; S_0 = 2.
double unit_sphere_area(int dim);

}  // namespace seqgeom
