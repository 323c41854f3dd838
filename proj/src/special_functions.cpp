#include "seqgeom/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "seqgeom/quadrature.hpp"

namespace seqgeom {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxOrder = 20.0;

enum class OrderKind { Integer, HalfInteger };

OrderKind classify_order(double order, const char* fn) {
  if (!(order >= 0.0) || order > kMaxOrder) {
    throw DomainError(std::string(fn) + ": unsupported order " + std::to_string(order));
  }
  const double twice = 2.0 * order;
  if (twice != std::round(twice)) {
    throw DomainError(std::string(fn) + ": order must be an integer or half-integer");
  }
  return (order == std::round(order)) ? OrderKind::Integer : OrderKind::HalfInteger;
}

// Power series sum_k (x/2)^{2k+v} / (k! Gamma(k+v+1)). All terms positive.
double bessel_i_series(double v, double x) {
  const double q = 0.25 * x * x;
  double term = std::exp(v * std::log(0.5 * x) - std::lgamma(v + 1.0));
  double sum = term;
  for (int k = 1; k < 10000; ++k) {
    term *= q / (k * (k + v));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

// Hankel expansion e^x / sqrt(2 pi x) * sum (-1)^k a_k(v) / x^k, stopped at the smallest term.
double bessel_i_asymptotic(double v, double x) {
  const double mu = 4.0 * v * v;
  double term = 1.0;
  double sum = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    if (std::fabs(term) >= prev) break;
    sum += term;
    prev = std::fabs(term);
    if (prev < 1e-17 * std::fabs(sum)) break;
  }
  return std::exp(x) / std::sqrt(2.0 * kPi * x) * sum;
}

// I_{n+1/2} from I_{-1/2} = sqrt(2/(pi x)) cosh x and I_{1/2} = sqrt(2/(pi x)) sinh x.
double bessel_i_half_closed(double order, double x) {
  const double pref = std::sqrt(2.0 / (kPi * x));
  double below = pref * std::cosh(x);
  double cur = pref * std::sinh(x);
  for (double v = 0.5; v < order; v += 1.0) {
    const double next = below - (2.0 * v / x) * cur;
    below = cur;
    cur = next;
  }
  return cur;
}

double bessel_k_half(double order, double x) {
  const int n = static_cast<int>(order - 0.5);
  // sum_{k=0}^n (n+k)! / (k! (n-k)! (2x)^k)
  double sum = 0.0;
  double coeff = 1.0;  // (n+k)!/(k!(n-k)!) at k = 0
  double pw = 1.0;
  for (int k = 0; k <= n; ++k) {
    sum += coeff / pw;
    coeff *= static_cast<double>((n + k + 1) * (n - k)) / (k + 1);
    pw *= 2.0 * x;
  }
  return std::sqrt(kPi / (2.0 * x)) * std::exp(-x) * sum;
}

double bessel_k_integer(double order, double x) {
  const double n = order;
  // Exponent f(t) = n t - x (cosh t - 1), maximised where sinh t = n / x.
  const double tpk = (n > 0.0) ? std::asinh(n / x) : 0.0;
  auto f = [&](double t) { return n * t - x * (std::cosh(t) - 1.0); };
  const double fpk = f(tpk);
  double hi = tpk + 1.0;
  while (f(hi) > fpk - 48.0) hi = tpk + 2.0 * (hi - tpk);
  auto g = [&](double t) {
    return std::exp(f(t) - fpk) * 0.5 * (1.0 + std::exp(-2.0 * n * t));
  };
  QuadratureSpec spec{1e-300, 1e-14, 400};
  double total = 0.0;
  if (tpk > 0.0) total += integrate(g, 0.0, tpk, spec).value;
  total += integrate(g, tpk, hi, spec).value;
  return total * std::exp(fpk - x);
}

double gamma_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < 100000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_cont_frac(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw DomainError("incomplete gamma: need a > 0, x >= 0");
}

}  // namespace

double bessel_i(double order, double x) {
  const OrderKind kind = classify_order(order, "bessel_i");
  if (!(x > 0.0)) throw DomainError("bessel_i: x must be positive");
  if (kind == OrderKind::HalfInteger) {
    if (x >= 2.0 * order) return bessel_i_half_closed(order, x);
    return bessel_i_series(order, x);
  }
  if (x > 20.0 && x > 2.0 * order * order) return bessel_i_asymptotic(order, x);
  return bessel_i_series(order, x);
}

double bessel_k(double order, double x) {
  const OrderKind kind = classify_order(order, "bessel_k");
  if (!(x > 0.0)) throw DomainError("bessel_k: x must be positive");
  if (kind == OrderKind::HalfInteger) return bessel_k_half(order, x);
  return bessel_k_integer(order, x);
}

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_cont_frac(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_series(a, x);
  return gamma_cont_frac(a, x);
}

double chi2_cdf(double df, double x) { return x <= 0.0 ? 0.0 : gamma_p(0.5 * df, 0.5 * x); }

double chi2_sf(double df, double x) { return x <= 0.0 ? 1.0 : gamma_q(0.5 * df, 0.5 * x); }

double chi2_quantile(int df, double alpha) {
  if (df < 1) throw DomainError("chi2_quantile: df must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("chi2_quantile: alpha must lie in (0,1)");
  const double k = df;
  double lo = 0.0;
  double hi = k;
  while (chi2_sf(k, hi) > alpha) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_sf(k, mid) > alpha) lo = mid; else hi = mid;
  }
  double q = 0.5 * (lo + hi);
  // Newton polish; the survival function decreases with slope -pdf.
  for (int it = 0; it < 3; ++it) {
    const double pdf =
        0.5 * std::exp((0.5 * k - 1.0) * std::log(0.5 * q) - 0.5 * q - std::lgamma(0.5 * k));
    if (!(pdf > 0.0)) break;
    const double step = (chi2_sf(k, q) - alpha) / pdf;
    if (!std::isfinite(step)) break;
    q += step;
  }
  return q;
}

double unit_sphere_area(int dim) {
  if (dim < 0) throw DomainError("unit_sphere_area: negative dimension");
  const double h = 0.5 * (dim + 1);
  return 2.0 * std::pow(kPi, h) / std::tgamma(h);
}

}  // namespace seqgeom
