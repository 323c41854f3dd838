#include "seqgeom/quadrature.hpp"

#include <cmath>
#include <queue>
#include <vector>

namespace seqgeom {
namespace {

// Kronrod nodes; odd indices are the 7-point Gauss nodes.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kron += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  const double value = kron * h;
  const double err = std::fabs((kron - gauss) * h);
  if (!std::isfinite(value)) return {a, b, value, value};
  return {a, b, value, err};
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
  }
  if (max_subdivisions < 8) throw std::invalid_argument("QuadratureSpec: max_subdivisions < 8");
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec) {
  spec.validate();
  if (!(a <= b)) throw std::invalid_argument("integrate: need a <= b");
  QuadratureResult out;
  if (a == b) return out;

  std::priority_queue<Segment> heap;
  Segment first = gk15(f, a, b);
  out.evaluations = 15;
  if (!std::isfinite(first.value)) throw QuadratureError("integrate: non-finite integrand", out);
  double total = first.value;
  double err = first.error;
  heap.push(first);
  int splits = 0;
  while (err > std::max(spec.abs_tol, spec.rel_tol * std::fabs(total))) {
    if (splits >= spec.max_subdivisions) {
      out.value = total;
      out.abs_error = err;
      out.subdivisions = splits;
      throw QuadratureError("integrate: subdivision limit reached", out);
    }
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = gk15(f, worst.a, mid);
    Segment right = gk15(f, mid, worst.b);
    out.evaluations += 30;
    ++splits;
    if (!std::isfinite(left.value) || !std::isfinite(right.value)) {
      out.value = total;
      out.abs_error = err;
      out.subdivisions = splits;
      throw QuadratureError("integrate: non-finite integrand", out);
    }
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    // Guard against drift in the running sums once many segments are tiny.
    if (splits % 64 == 0) {
      std::vector<Segment> tmp;
      tmp.reserve(heap.size());
      total = 0.0;
      err = 0.0;
      while (!heap.empty()) {
        tmp.push_back(heap.top());
        heap.pop();
      }
      for (const auto& s : tmp) {
        total += s.value;
        err += s.error;
        heap.push(s);
      }
    }
  }
  out.value = total;
  out.abs_error = err;
  out.subdivisions = splits;
  return out;
}

}  // namespace seqgeom
