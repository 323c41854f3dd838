#include "seqgeom/sampling.hpp"

#include <cmath>
#include <numbers>

namespace seqgeom {
namespace {

void require_m2(const CurvedFamily& fam) {
  if (fam.m != 2) throw std::invalid_argument("exact samplers support m = 2 only");
}

}  // namespace

Mat frame_transport(const CurvedFamily& fam, const Vec& u) {
  if (u.size() != fam.m) throw std::invalid_argument("frame_transport: wrong dimension");
  const int n = fam.n();
  Mat T = Mat::Identity(n, n);
  for (int a = 0; a < fam.m; ++a) {
    Mat R = Mat::Identity(n, n);
    if (fam.model == Model::Hyperboloid && a == 0) {
      const double c = std::cosh(u[a]), s = std::sinh(u[a]);
      R(0, 0) = c;
      R(0, 1) = s;
      R(1, 0) = s;
      R(1, 1) = c;
    } else {
      const double c = std::cos(u[a]), s = std::sin(u[a]);
      R(a, a) = c;
      R(a, a + 1) = -s;
      R(a + 1, a) = s;
      R(a + 1, a + 1) = c;
    }
    T = R * T;
  }
  return T;
}

double pole_colatitude_vmf(double r, double U) {
  // Same expression in two forms; log1p keeps the small-r case accurate.
  if (r < 0.5) return 1.0 + std::log1p((1.0 - U) * std::expm1(-2.0 * r)) / r;
  return 1.0 + std::log(U + (1.0 - U) * std::exp(-2.0 * r)) / r;
}

double pole_colatitude_hyperboloid(double r, double U) { return 1.0 - std::log(U) / r; }

Sampler::Sampler(const CurvedFamily& fam, const Vec& u)
    : fam_(fam), transport_(frame_transport(fam, u)) {
  require_m2(fam);
}

void Sampler::draw(RngStream& stream, double* out) const {
  const double U = stream.uniform_open();
  const double phi = 2.0 * std::numbers::pi * stream.uniform_open();
  double p[3];
  if (fam_.model == Model::VonMisesFisher) {
    const double t = pole_colatitude_vmf(fam_.r, U);
    const double rho = std::sqrt(std::max(0.0, 1.0 - t * t));
    p[0] = t;
    p[1] = rho * std::cos(phi);
    p[2] = rho * std::sin(phi);
  } else {
    const double w = 1.0 - std::log(U) / fam_.r;
    const double rho = std::sqrt(w * w - 1.0);
    p[0] = w;
    p[1] = rho * std::cos(phi);
    p[2] = rho * std::sin(phi);
  }
  for (int i = 0; i < 3; ++i)
    out[i] = transport_(i, 0) * p[0] + transport_(i, 1) * p[1] + transport_(i, 2) * p[2];
}

Vec Sampler::draw(RngStream& stream) const {
  Vec x(3);
  draw(stream, x.data());
  return x;
}

Vec sample_vmf(const CurvedFamily& fam, const Vec& u, RngStream& stream) {
  if (fam.model != Model::VonMisesFisher) throw std::invalid_argument("sample_vmf: wrong model");
  return Sampler(fam, u).draw(stream);
}

Vec sample_hyperboloid(const CurvedFamily& fam, const Vec& u, RngStream& stream) {
  if (fam.model != Model::Hyperboloid) {
    throw std::invalid_argument("sample_hyperboloid: wrong model");
  }
  return Sampler(fam, u).draw(stream);
}

Vec sample(const CurvedFamily& fam, const Vec& u, RngStream& stream) {
  return Sampler(fam, u).draw(stream);
}

}  // namespace seqgeom
