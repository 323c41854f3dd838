#pragma once

#include "seqgeom/manifold.hpp"
#include "seqgeom/rng.hpp"

namespace seqgeom {

/**
 * Orthogonal (sphere) or Lorentz (hyperboloid) matrix taking the pole e1 to xi(u).
 * Composition R_m(u_m) ... R_1(u_1), where R_a acts in the (a, a+1) plane and R_1 is
 * a boost on the hyperboloid.
 */
Mat frame_transport(const CurvedFamily& fam, const Vec& u);

/// Exact draw from the von Mises-Fisher law with mean direction xi(u); m = 2 only.
Vec sample_vmf(const CurvedFamily& fam, const Vec& u, RngStream& stream);
/// Exact draw from the hyperboloid law centred at xi(u); m = 2 only.
Vec sample_hyperboloid(const CurvedFamily& fam, const Vec& u, RngStream& stream);
Vec sample(const CurvedFamily& fam, const Vec& u, RngStream& stream);

/**
 * Repeated draws at a fixed u. Precomputes the transport matrix so the per-draw
 * cost is one Philox block and a few elementary functions.
 */
class Sampler {
 public:
  Sampler(const CurvedFamily& fam, const Vec& u);
  Vec draw(RngStream& stream) const;
  /// Writes into out (size n) without allocating.
  void draw(RngStream& stream, double* out) const;

 private:
  CurvedFamily fam_;
  Mat transport_;
};

/// Colatitude variable at the pole: t = cos(angle) for vMF, w = cosh(distance) on H^2.
double pole_colatitude_vmf(double r, double uniform);
double pole_colatitude_hyperboloid(double r, double uniform);

}  // namespace seqgeom
