#pragma once

#include <cstdint>
#include <string>

#include "seqgeom/manifold.hpp"
#include "seqgeom/rng.hpp"

namespace seqgeom {

class DegenerateMleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct SuffStats {
  Vec sum_x;
  std::int64_t count = 0;

  static SuffStats zero(int n);
  void add(const Vec& x);
  void add(const double* x);
  Vec mean() const;
};

enum class Variant { MLT, Wald, LRT, EST, DesignedK };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct TestDesign {
  Variant variant = Variant::MLT;
  double k1 = 0.0;
  double k2 = 0.0;
  double alpha = 0.05;
  Vec u0;

  /// Binds (k1, k2) for the named variants: MLT/Wald (0,0), LRT (0.5,0.5), EST (1,1).
  /// The proportions are only taken from the arguments for DesignedK.
  static TestDesign make(Variant variant, double alpha, const Vec& u0, double k1 = 0.0,
                         double k2 = 0.0);
  double critical_radius() const;
};

struct StoppingConfig {
  double K = 1000.0;
  std::int64_t n_min = 5;
  std::int64_t n_max = 0;  // 0: 10 * K * max(nu(u0), nu(true u)), rounded up
  double epsilon_tilde = 0.0;

  void validate() const;
};

struct TestOutcome {
  double statistic = 0.0;
  bool reject = false;
  std::int64_t tau = 0;
  Vec u_hat;
  bool truncated = false;
};

/// Coordinates of a unit direction on S^m or H^m (last angle in [0, 2 pi)).
Vec direction_to_coords(const CurvedFamily& fam, const Vec& d);

/// Normalised mean direction; Euclidean norm on the sphere, Minkowski on the hyperboloid.
Vec mean_direction(const CurvedFamily& fam, const Vec& xbar);

/// Maximum likelihood estimate: coordinates of the normalised mean direction.
Vec mle(const CurvedFamily& fam, const SuffStats& stats);

/// Wraps a coordinate difference so its last component lies in (-pi, pi].
Vec coordinate_difference(const Vec& u, const Vec& u0);

TestOutcome nonseq_statistic(const CurvedFamily& fam, const TestDesign& design,
                             const SuffStats& stats);

/// Modified estimator u' = u_hat - g^{-1}(u_hat) A (u_hat - u0) of the designed k-test.
Vec designed_estimate(const CurvedFamily& fam, const TestDesign& design, const SuffStats& stats,
                      const Vec& u_hat);

/// -(1/m) g^ab(u_hat) d_a d_b theta(u_hat) . sum_x.
double observed_mean_curvature(const CurvedFamily& fam, const SuffStats& running,
                               const Vec& u_hat);

struct StopCheck {
  bool valid = false;  // false when the MLE is degenerate or nu(u_hat) is singular
  double statistic = 0.0;
  double threshold = 0.0;
  bool stop() const { return valid && statistic >= threshold; }
};

/**
 * Stopping check at the current MLE. Uses the closed forms valid at the MLE:
 * the observed mean curvature equals |sum_x| / r_dagger and nu(u_hat) = 1 / |xi_{m+1}(u_hat)|.
 */
StopCheck stopping_check(const CurvedFamily& fam, double K, double c, const SuffStats& stats);

/// Decision of the sequential test from the sufficient statistics at the stopping time.
TestOutcome sequential_decision(const CurvedFamily& fam, const TestDesign& design,
                                const StoppingConfig& cfg, const SuffStats& at_tau);

std::int64_t default_n_max(const CurvedFamily& fam, double K, const Vec& u0, const Vec& true_u);

TestOutcome sequential_run(const CurvedFamily& fam, const TestDesign& design,
                           const StoppingConfig& cfg, const Vec& true_u, RngStream& stream);

struct EpsilonEstimate {
  double epsilon = 0.0;
  double standard_error = 0.0;
  double level_uncalibrated = 0.0;  // empirical rejection rate at epsilon = 0
  std::int64_t replications = 0;
  std::int64_t truncated = 0;
  bool insufficient = false;  // fewer than 1e4 replications
};

/// Monte Carlo calibration of epsilon under the null. Replication i uses
/// RngStream(stream.master_seed(), i).
EpsilonEstimate calibrate_epsilon(const CurvedFamily& fam, const TestDesign& design,
                                  const StoppingConfig& cfg, std::int64_t replications,
                                  const RngStream& stream, int workers = 1);

}  // namespace seqgeom
