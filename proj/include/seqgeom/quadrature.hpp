#pragma once

#include <functional>
#include <stdexcept>

namespace seqgeom {

struct QuadratureSpec {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  int max_subdivisions = 200;

  /// Throws std::invalid_argument when a tolerance is not positive or
  /// max_subdivisions < 8.
  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
  int evaluations = 0;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, QuadratureResult best)
      : std::runtime_error(what), best_(best) {}
  const QuadratureResult& best() const { return best_; }

 private:
  QuadratureResult best_;
};

/**
 * Globally adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
 *
 * The interval with the largest error estimate is bisected until the total
 * error meets max(abs_tol, rel_tol * |value|). Throws QuadratureError with
 * the best estimate if the subdivision budget runs out or f is not finite.
 */
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec = {});

}  // namespace seqgeom
