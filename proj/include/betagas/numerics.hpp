#pragma once

// Quadrature over disks and annuli, and bracketed root finding.
//
// Every area integral in this library is taken against the normalized area
// measure dA = dx dy / pi, so the disk of radius r has measure r^2.

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace betagas {

using cplx = std::complex<double>;

/// Real-valued field on the plane.
using Field = std::function<double(cplx)>;

struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  /// Maximum dyadic depth of any panel.
  int max_refinements = 14;
  /// Initial panel counts in the radial and angular directions.
  int radial_panels = 4;
  int angular_panels = 4;

  /// Throws std::invalid_argument on tolerances <= 0, panels < 4 or
  /// max_refinements < 1.
  void validate() const;
};

/// Adaptive refinement hit max_refinements before the error target was met.
class RefinementExhausted : public std::runtime_error {
 public:
  RefinementExhausted(double estimate, double error_bound);
  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

/// The root finder was handed endpoints with the same sign.
class BracketError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Integral of f over the disk D_radius(center) with respect to dA.
///
/// Tensor-product Gauss-Legendre panels in (r, angle), refined
/// dyadically where the embedded error estimate is largest until the total
/// error is below max(abs_tol, rel_tol * |result|).
double integrate_disk(const Field& f, cplx center, double radius,
                      const QuadratureSpec& spec = {});

/// Integral over the annulus inner < |z - center| < outer.
double integrate_annulus(const Field& f, cplx center, double inner, double outer,
                         const QuadratureSpec& spec = {});

struct TruncatedIntegral {
  double value = 0.0;
  /// Bound (or heuristic estimate) on the omitted integral beyond the cutoff.
  double tail_bound = 0.0;
};

/// Integral over D_cutoff(center) standing in for the whole-plane integral.
/// When tail_bound is not supplied the remainder is estimated as
/// cutoff^2 * max |f| over the cutoff circle.
TruncatedIntegral integrate_plane_truncated(const Field& f, cplx center,
                                            double cutoff_radius,
                                            const QuadratureSpec& spec = {},
                                            std::optional<double> tail_bound = std::nullopt);

/// Root of a monotone g on [lo, hi] with g(lo) g(hi) <= 0, located to a
/// bracket of width <= tol. TOMS 748 with a bisection fallback.
double find_root_monotone(const std::function<double(double)>& g, double lo, double hi,
                          double tol = 1e-12);

/// Standard error of the mean of a correlated series by non-overlapping
/// batch means (at most `batches` batches).
double batch_means_std_error(std::span<const double> values, int batches = 20);

}  // namespace betagas
