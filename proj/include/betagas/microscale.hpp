#pragma once

// Local Taylor data of the potential at an observation point p: the order k
// of the leading homogeneous part of the Laplacian, tau0, the microscopic
// scale r_n, the holomorphic polynomial H and the constants K and T.

#include <stdexcept>
#include <vector>

#include "betagas/potential.hpp"

namespace betagas {

/// The Laplacian of Q vanishes to every order at the requested point.
class DegeneratePoint : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Smallest k >= 1 whose degree 2k-2 homogeneous Taylor part of dd-bar Q at
/// p is not identically zero. Decided from exact Taylor coefficients.
int homogeneity_order(const PotentialModel& model, cplx p);

/// tau0 with tau0^(-2k) = (dd-bar)^k Q(p) / (k [(k-1)!]^2).
double tau0(const PotentialModel& model, cplx p);

/// Equilibrium-density mass of D_r(p), computed exactly from the Taylor
/// expansion of dd-bar Q about p (the density is polynomial).
double local_mass(const PotentialModel& model, cplx p, double r);

/// Radius r_n with n * local_mass(p, r_n) = 1.
double micro_scale(const PotentialModel& model, cplx p, int n);

/// Coefficients a_0..a_{2k} of H: a_0 = Q(p), a_m = 2 d^m Q(p) / m!.
std::vector<cplx> h_polynomial(const PotentialModel& model, cplx p);
cplx evaluate_polynomial(const std::vector<cplx>& coeffs, cplx zeta);

/// Q_0(zeta) = sum_{i+j=2k, i,j>=1} d^i dbar^j Q(p) / (i! j!) zeta^i zetabar^j.
double dominant_part(const PotentialModel& model, cplx p, cplx zeta);

/// Same sum with absolute values of the coefficients.
double q0_norm(const PotentialModel& model, cplx p);

/// C_n = tau0^(2k) q0 + C n^(-1/2k).
double cn_bound(const PotentialModel& model, cplx p, int n, double C = 0.0);

struct BernsteinConstant {
  double value = 0.0;
  /// Only k = 1 points carry the asymptotic guarantee K -> 4 sqrt(e).
  bool certified = false;
};

/// K = 4 sup_{n >= n0} exp(C_n / 2).
BernsteinConstant bernstein_K(const PotentialModel& model, cplx p, int n0, double C = 0.0);

/// T = max over a polar grid of D_{M r_n}(p) of max(r_n(z)/r_n(p), r_n(p)/r_n(z)).
double t_constant(const PotentialModel& model, cplx p, int n, double M = 3.0);

struct ScaleOptions {
  double M = 3.0;
  /// Unnamed constant inside C_n; zero reproduces the large-n value.
  double C = 0.0;
  /// Defaults to n when <= 0.
  int n0 = 0;
};

struct ScaleInfo {
  cplx center;
  int n = 0;
  int k = 0;
  double tau0 = 0.0;
  double r_n = 0.0;
  std::vector<cplx> h_coeffs;
  double q0 = 0.0;
  double cn_bound = 0.0;
  double K = 0.0;
  bool K_certified = false;
  double T = 1.0;
  double M = 3.0;
};

ScaleInfo scale_info(const PotentialModel& model, cplx p, int n, const ScaleOptions& opts = {});

}  // namespace betagas
