#pragma once

// Radial external potentials Q(z) = sum_m c_m |z - s|^(2m) with exact
// Wirtinger derivatives, and their disk-shaped droplets.

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "betagas/numerics.hpp"

namespace betagas {

enum class PotentialFamily { ginibre, monomial, radial_polynomial };

/// Raised when a potential violates one of the standing assumptions
/// (growth at infinity, nonnegative Laplacian).
class InvalidPotential : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PotentialModel {
 public:
  /// Q = |z - s|^2.
  static PotentialModel ginibre(cplx symmetry_center = {});
  /// Q = |z - s|^(2k), k >= 1.
  static PotentialModel monomial(int k, cplx symmetry_center = {});
  /// Q = sum_{m=1}^{M} c_m |z - s|^(2m) with c_m >= 0 and c_M > 0.
  static PotentialModel radial_polynomial(std::vector<double> coefficients,
                                          cplx symmetry_center = {});

  PotentialFamily family() const noexcept { return family_; }
  /// c_1..c_M; index 0 holds c_1.
  std::span<const double> coefficients() const noexcept { return coeffs_; }
  int degree() const noexcept { return static_cast<int>(coeffs_.size()); }
  cplx symmetry_center() const noexcept { return center_; }
  /// liminf Q / log|z|^2 at infinity; +inf for every polynomial family.
  double growth_exponent() const noexcept;
  std::string describe() const;

  double evaluate(cplx z) const;
  /// d^i dbar^j Q at z. Orders beyond the polynomial degree give 0.
  cplx wirtinger(cplx z, int i, int j) const;
  /// dd-bar Q, a quarter of the standard Laplacian.
  double laplacian(cplx z) const;
  /// Equilibrium mass of the disk D_r(s) about the symmetry center.
  double radial_mass(double r) const;

 private:
  PotentialModel(PotentialFamily family, std::vector<double> coefficients, cplx center);

  PotentialFamily family_;
  std::vector<double> coeffs_;
  cplx center_;
};

struct RadialDroplet {
  cplx center;
  double outer_radius = 0.0;
};

/// Droplet S = closed disk of radius R about the symmetry center, with
/// total equilibrium mass 1.
RadialDroplet droplet(const PotentialModel& model);

/// Density of the equilibrium measure with respect to dA.
double equilibrium_density(const PotentialModel& model, const RadialDroplet& s, cplx z);
double equilibrium_density(const PotentialModel& model, cplx z);

/// Q~(zeta) = Q(zeta + p), the potential viewed from an observation point.
class RecentredPotential {
 public:
  RecentredPotential(const PotentialModel& model, cplx p) : model_(&model), p_(p) {}
  cplx origin() const noexcept { return p_; }
  double evaluate(cplx zeta) const { return model_->evaluate(zeta + p_); }
  cplx wirtinger(cplx zeta, int i, int j) const { return model_->wirtinger(zeta + p_, i, j); }
  double laplacian(cplx zeta) const { return model_->laplacian(zeta + p_); }

 private:
  const PotentialModel* model_;
  cplx p_;
};

}  // namespace betagas
