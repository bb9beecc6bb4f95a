#pragma once

// Weighted Lagrange interpolation polynomials
//
//   l_j(z) = prod_{i != j} (z - z_i) / (z_j - z_i) * exp(-n (Q(z) - Q(z_j)) / 2)
//
// evaluated in the log domain, together with numerical checks of the exact
// identities they satisfy and of the Bernstein and Morrey inequalities.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "betagas/gibbs.hpp"
#include "betagas/numerics.hpp"
#include "betagas/potential.hpp"

namespace betagas {

class LagrangeBasis {
 public:
  LagrangeBasis(Configuration nodes, PotentialModel model);

  int size() const noexcept { return nodes_.size(); }
  const Configuration& nodes() const noexcept { return nodes_; }
  const PotentialModel& model() const noexcept { return model_; }

  /// log |l_j(z)|; exactly 0 at z_j and -inf at the other nodes.
  double log_abs_ell(int j, cplx z) const;

  /// |grad |l_j|(z)| = |p'(z) - n dQ(z) p(z)| exp(-n Q(z) / 2), with the
  /// removable zero of p handled by its limit at the other nodes.
  double grad_abs_ell(int j, cplx z) const;

 private:
  Configuration nodes_;
  PotentialModel model_;
  // sum_{i != j} log |z_j - z_i|
  std::vector<double> log_denominators_;
};

/// 2 beta log|l_j(z)| + beta Ham_n(z_j -> z) - beta Ham_n(nodes); zero up to
/// rounding. Returns 0 when both sides vanish (z on another node).
double replacement_residual(const LagrangeBasis& basis, int j, cplx z, double beta);

/// Radius around z_j beyond which 2 beta log|l_j| stays 40 nats below its
/// scanned maximum, doubled.
double ell_power_cutoff(const LagrangeBasis& basis, int j, double beta);

/// Integral of |l_j|^(2 beta) over the plane (dA), truncated at
/// ell_power_cutoff, with a tail estimate from the polynomial decay rate.
TruncatedIntegral ell_power_integral(const LagrangeBasis& basis, int j, double beta,
                                     const QuadratureSpec& spec = {});

struct DiskRegion {
  cplx center;
  double radius = 0.0;
  double measure() const { return radius * radius; }
};

struct MassIdentityOptions {
  /// Monte Carlo samples for n >= 3.
  int sample_budget = 4000;
  std::uint64_t seed = 7;
  int threads = 0;
  QuadratureSpec spec{1e-12, 1e-9};
};

struct MassIdentityResult {
  double estimate = 0.0;
  double std_error = 0.0;
  /// |U| in dA measure.
  double target = 0.0;
  std::string method;
};

/// E[chi_U(z_1) * integral |l_1|^(2 beta) dA] against |U|. n = 1 is done by
/// nested quadrature, n = 2 by tensor quadrature over configuration space,
/// larger n by Monte Carlo over run_chain samples.
MassIdentityResult verify_mass_identity(const PotentialModel& model, int n, double beta,
                                        const DiskRegion& U, const MassIdentityOptions& opts = {});

/// |grad |f|(p)| r_n / avg_{D_{r_n}(p)} |f| for f = poly * exp(-n Q / 2), the
/// polynomial given by its coefficients in (z - p).
double bernstein_ratio(const PotentialModel& model, cplx p, int n, const std::vector<cplx>& poly,
                       double r_n, const QuadratureSpec& spec = {});

/// Same ratio for a weighted Lagrange polynomial.
double bernstein_ratio(const LagrangeBasis& basis, int j, cplx p, double r_n,
                       const QuadratureSpec& spec = {});

struct CheckReport {
  std::string name;
  long trials = 0;
  double worst_case = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Random replacement-identity cases with both sides evaluated directly.
/// worst_case is the largest |residual| / (1 + beta |Ham_n|).
CheckReport verify_replacement(long trials, std::uint64_t seed, int max_n = 64);

/// Largest Bernstein ratio over random weighted polynomials and Lagrange
/// polynomials, against K from the microscale module.
CheckReport verify_bernstein(const PotentialModel& model, cplx p, int n, long trials,
                             std::uint64_t seed);

struct BoundConstants {
  double beta = 0.0;
  double C0 = 0.0;
  double C = 0.0;
  double K = 0.0;
  double T = 1.0;
  double c = 0.0;
};

/// C0 = 2 pi^(1/2beta), C = C0 / (1 - 1/beta),
/// c = (1 - 1/beta)^(beta/(beta-1)) (C0 T^(1+2/beta) K)^(-beta/(beta-1)).
/// Throws std::domain_error for beta <= 1.
BoundConstants bound_constants(double beta, double K, double T);

/// Smooth test field with analytic gradient.
struct SmoothField {
  std::function<double(cplx)> value;
  std::function<cplx(cplx)> gradient;
};

/// |f(z) - f(w)| / (||grad f||_{L^{2 beta}(D_M)} |z - w|^(1 - 1/beta)).
double morrey_ratio(const SmoothField& f, cplx z, cplx w, double beta, double M = 3.0,
                    const QuadratureSpec& spec = {1e-13, 1e-9});

/// Random fields and point pairs in D_{M/sqrt 2}; bound C = C0 / (1 - 1/beta).
CheckReport verify_morrey(double beta, long trials, std::uint64_t seed, double M = 3.0);

struct GradientLemmaResult {
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
};

/// Monte Carlo estimate of
///   r_n^-2 E[chi_{D_{r_n}}(z_1) integral_{D_{M r_n}} |grad |l_1||^(2 beta) dA]
/// against T^(2 beta + 4) K^(2 beta) r_n^(-2 beta). Slow; variance grows with beta.
GradientLemmaResult verify_gradient_lemma(const PotentialModel& model, int n, double beta,
                                          const ChainConfig& chain, double M = 3.0);

}  // namespace betagas
