#pragma once

// Rescaling about an observation point, the nearest-neighbour spacing s0 of
// particles in the rescaled unit disk, the separation bound and its
// empirical counterpart.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "betagas/gibbs.hpp"
#include "betagas/microscale.hpp"

namespace betagas {

/// z_j = (zeta_j - center) / r_n.
struct RescaledSample {
  std::vector<cplx> z_points;
  double r_n = 1.0;
  cplx center;

  /// Inverse map back to the original coordinates.
  std::vector<cplx> restore() const;
};

RescaledSample rescale(const Configuration& config, cplx center, double r_n);

/// min over z_j in the closed unit disk of the distance to the nearest other
/// particle (which may lie outside the disk). Empty when no particle is in
/// the disk.
std::optional<double> spacing_s0(std::span<const cplx> z);
std::optional<double> spacing_s0(const RescaledSample& sample);

/// Number of rescaled particles with |z| <= 1.
int count_nD(std::span<const cplx> z);
int count_nD(const RescaledSample& sample);

struct TheoremBound {
  double threshold = 0.0;
  double m0 = 0.0;
  double probability_bound = 0.0;
};

/// threshold = c n^(-1/(beta-1)) (eps eta)^(1/(2(beta-1))),
/// m0 = 16 n^(2/(beta-1)) c^-2 (eps eta)^(-1/(beta-1)),
/// probability_bound = max(0, 1 - m0 eps). Throws std::domain_error unless
/// beta > 1, 0 < eps < 1, 0 < eta <= 1 and c > 0.
TheoremBound theorem_bound(int n, double beta, double epsilon, double eta, double c);

/// c exp(-(1 + theta) / mu). Needs mu > 0, theta >= 0 and 0 < c < 1/(8 sqrt e).
double corollary_threshold(double mu, double theta, double c);

struct PackingCertificate {
  bool pass = true;
  /// True when every pair of unit-disk particles is at least 2 r0 apart.
  bool separated = false;
  int count = 0;
  double r0 = 0.0;
  /// 4 / r0^2
  double capacity = 0.0;
  /// Centers of the disjoint disks D_{r0}(z_j), all inside D_2.
  std::vector<cplx> disks;
};

/// Area count: separated unit-disk particles satisfy N_D r0^2 <= 4.
PackingCertificate packing_check(std::span<const cplx> z, double r0);

struct SpacingOptions {
  double epsilon = 0.01;
  /// Replaces the proof constant c(beta) from bound_constants.
  std::optional<double> c_override;
  /// Estimate eta on the first half of the chains and the conditional
  /// statistics on the second half instead of reusing every sample.
  bool independent_eta = false;
  ScaleOptions scale;
};

struct SpacingReport {
  int n = 0;
  double beta = 0.0;
  cplx center;
  double r_n = 0.0;
  long total_samples = 0;
  double eta_hat = 0.0;
  double eta_std_error = 0.0;
  std::vector<double> s0_samples;
  std::vector<int> nD_samples;
  double epsilon = 0.0;
  double c = 0.0;
  bool c_from_proof = true;
  double K = 0.0;
  double T = 1.0;
  /// Absent for beta <= 1 or when no sample hit the unit disk.
  std::optional<TheoremBound> bound;
  /// Fraction of E_n samples with s0 >= threshold.
  std::optional<double> empirical_conditional;
  long packing_checked = 0;
  long packing_failures = 0;
  double acceptance_rate = 0.0;
  std::vector<std::string> warnings;

  /// empirical_conditional >= probability_bound whenever the bound is positive.
  bool theorem_consistent() const;
};

/// Builds the report from existing samples (every sample used for eta and
/// for the conditional statistics).
SpacingReport spacing_report(const PotentialModel& model, const SampleSet& samples, cplx center,
                             const SpacingOptions& opts = {});

SpacingReport run_spacing_experiment(const PotentialModel& model, int n, double beta, cplx center,
                                     const ChainConfig& chain, const SpacingOptions& opts = {});

struct MedianBand {
  double median = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Median with a percentile bootstrap 95% band.
MedianBand bootstrap_median(std::span<const double> values, int resamples, std::uint64_t seed);

struct BetaSweep {
  std::vector<SpacingReport> reports;
  std::vector<MedianBand> s0_medians;
  /// Absent for a single-rung ladder. True when no consecutive pair shows a
  /// decrease beyond the bands (hi of the larger beta >= lo of the smaller).
  std::optional<bool> monotone;
};

/// Spacing experiments over an ascending ladder of distinct betas.
BetaSweep beta_sweep(const PotentialModel& model, int n, const std::vector<double>& ladder,
                     cplx center, const ChainConfig& chain, const SpacingOptions& opts = {},
                     int bootstrap_resamples = 1000);

struct FeketeSpacing {
  /// Smallest pairwise distance in the original coordinates.
  double min_distance = 0.0;
  /// min_distance / r_n at the observation point.
  double rescaled = 0.0;
  /// min_distance times the square root of the local point density
  /// n dd-bar Q / pi (Lebesgue), so a unit-density triangular lattice gives
  /// sqrt(2 / sqrt 3). Absent where dd-bar Q vanishes.
  std::optional<double> lattice_normalized;
};

FeketeSpacing fekete_spacing(const PotentialModel& model, const Configuration& config, cplx center);

}  // namespace betagas
