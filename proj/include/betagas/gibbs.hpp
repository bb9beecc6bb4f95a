#pragma once

// Energy of an n-point configuration, its O(n) single-particle update, the
// Metropolis sampler for exp(-beta Ham_n) and the beta = infinity minimizer.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "betagas/potential.hpp"

namespace betagas {

/// n pairwise distinct points in the plane.
class Configuration {
 public:
  Configuration() = default;
  /// Throws std::invalid_argument on an empty set, non-finite points or
  /// exact duplicates.
  explicit Configuration(std::vector<cplx> points);

  int size() const noexcept { return static_cast<int>(points_.size()); }
  const cplx& operator[](int j) const { return points_[static_cast<std::size_t>(j)]; }
  std::span<const cplx> points() const noexcept { return points_; }

  /// Replaces point j. The caller guarantees distinctness (the sampler only
  /// calls this after a finite energy change).
  void move_point(int j, cplx z) { points_[static_cast<std::size_t>(j)] = z; }

 private:
  std::vector<cplx> points_;
};

/// Ham_n = sum_{j != k} log 1/|z_j - z_k| + n sum_j Q(z_j), ordered pairs.
/// Returns +inf when two points coincide.
double total_energy(const Configuration& config, const PotentialModel& model);
double total_energy(std::span<const cplx> points, const PotentialModel& model);

/// Ham_n(after) - Ham_n(before) for moving particle j to new_point, touching
/// only the pairs involving j. +inf if new_point lands on another particle.
double move_delta(const Configuration& config, int j, cplx new_point, const PotentialModel& model);

/// Gradient of Ham_n with respect to each particle's (x, y), packed as x + iy.
std::vector<cplx> energy_gradient(const Configuration& config, const PotentialModel& model);

/// Metropolis decision for uniform draw u in [0, 1): u < min(1, exp(-beta delta)).
bool metropolis_accept(double beta, double delta, double u);

/// Replica exchange decision: u < min(1, exp((beta_i - beta_j)(H_i - H_j))).
bool swap_accept(double beta_i, double beta_j, double energy_i, double energy_j, double u);

/// Seed for chain i, derived from the base seed by two splitmix64 rounds:
/// splitmix64(base ^ splitmix64(i + 1)).
std::uint64_t derive_chain_seed(std::uint64_t base, std::uint64_t chain_index);

struct ChainConfig {
  double beta = 2.0;
  /// Sweeps; one sweep is n single-particle proposals.
  int steps = 2000;
  int burn_in = 500;
  int thinning = 1;
  /// Per-coordinate standard deviation of the Gaussian proposal; defaults
  /// to r_n at the droplet center.
  std::optional<double> proposal_scale;
  double target_acceptance = 0.35;
  bool adapt = true;
  std::uint64_t seed = 1;
  int chains = 1;
  /// Worker threads; <= 0 means std::thread::hardware_concurrency().
  int threads = 0;

  void validate() const;
};

struct ChainResult {
  int chain_id = 0;
  std::uint64_t seed = 0;
  std::vector<Configuration> samples;
  /// Ham_n of each retained sample.
  std::vector<double> energy_trace;
  /// Acceptance over the post-burn-in sweeps.
  double acceptance_rate = 0.0;
  double proposal_scale_final = 0.0;
  std::vector<std::string> warnings;
};

struct SampleSet {
  int n = 0;
  double beta = 0.0;
  std::uint64_t base_seed = 0;
  /// Ordered by chain id.
  std::vector<ChainResult> chains;

  std::size_t sample_count() const;
  /// All retained configurations, chain by chain.
  std::vector<Configuration> configurations() const;
  double acceptance_rate() const;
  double mean_energy() const;
  std::vector<std::string> warnings() const;

  /// Appends the chains of other; both sets must share n.
  void merge(SampleSet other);
};

/// Draws n points from the equilibrium measure: radius by inverse CDF of
/// the radial mass, uniform angle, then a jitter of jitter_scale.
Configuration equilibrium_seeded(const PotentialModel& model, int n, std::mt19937_64& rng,
                                 double jitter_scale);

/// Metropolis chains targeting exp(-beta Ham_n) dA^n. Without an initial
/// configuration each chain starts equilibrium-seeded.
SampleSet run_chain(const PotentialModel& model, int n, const ChainConfig& config,
                    const std::optional<Configuration>& initial = std::nullopt);

struct TemperingResult {
  /// One set per rung of the ladder, same order as the ladder.
  std::vector<SampleSet> per_beta;
  /// Swap acceptance for each adjacent pair (i, i + 1).
  std::vector<double> swap_acceptance;
};

/// Parallel tempering over an ascending beta ladder. config.beta is ignored;
/// swaps between neighbours are attempted after every sweep.
TemperingResult run_tempering(const PotentialModel& model, int n, const std::vector<double>& ladder,
                              const ChainConfig& config);

/// Raised when the descent line search fails while the gradient is still large.
class StalledDescent : public std::runtime_error {
 public:
  StalledDescent(const std::string& what, Configuration last, double grad_norm)
      : std::runtime_error(what), last_(std::move(last)), grad_norm_(grad_norm) {}
  const Configuration& last_iterate() const noexcept { return last_; }
  double gradient_norm() const noexcept { return grad_norm_; }

 private:
  Configuration last_;
  double grad_norm_;
};

struct DescentOptions {
  /// Stop once the sup-norm of the gradient is below tol.
  double tol = 1e-9;
  int max_iters = 200000;
};

/// Weighted Fekete points by gradient descent (Barzilai-Borwein trial step,
/// Armijo backtracking). Returns the lowest-energy iterate seen.
Configuration minimize_energy(const PotentialModel& model, const Configuration& initial,
                              const DescentOptions& opts = {});

double gradient_sup_norm(const std::vector<cplx>& grad);

}  // namespace betagas
