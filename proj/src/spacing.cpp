#include "betagas/spacing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "betagas/lagrange.hpp"

namespace betagas {

std::vector<cplx> RescaledSample::restore() const {
  std::vector<cplx> out;
  out.reserve(z_points.size());
  for (const auto& z : z_points) out.push_back(z * r_n + center);
  return out;
}

RescaledSample rescale(const Configuration& config, cplx center, double r_n) {
  if (!(r_n > 0.0)) throw std::invalid_argument("r_n must be > 0");
  RescaledSample out{{}, r_n, center};
  out.z_points.reserve(static_cast<std::size_t>(config.size()));
  for (const auto& zeta : config.points()) out.z_points.push_back((zeta - center) / r_n);
  return out;
}

std::optional<double> spacing_s0(std::span<const cplx> z) {
  std::optional<double> best;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (std::abs(z[j]) > 1.0) continue;
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (k != j) nearest = std::min(nearest, std::abs(z[j] - z[k]));
    }
    if (!best || nearest < *best) best = nearest;
  }
  return best;
}

std::optional<double> spacing_s0(const RescaledSample& sample) { return spacing_s0(sample.z_points); }

int count_nD(std::span<const cplx> z) {
  return static_cast<int>(std::count_if(z.begin(), z.end(), [](cplx x) { return std::abs(x) <= 1.0; }));
}

int count_nD(const RescaledSample& sample) { return count_nD(sample.z_points); }

TheoremBound theorem_bound(int n, double beta, double epsilon, double eta, double c) {
  if (!(beta > 1.0)) throw std::domain_error("the separation bound needs beta > 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("epsilon must lie in (0, 1)");
  if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("eta must lie in (0, 1]");
  if (!(c > 0.0)) throw std::domain_error("c must be > 0");
  if (n < 1) throw std::domain_error("n must be >= 1");
  const double b1 = beta - 1.0;
  const double ee = epsilon * eta;
  TheoremBound out;
  out.threshold = c * std::pow(double(n), -1.0 / b1) * std::pow(ee, 1.0 / (2.0 * b1));
  out.m0 = 16.0 * std::pow(double(n), 2.0 / b1) / (c * c) * std::pow(ee, -1.0 / b1);
  out.probability_bound = std::max(0.0, 1.0 - out.m0 * epsilon);
  return out;
}

double corollary_threshold(double mu, double theta, double c) {
  if (!(mu > 0.0)) throw std::domain_error("mu must be > 0");
  if (!(theta >= 0.0)) throw std::domain_error("theta must be >= 0");
  const double c_max = 1.0 / (8.0 * std::sqrt(std::numbers::e));
  if (!(c > 0.0 && c < c_max)) {
    throw std::domain_error("the large-beta separation result needs 0 < c < 1/(8 sqrt e)");
  }
  return c * std::exp(-(1.0 + theta) / mu);
}

PackingCertificate packing_check(std::span<const cplx> z, double r0) {
  if (!(r0 > 0.0 && r0 <= 1.0)) throw std::invalid_argument("r0 must lie in (0, 1]");
  PackingCertificate cert;
  cert.r0 = r0;
  cert.capacity = 4.0 / (r0 * r0);
  for (const auto& x : z) {
    if (std::abs(x) <= 1.0) cert.disks.push_back(x);
  }
  cert.count = static_cast<int>(cert.disks.size());
  cert.separated = true;
  for (std::size_t a = 0; a < cert.disks.size() && cert.separated; ++a) {
    for (std::size_t b = a + 1; b < cert.disks.size(); ++b) {
      if (std::abs(cert.disks[a] - cert.disks[b]) < 2.0 * r0) {
        cert.separated = false;
        break;
      }
    }
  }
  cert.pass = !cert.separated || cert.count <= cert.capacity;
  if (!cert.separated) cert.disks.clear();
  return cert;
}

bool SpacingReport::theorem_consistent() const {
  if (!bound || !empirical_conditional) return true;
  if (bound->probability_bound <= 0.0) return true;
  return *empirical_conditional >= bound->probability_bound;
}

namespace {

SpacingReport build_report(const PotentialModel& model, const SampleSet& eta_set,
                           const SampleSet& cond_set, bool shared, cplx center,
                           const SpacingOptions& opts) {
  SpacingReport rep;
  rep.n = cond_set.n;
  rep.beta = cond_set.beta;
  rep.center = center;
  rep.epsilon = opts.epsilon;
  const int n0 = opts.scale.n0 > 0 ? opts.scale.n0 : rep.n;
  rep.r_n = micro_scale(model, center, rep.n);
  rep.K = bernstein_K(model, center, n0, opts.scale.C).value;
  rep.T = t_constant(model, center, rep.n, opts.scale.M);
  rep.acceptance_rate = cond_set.acceptance_rate();
  rep.warnings = cond_set.warnings();
  if (!shared) {
    for (auto& w : eta_set.warnings()) rep.warnings.push_back(w);
  }

  std::vector<double> hits;
  for (const auto& config : eta_set.configurations()) {
    const RescaledSample z = rescale(config, center, rep.r_n);
    hits.push_back(count_nD(z) > 0 ? 1.0 : 0.0);
  }
  rep.total_samples = static_cast<long>(hits.size());
  double sum = 0.0;
  for (double h : hits) sum += h;
  rep.eta_hat = hits.empty() ? 0.0 : sum / double(hits.size());
  rep.eta_std_error = batch_means_std_error(hits, 20);

  for (const auto& config : cond_set.configurations()) {
    const RescaledSample z = rescale(config, center, rep.r_n);
    const int nd = count_nD(z);
    rep.nD_samples.push_back(nd);
    if (const auto s0 = spacing_s0(z)) {
      rep.s0_samples.push_back(*s0);
      const PackingCertificate cert = packing_check(z.z_points, std::min(*s0 / 2.0, 1.0));
      ++rep.packing_checked;
      if (!cert.pass) ++rep.packing_failures;
    }
  }

  if (opts.c_override) {
    rep.c = *opts.c_override;
    rep.c_from_proof = false;
  } else if (rep.beta > 1.0) {
    rep.c = bound_constants(rep.beta, rep.K, rep.T).c;
  }
  if (rep.beta > 1.0 && rep.eta_hat > 0.0 && !rep.s0_samples.empty()) {
    rep.bound = theorem_bound(rep.n, rep.beta, rep.epsilon, rep.eta_hat, rep.c);
    long above = 0;
    for (double s : rep.s0_samples) above += s >= rep.bound->threshold;
    rep.empirical_conditional = double(above) / double(rep.s0_samples.size());
  }
  return rep;
}

}  // namespace

SpacingReport spacing_report(const PotentialModel& model, const SampleSet& samples, cplx center,
                             const SpacingOptions& opts) {
  return build_report(model, samples, samples, true, center, opts);
}

SpacingReport run_spacing_experiment(const PotentialModel& model, int n, double beta, cplx center,
                                     const ChainConfig& chain, const SpacingOptions& opts) {
  if (!(opts.epsilon > 0.0 && opts.epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
  ChainConfig cfg = chain;
  cfg.beta = beta;
  SampleSet all = run_chain(model, n, cfg);
  if (!opts.independent_eta) return spacing_report(model, all, center, opts);

  if (cfg.chains < 2) {
    throw std::invalid_argument("independent eta estimation needs at least two chains");
  }
  SampleSet eta_set = all, cond_set = all;
  const auto half = all.chains.size() / 2;
  eta_set.chains.assign(all.chains.begin(), all.chains.begin() + static_cast<long>(half));
  cond_set.chains.assign(all.chains.begin() + static_cast<long>(half), all.chains.end());
  return build_report(model, eta_set, cond_set, false, center, opts);
}

MedianBand bootstrap_median(std::span<const double> values, int resamples, std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("cannot take the median of no samples");
  auto median_of = [](std::vector<double> v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
      m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
    }
    return m;
  };
  MedianBand out;
  out.median = median_of({values.begin(), values.end()});
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> meds;
  meds.reserve(static_cast<std::size_t>(resamples));
  std::vector<double> draw(values.size());
  for (int b = 0; b < resamples; ++b) {
    for (auto& d : draw) d = values[pick(rng)];
    meds.push_back(median_of(draw));
  }
  std::sort(meds.begin(), meds.end());
  if (meds.empty()) {
    out.lo = out.hi = out.median;
  } else {
    auto at = [&](double q) {
      const auto i = static_cast<std::size_t>(std::clamp(q * double(meds.size() - 1), 0.0,
                                                         double(meds.size() - 1)));
      return meds[i];
    };
    out.lo = at(0.025);
    out.hi = at(0.975);
  }
  return out;
}

BetaSweep beta_sweep(const PotentialModel& model, int n, const std::vector<double>& ladder,
                     cplx center, const ChainConfig& chain, const SpacingOptions& opts,
                     int bootstrap_resamples) {
  if (ladder.empty()) throw std::invalid_argument("beta ladder is empty");
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    if (!(ladder[i] > ladder[i - 1])) {
      throw std::invalid_argument("beta ladder must be strictly ascending without duplicates");
    }
  }
  BetaSweep out;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    ChainConfig cfg = chain;
    cfg.seed = derive_chain_seed(chain.seed, 1000 + i);
    out.reports.push_back(run_spacing_experiment(model, n, ladder[i], center, cfg, opts));
    const auto& s0 = out.reports.back().s0_samples;
    out.s0_medians.push_back(s0.empty() ? MedianBand{}
                                        : bootstrap_median(s0, bootstrap_resamples, cfg.seed));
  }
  if (ladder.size() > 1) {
    bool ok = true;
    for (std::size_t i = 1; i < ladder.size(); ++i) {
      ok = ok && out.s0_medians[i].hi >= out.s0_medians[i - 1].lo;
    }
    out.monotone = ok;
  }
  return out;
}

FeketeSpacing fekete_spacing(const PotentialModel& model, const Configuration& config, cplx center) {
  if (config.size() < 2) throw std::invalid_argument("spacing needs at least two points");
  const auto pts = config.points();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) best = std::min(best, std::abs(pts[a] - pts[b]));
  }
  FeketeSpacing out;
  out.min_distance = best;
  out.rescaled = best / micro_scale(model, center, config.size());
  const double lap = model.laplacian(center);
  if (lap > 0.0) out.lattice_normalized = best * std::sqrt(config.size() * lap / std::numbers::pi);
  return out;
}

}  // namespace betagas
