#include "betagas/gibbs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

#include "betagas/microscale.hpp"

namespace betagas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

int resolve_threads(int requested, int work_items) {
  int t = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(t, 1, std::max(1, work_items));
}

// Runs body(i) for i in [0, count) on a small pool; rethrows the first failure.
template <typename Body>
void parallel_for(int count, int threads, Body&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int t = resolve_threads(threads, count);
  if (t == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < t; ++i) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// One Metropolis walker at a fixed beta.
struct Replica {
  Configuration config;
  double energy = 0.0;
  double log_scale = 0.0;
  long accepted = 0;
  long proposed = 0;

  // One sweep of n single-particle proposals; returns the number accepted.
  int sweep(const PotentialModel& model, double beta, std::mt19937_64& rng) {
    const int n = config.size();
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double scale = std::exp(log_scale);
    int acc = 0;
    for (int m = 0; m < n; ++m) {
      const int j = pick(rng);
      const double dx = gauss(rng);
      const double dy = gauss(rng);
      const cplx proposal = config[j] + scale * cplx(dx, dy);
      const double delta = move_delta(config, j, proposal, model);
      const double u = unif(rng);
      if (metropolis_accept(beta, delta, u)) {
        config.move_point(j, proposal);
        energy += delta;
        ++acc;
      }
    }
    return acc;
  }
};

double default_scale(const PotentialModel& model, int n) {
  return micro_scale(model, model.symmetry_center(), n);
}

Replica make_replica(const PotentialModel& model, int n, const ChainConfig& cfg,
                     const std::optional<Configuration>& initial, std::mt19937_64& rng,
                     double base_scale) {
  Replica r;
  r.config = initial ? *initial : equilibrium_seeded(model, n, rng, 0.1 * base_scale);
  r.energy = total_energy(r.config, model);
  r.log_scale = std::log(cfg.proposal_scale.value_or(base_scale));
  return r;
}

void adapt_scale(Replica& r, const ChainConfig& cfg, int sweep, int accepted, int n) {
  if (!cfg.adapt) return;
  const double rate = double(accepted) / n;
  r.log_scale += (rate - cfg.target_acceptance) / std::pow(sweep + 1.0, 0.6);
}

void finish_chain(ChainResult& out, const Replica& r) {
  out.acceptance_rate = r.proposed > 0 ? double(r.accepted) / double(r.proposed) : 0.0;
  out.proposal_scale_final = std::exp(r.log_scale);
  if (out.acceptance_rate < 0.01) {
    out.warnings.push_back("chain " + std::to_string(out.chain_id) + ": acceptance rate " +
                           std::to_string(out.acceptance_rate) + " is below 1%");
  }
}

}  // namespace

Configuration::Configuration(std::vector<cplx> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("configuration must have at least one point");
  for (const auto& z : points_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::invalid_argument("configuration points must be finite");
    }
  }
  std::vector<cplx> sorted = points_;
  auto less = [](const cplx& a, const cplx& b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  };
  std::sort(sorted.begin(), sorted.end(), less);
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("configuration points must be pairwise distinct");
  }
}

double total_energy(std::span<const cplx> pts, const PotentialModel& model) {
  const auto n = pts.size();
  CompensatedSum pairs, field;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const double d2 = std::norm(pts[j] - pts[k]);
      if (d2 == 0.0) return kInf;
      // two ordered pairs, each contributing -log|d| = -log(d^2) / 2
      pairs.add(-std::log(d2));
    }
    field.add(model.evaluate(pts[j]));
  }
  return pairs.value() + double(n) * field.value();
}

double total_energy(const Configuration& config, const PotentialModel& model) {
  return total_energy(config.points(), model);
}

double move_delta(const Configuration& config, int j, cplx new_point,
                  const PotentialModel& model) {
  const cplx old = config[j];
  if (new_point == old) return 0.0;
  const int n = config.size();
  CompensatedSum acc;
  for (int i = 0; i < n; ++i) {
    if (i == j) continue;
    const double d_new = std::norm(new_point - config[i]);
    if (d_new == 0.0) return kInf;
    acc.add(-std::log(d_new / std::norm(old - config[i])));
  }
  acc.add(n * (model.evaluate(new_point) - model.evaluate(old)));
  return acc.value();
}

std::vector<cplx> energy_gradient(const Configuration& config, const PotentialModel& model) {
  const int n = config.size();
  std::vector<cplx> grad(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    cplx acc = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      const cplx d = config[j] - config[i];
      acc -= 2.0 * d / std::norm(d);
    }
    // grad_xy Q = 2 dbar Q for real Q
    acc += double(n) * 2.0 * model.wirtinger(config[j], 0, 1);
    grad[static_cast<std::size_t>(j)] = acc;
  }
  return grad;
}

double gradient_sup_norm(const std::vector<cplx>& grad) {
  double m = 0.0;
  for (const auto& g : grad) m = std::max(m, std::abs(g));
  return m;
}

bool metropolis_accept(double beta, double delta, double u) {
  return u < std::exp(-beta * delta);
}

bool swap_accept(double beta_i, double beta_j, double energy_i, double energy_j, double u) {
  return u < std::exp((beta_i - beta_j) * (energy_i - energy_j));
}

std::uint64_t derive_chain_seed(std::uint64_t base, std::uint64_t chain_index) {
  return splitmix64(base ^ splitmix64(chain_index + 1));
}

void ChainConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be > 0");
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (burn_in < 0 || burn_in >= steps) throw std::invalid_argument("need 0 <= burn_in < steps");
  if (thinning < 1 || thinning > steps - burn_in) {
    throw std::invalid_argument("need 1 <= thinning <= steps - burn_in");
  }
  if (proposal_scale && !(*proposal_scale > 0.0)) {
    throw std::invalid_argument("proposal_scale must be > 0");
  }
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw std::invalid_argument("target_acceptance must lie in (0, 1)");
  }
  if (chains < 1) throw std::invalid_argument("chains must be >= 1");
}

std::size_t SampleSet::sample_count() const {
  std::size_t c = 0;
  for (const auto& ch : chains) c += ch.samples.size();
  return c;
}

std::vector<Configuration> SampleSet::configurations() const {
  std::vector<Configuration> out;
  out.reserve(sample_count());
  for (const auto& ch : chains) out.insert(out.end(), ch.samples.begin(), ch.samples.end());
  return out;
}

double SampleSet::acceptance_rate() const {
  if (chains.empty()) return 0.0;
  double a = 0.0;
  for (const auto& ch : chains) a += ch.acceptance_rate;
  return a / double(chains.size());
}

double SampleSet::mean_energy() const {
  double s = 0.0;
  std::size_t c = 0;
  for (const auto& ch : chains) {
    for (double e : ch.energy_trace) s += e;
    c += ch.energy_trace.size();
  }
  return c ? s / double(c) : 0.0;
}

std::vector<std::string> SampleSet::warnings() const {
  std::vector<std::string> out;
  for (const auto& ch : chains) out.insert(out.end(), ch.warnings.begin(), ch.warnings.end());
  return out;
}

void SampleSet::merge(SampleSet other) {
  if (chains.empty()) {
    *this = std::move(other);
    return;
  }
  if (other.n != n) throw std::invalid_argument("cannot merge sample sets with different n");
  for (auto& ch : other.chains) chains.push_back(std::move(ch));
}

Configuration equilibrium_seeded(const PotentialModel& model, int n, std::mt19937_64& rng,
                                 double jitter_scale) {
  const RadialDroplet s = droplet(model);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    std::vector<cplx> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const double u = unif(rng);
      const double r = find_root_monotone(
          [&](double x) { return model.radial_mass(x) - u; }, 0.0, s.outer_radius, 1e-14);
      const double angle = 2.0 * std::numbers::pi * unif(rng);
      const double jx = gauss(rng);
      const double jy = gauss(rng);
      pts.push_back(s.center + std::polar(r, angle) + jitter_scale * cplx(jx, jy));
    }
    try {
      return Configuration(std::move(pts));
    } catch (const std::invalid_argument&) {
      // coincident draw, measure zero; redraw
    }
  }
}

SampleSet run_chain(const PotentialModel& model, int n, const ChainConfig& cfg,
                    const std::optional<Configuration>& initial) {
  cfg.validate();
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (initial && initial->size() != n) {
    throw std::invalid_argument("initial configuration has the wrong number of points");
  }
  const double base_scale = default_scale(model, n);

  SampleSet out;
  out.n = n;
  out.beta = cfg.beta;
  out.base_seed = cfg.seed;
  out.chains.resize(static_cast<std::size_t>(cfg.chains));

  parallel_for(cfg.chains, cfg.threads, [&](int c) {
    ChainResult& res = out.chains[static_cast<std::size_t>(c)];
    res.chain_id = c;
    res.seed = derive_chain_seed(cfg.seed, static_cast<std::uint64_t>(c));
    std::mt19937_64 rng(res.seed);
    Replica r = make_replica(model, n, cfg, initial, rng, base_scale);
    for (int sweep = 0; sweep < cfg.steps; ++sweep) {
      const int acc = r.sweep(model, cfg.beta, rng);
      if (sweep < cfg.burn_in) {
        adapt_scale(r, cfg, sweep, acc, n);
        continue;
      }
      r.accepted += acc;
      r.proposed += n;
      if ((sweep - cfg.burn_in) % cfg.thinning == 0) {
        r.energy = total_energy(r.config, model);
        res.samples.push_back(r.config);
        res.energy_trace.push_back(r.energy);
      }
    }
    finish_chain(res, r);
  });
  return out;
}

TemperingResult run_tempering(const PotentialModel& model, int n, const std::vector<double>& ladder,
                              const ChainConfig& cfg) {
  if (ladder.empty()) throw std::invalid_argument("tempering ladder is empty");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0)) throw std::invalid_argument("ladder betas must be > 0");
    if (i > 0 && !(ladder[i] > ladder[i - 1])) {
      throw std::invalid_argument("ladder must be strictly ascending");
    }
  }
  ChainConfig probe = cfg;
  probe.beta = ladder.front();
  probe.validate();
  const double base_scale = default_scale(model, n);
  const std::size_t rungs = ladder.size();

  TemperingResult out;
  out.per_beta.resize(rungs);
  for (std::size_t b = 0; b < rungs; ++b) {
    out.per_beta[b].n = n;
    out.per_beta[b].beta = ladder[b];
    out.per_beta[b].base_seed = cfg.seed;
    out.per_beta[b].chains.resize(static_cast<std::size_t>(cfg.chains));
  }
  std::vector<std::vector<long>> swaps_tried(static_cast<std::size_t>(cfg.chains),
                                             std::vector<long>(rungs, 0));
  auto swaps_done = swaps_tried;

  parallel_for(cfg.chains, cfg.threads, [&](int c) {
    const auto cs = static_cast<std::size_t>(c);
    const std::uint64_t seed = derive_chain_seed(cfg.seed, static_cast<std::uint64_t>(c));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Replica> reps;
    for (std::size_t b = 0; b < rungs; ++b) {
      reps.push_back(make_replica(model, n, cfg, std::nullopt, rng, base_scale));
    }
    for (int sweep = 0; sweep < cfg.steps; ++sweep) {
      for (std::size_t b = 0; b < rungs; ++b) {
        const int acc = reps[b].sweep(model, ladder[b], rng);
        if (sweep < cfg.burn_in) {
          adapt_scale(reps[b], cfg, sweep, acc, n);
        } else {
          reps[b].accepted += acc;
          reps[b].proposed += n;
        }
      }
      for (std::size_t b = static_cast<std::size_t>(sweep % 2); b + 1 < rungs; b += 2) {
        const double u = unif(rng);
        ++swaps_tried[cs][b];
        if (swap_accept(ladder[b], ladder[b + 1], reps[b].energy, reps[b + 1].energy, u)) {
          std::swap(reps[b].config, reps[b + 1].config);
          std::swap(reps[b].energy, reps[b + 1].energy);
          ++swaps_done[cs][b];
        }
      }
      if (sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.thinning == 0) {
        for (std::size_t b = 0; b < rungs; ++b) {
          reps[b].energy = total_energy(reps[b].config, model);
          auto& res = out.per_beta[b].chains[cs];
          res.samples.push_back(reps[b].config);
          res.energy_trace.push_back(reps[b].energy);
        }
      }
    }
    for (std::size_t b = 0; b < rungs; ++b) {
      auto& res = out.per_beta[b].chains[cs];
      res.chain_id = c;
      res.seed = seed;
      finish_chain(res, reps[b]);
    }
  });

  for (std::size_t b = 0; b + 1 < rungs; ++b) {
    long tried = 0, done = 0;
    for (int c = 0; c < cfg.chains; ++c) {
      tried += swaps_tried[static_cast<std::size_t>(c)][b];
      done += swaps_done[static_cast<std::size_t>(c)][b];
    }
    out.swap_acceptance.push_back(tried ? double(done) / double(tried) : 0.0);
  }
  return out;
}

Configuration minimize_energy(const PotentialModel& model, const Configuration& initial,
                              const DescentOptions& opts) {
  const int n = initial.size();
  std::vector<cplx> x(initial.points().begin(), initial.points().end());
  auto energy_of = [&](const std::vector<cplx>& pts) { return total_energy(pts, model); };
  auto grad_of = [&](const std::vector<cplx>& pts) {
    return energy_gradient(Configuration(pts), model);
  };
  auto dot = [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (std::conj(a[i]) * b[i]).real();
    return s;
  };

  double H = energy_of(x);
  if (!std::isfinite(H)) throw std::invalid_argument("initial configuration has infinite energy");
  std::vector<cplx> g = grad_of(x);
  std::vector<cplx> best = x;
  double best_H = H;
  double alpha = 1e-2 / std::max(1.0, gradient_sup_norm(g));
  constexpr double kArmijo = 1e-4;

  for (int it = 0; it < opts.max_iters; ++it) {
    const double gsup = gradient_sup_norm(g);
    if (gsup < opts.tol) return Configuration(x);
    const double g2 = dot(g, g);

    std::vector<cplx> trial(static_cast<std::size_t>(n));
    std::vector<cplx> g_trial;
    double H_trial = kInf;
    bool accepted = false;
    for (int tries = 0; tries < 80 && !accepted; ++tries, alpha *= 0.5) {
      g_trial.clear();
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = x[i] - alpha * g[i];
      H_trial = energy_of(trial);
      if (!std::isfinite(H_trial)) continue;
      if (H_trial <= H - kArmijo * alpha * g2) {
        accepted = true;
      } else if (std::abs(H_trial - H) <= 1e-13 * (std::abs(H) + double(n) * n)) {
        // energy differences are at rounding level: fall back on the gradient
        g_trial = grad_of(trial);
        accepted = dot(g_trial, g_trial) < g2;
      }
      if (accepted) break;
    }
    if (!accepted) {
      if (gsup <= 1e3 * opts.tol) return Configuration(best);
      throw StalledDescent("line search failed with gradient sup-norm " + std::to_string(gsup),
                           Configuration(best), gsup);
    }
    if (g_trial.empty()) g_trial = grad_of(trial);

    std::vector<cplx> s(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = trial[i] - x[i];
      y[i] = g_trial[i] - g[i];
    }
    const double sy = dot(s, y);
    alpha = sy > 0.0 ? dot(s, s) / sy : 2.0 * alpha;

    x = std::move(trial);
    g = std::move(g_trial);
    H = H_trial;
    if (H <= best_H) {
      best_H = H;
      best = x;
    }
  }
  return Configuration(best);
}

}  // namespace betagas
