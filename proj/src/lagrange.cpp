#include "betagas/lagrange.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss.hpp>

#include "betagas/microscale.hpp"

namespace betagas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int node_index(const Configuration& nodes, cplx z) {
  for (int i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == z) return i;
  }
  return -1;
}

// Radius about the symmetry center beyond which a single particle's
// Boltzmann weight exp(-beta n Q) has dropped by well over 40 nats relative
// to the droplet edge, allowing for the repulsion of the others.
double configuration_cutoff(const PotentialModel& model, int n, double beta) {
  const double R = droplet(model).outer_radius;
  const cplx s = model.symmetry_center();
  const double q_edge = model.evaluate(s + R);
  double r = R;
  while (beta * n * (model.evaluate(s + r) - q_edge) <
         50.0 + 2.0 * beta * (n - 1) * std::log(2.0 * r / R + 1.0)) {
    r *= 1.05;
  }
  return r;
}

// Fixed polar Gauss-Legendre rule on a disk: nodes and dA weights.
struct PolarGrid {
  std::vector<cplx> nodes;
  std::vector<double> weights;
};

PolarGrid polar_grid(cplx center, double radius, int r_panels, int angle_panels) {
  using G = boost::math::quadrature::gauss<double, 12>;
  std::vector<double> x, w;
  for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
    x.push_back(-G::abscissa()[i]);
    w.push_back(G::weights()[i]);
    x.push_back(G::abscissa()[i]);
    w.push_back(G::weights()[i]);
  }
  PolarGrid grid;
  for (int a = 0; a < r_panels; ++a) {
    const double r0 = radius * a / r_panels, r1 = radius * (a + 1) / r_panels;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * x[i];
      for (int b = 0; b < angle_panels; ++b) {
        const double th0 = kTwoPi * b / angle_panels, th1 = kTwoPi * (b + 1) / angle_panels;
        for (std::size_t k = 0; k < x.size(); ++k) {
          const double th = 0.5 * (th0 + th1) + 0.5 * (th1 - th0) * x[k];
          grid.nodes.push_back(center + std::polar(r, th));
          grid.weights.push_back(w[i] * w[k] * 0.25 * (r1 - r0) * (th1 - th0) * r / std::numbers::pi);
        }
      }
    }
  }
  return grid;
}

PotentialModel random_model(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> family(0, 2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const cplx center = unif(rng) < 0.5 ? cplx{} : cplx(unif(rng) - 0.5, unif(rng) - 0.5);
  switch (family(rng)) {
    case 0:
      return PotentialModel::ginibre(center);
    case 1:
      return PotentialModel::monomial(2 + static_cast<int>(unif(rng) * 2.0), center);
    default: {
      std::vector<double> c(3);
      for (auto& v : c) v = unif(rng);
      c.back() += 0.1;
      return PotentialModel::radial_polynomial(c, center);
    }
  }
}

}  // namespace

LagrangeBasis::LagrangeBasis(Configuration nodes, PotentialModel model)
    : nodes_(std::move(nodes)), model_(std::move(model)) {
  const int n = nodes_.size();
  log_denominators_.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i != j) acc += 0.5 * std::log(std::norm(nodes_[j] - nodes_[i]));
    }
    log_denominators_[static_cast<std::size_t>(j)] = acc;
  }
}

double LagrangeBasis::log_abs_ell(int j, cplx z) const {
  const cplx zj = nodes_[j];
  if (z == zj) return 0.0;
  const int n = nodes_.size();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == j) continue;
    const double d2 = std::norm(z - nodes_[i]);
    if (d2 == 0.0) return -kInf;
    acc += 0.5 * std::log(d2);
  }
  return acc - log_denominators_[static_cast<std::size_t>(j)] -
         0.5 * n * (model_.evaluate(z) - model_.evaluate(zj));
}

double LagrangeBasis::grad_abs_ell(int j, cplx z) const {
  const int n = nodes_.size();
  const cplx zj = nodes_[j];
  const int hit = node_index(nodes_, z);
  const double weight = -0.5 * n * (model_.evaluate(z) - model_.evaluate(zj));
  if (hit >= 0 && hit != j) {
    // p vanishes at z; |grad| reduces to |p'(z)| exp(-n Q(z) / 2)
    double acc = 0.0;
    for (int l = 0; l < n; ++l) {
      if (l != j && l != hit) acc += 0.5 * std::log(std::norm(z - nodes_[l]));
    }
    return std::exp(acc - log_denominators_[static_cast<std::size_t>(j)] + weight);
  }
  cplx log_derivative = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i != j) log_derivative += 1.0 / (z - nodes_[i]);
  }
  const cplx slope = log_derivative - double(n) * model_.wirtinger(z, 1, 0);
  return std::exp(log_abs_ell(j, z)) * std::abs(slope);
}

double replacement_residual(const LagrangeBasis& basis, int j, cplx z, double beta) {
  const double log_ell = basis.log_abs_ell(j, z);
  std::vector<cplx> moved(basis.nodes().points().begin(), basis.nodes().points().end());
  moved[static_cast<std::size_t>(j)] = z;
  const double h_moved = total_energy(moved, basis.model());
  if (log_ell == -kInf || h_moved == kInf) {
    // both sides are zero exactly when z sits on another node
    return (log_ell == -kInf && h_moved == kInf) ? 0.0 : kInf;
  }
  const double h_base = total_energy(basis.nodes(), basis.model());
  return 2.0 * beta * log_ell + beta * h_moved - beta * h_base;
}

double ell_power_cutoff(const LagrangeBasis& basis, int j, double beta) {
  const cplx zj = basis.nodes()[j];
  const auto& model = basis.model();
  double extent = droplet(model).outer_radius + std::abs(model.symmetry_center() - zj);
  for (const auto& z : basis.nodes().points()) extent = std::max(extent, std::abs(z - zj));

  constexpr int kAngles = 48;
  constexpr double kDrop = 40.0;
  auto ring_max = [&](double r) {
    double m = -kInf;
    for (int a = 0; a < kAngles; ++a) {
      const double th = kTwoPi * (a + 0.5) / kAngles;
      m = std::max(m, 2.0 * beta * basis.log_abs_ell(j, zj + std::polar(r, th)));
    }
    return m;
  };

  std::vector<std::pair<double, double>> rings;
  double peak = 0.0;  // the integrand is 1 at z_j
  for (int i = 0;; ++i) {
    const double r = extent * std::exp2((i - 48) / 8.0);
    const double m = ring_max(r);
    peak = std::max(peak, m);
    rings.emplace_back(r, m);
    // stop once well outside the configuration and clearly decaying
    if (r > 2.0 * extent && m < peak - kDrop && rings.size() > 2 &&
        m < rings[rings.size() - 2].second) {
      break;
    }
    if (i > 400) break;
  }
  double last = rings.front().first;
  for (const auto& [r, m] : rings) {
    if (m >= peak - kDrop) last = r;
  }
  return 2.0 * last;
}

TruncatedIntegral ell_power_integral(const LagrangeBasis& basis, int j, double beta,
                                     const QuadratureSpec& spec) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  const cplx zj = basis.nodes()[j];
  const double cutoff = ell_power_cutoff(basis, j, beta);
  const Field integrand = [&](cplx z) { return std::exp(2.0 * beta * basis.log_abs_ell(j, z)); };

  // Beyond the cutoff |l_j|^(2 beta) decays at least like |z|^(-2 gamma) with
  // gamma = beta (n rho - n + 1); rho is capped at 2 for infinite growth.
  const int n = basis.size();
  const double rho = std::min(basis.model().growth_exponent(), 2.0);
  const double gamma = beta * (n * rho - n + 1.0);
  double edge = 0.0;
  for (int a = 0; a < 64; ++a) edge = std::max(edge, integrand(zj + std::polar(cutoff, kTwoPi * a / 64)));
  const double tail = gamma > 1.0 ? edge * cutoff * cutoff / (gamma - 1.0) : kInf;
  return integrate_plane_truncated(integrand, zj, cutoff, spec, tail);
}

MassIdentityResult verify_mass_identity(const PotentialModel& model, int n, double beta,
                                        const DiskRegion& U, const MassIdentityOptions& opts) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  MassIdentityResult out;
  out.target = U.measure();
  if (U.radius <= 0.0) {
    out.method = "null set";
    return out;
  }

  if (n == 1) {
    // density exp(-beta Q(z)) / Z
    const cplx s = model.symmetry_center();
    const double rc = configuration_cutoff(model, 1, beta);
    const double q_min = model.evaluate(s);
    const Field weight = [&](cplx z) { return std::exp(-beta * (model.evaluate(z) - q_min)); };
    const double Z = integrate_disk(weight, s, rc, opts.spec);
    const Field outer = [&](cplx z1) {
      const LagrangeBasis basis(Configuration({z1}), model);
      const double inner = ell_power_integral(basis, 0, beta, opts.spec).value;
      return weight(z1) / Z * inner;
    };
    out.estimate = integrate_disk(outer, U.center, U.radius, opts.spec);
    out.std_error = opts.spec.rel_tol * std::abs(out.estimate) + opts.spec.abs_tol;
    out.method = "nested quadrature";
    return out;
  }

  if (n == 2) {
    const cplx s = model.symmetry_center();
    const double rc = configuration_cutoff(model, 2, beta);
    const PolarGrid plane = polar_grid(s, rc, 3, 4);
    const PolarGrid disk = polar_grid(U.center, U.radius, 1, 2);
    // separate nodes for the inner integral, so agreement is not an artifact
    // of sharing one discretization between Z and the replaced integrand
    const PolarGrid inner_grid = polar_grid(s, rc, 4, 5);
    auto energy = [&](cplx a, cplx b) { return total_energy(std::vector<cplx>{a, b}, model); };
    const double h_ref = energy(s - 0.5 * rc, s + 0.5 * rc);

    double Z = 0.0;
    for (std::size_t a = 0; a < plane.nodes.size(); ++a) {
      for (std::size_t b = 0; b < plane.nodes.size(); ++b) {
        if (a == b) continue;
        Z += plane.weights[a] * plane.weights[b] *
             std::exp(-beta * (energy(plane.nodes[a], plane.nodes[b]) - h_ref));
      }
    }
    double num = 0.0;
    for (std::size_t a = 0; a < disk.nodes.size(); ++a) {
      const cplx z1 = disk.nodes[a];
      for (std::size_t b = 0; b < plane.nodes.size(); ++b) {
        const cplx z2 = plane.nodes[b];
        if (z1 == z2) continue;
        const LagrangeBasis basis(Configuration({z1, z2}), model);
        double inner = 0.0;
        for (std::size_t g = 0; g < inner_grid.nodes.size(); ++g) {
          inner += inner_grid.weights[g] * std::exp(2.0 * beta * basis.log_abs_ell(0, inner_grid.nodes[g]));
        }
        num += disk.weights[a] * plane.weights[b] * std::exp(-beta * (energy(z1, z2) - h_ref)) * inner;
      }
    }
    out.estimate = num / Z;
    out.std_error = 1e-6 * std::abs(out.estimate);
    out.method = "tensor quadrature";
    return out;
  }

  ChainConfig chain;
  chain.beta = beta;
  chain.chains = 4;
  chain.thinning = 2;
  chain.burn_in = 500;
  chain.steps = chain.burn_in + chain.thinning * std::max(1, opts.sample_budget / chain.chains);
  chain.seed = opts.seed;
  chain.threads = opts.threads;
  const SampleSet samples = run_chain(model, n, chain);
  std::vector<double> values;
  for (const auto& config : samples.configurations()) {
    if (std::abs(config[0] - U.center) > U.radius) {
      values.push_back(0.0);
      continue;
    }
    const LagrangeBasis basis(config, model);
    values.push_back(ell_power_integral(basis, 0, beta, opts.spec).value);
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  out.estimate = mean / double(values.size());
  out.std_error = batch_means_std_error(values, 20);
  out.method = "monte carlo";
  return out;
}

double bernstein_ratio(const PotentialModel& model, cplx p, int n, const std::vector<cplx>& poly,
                       double r_n, const QuadratureSpec& spec) {
  if (poly.empty()) return 0.0;
  auto horner = [&](cplx x) {
    cplx acc = 0.0;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = acc * x + *it;
    return acc;
  };
  // coefficients are in powers of (z - p), so p'(p) is the linear one
  const cplx derivative = poly.size() > 1 ? poly[1] : cplx{};
  // exp(-n Q(p) / 2) is factored out of both sides
  const double grad = std::abs(derivative - double(n) * model.wirtinger(p, 1, 0) * poly[0]);
  const double qp = model.evaluate(p);
  const Field f = [&](cplx z) {
    return std::abs(horner(z - p)) * std::exp(-0.5 * n * (model.evaluate(z) - qp));
  };
  const double avg = integrate_disk(f, p, r_n, spec) / (r_n * r_n);
  return grad * r_n / avg;
}

double bernstein_ratio(const LagrangeBasis& basis, int j, cplx p, double r_n,
                       const QuadratureSpec& spec) {
  const int n = basis.size();
  const double log_at_p = basis.log_abs_ell(j, p);
  if (log_at_p == -kInf) throw std::domain_error("Lagrange polynomial vanishes at the test point");
  cplx log_derivative = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i != j) log_derivative += 1.0 / (p - basis.nodes()[i]);
  }
  const double slope = std::abs(log_derivative - double(n) * basis.model().wirtinger(p, 1, 0));
  const Field f = [&](cplx z) { return std::exp(basis.log_abs_ell(j, z) - log_at_p); };
  const double avg = integrate_disk(f, p, r_n, spec) / (r_n * r_n);
  return slope * r_n / avg;
}

CheckReport verify_replacement(long trials, std::uint64_t seed, int max_n) {
  CheckReport report{"replacement", trials, 0.0, 1e-9, false};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (long t = 0; t < trials; ++t) {
    const PotentialModel model = random_model(rng);
    const int n = 1 + static_cast<int>(unif(rng) * max_n) % max_n;
    const double beta = 0.5 + 7.5 * unif(rng);
    const Configuration nodes = equilibrium_seeded(model, n, rng, 0.05);
    const int j = static_cast<int>(unif(rng) * n) % n;
    const double R = droplet(model).outer_radius;
    const cplx z = model.symmetry_center() + std::polar(1.5 * R * std::sqrt(unif(rng)), kTwoPi * unif(rng));
    const LagrangeBasis basis(nodes, model);
    const double h = total_energy(nodes, model);
    const double res = std::abs(replacement_residual(basis, j, z, beta));
    report.worst_case = std::max(report.worst_case, res / (1.0 + beta * std::abs(h)));
  }
  report.pass = report.worst_case <= report.bound;
  return report;
}

CheckReport verify_bernstein(const PotentialModel& model, cplx p, int n, long trials,
                             std::uint64_t seed) {
  const double r_n = micro_scale(model, p, n);
  const BernsteinConstant K = bernstein_K(model, p, n);
  CheckReport report{"bernstein", trials, 0.0, K.value, false};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const QuadratureSpec spec{1e-14, 1e-8};
  const int max_degree = std::min(n - 1, 24);

  for (long t = 0; t < trials; ++t) {
    double ratio = 0.0;
    switch (t % 3) {
      case 0: {
        // random coefficients on the natural scale 1/r_n
        const int degree = static_cast<int>(unif(rng) * (max_degree + 1)) % (max_degree + 1);
        const double spread = 0.5 + 3.5 * unif(rng);
        std::vector<cplx> poly;
        double scale = 1.0, fact = 1.0;
        for (int m = 0; m <= degree; ++m) {
          if (m > 0) {
            scale *= spread / r_n;
            fact *= m;
          }
          const double a = gauss(rng);
          const double b = gauss(rng);
          poly.emplace_back(cplx(a, b) * scale / std::sqrt(fact));
        }
        ratio = bernstein_ratio(model, p, n, poly, r_n, spec);
        break;
      }
      case 1: {
        // (z - p - a)^m with a root near p
        const int m = 1 + static_cast<int>(unif(rng) * max_degree) % std::max(1, max_degree);
        const cplx a = std::polar(2.0 * r_n * std::sqrt(unif(rng)), kTwoPi * unif(rng));
        std::vector<cplx> poly{1.0};
        for (int i = 0; i < m; ++i) {
          std::vector<cplx> next(poly.size() + 1, 0.0);
          for (std::size_t k = 0; k < poly.size(); ++k) {
            next[k + 1] += poly[k];
            next[k] -= a * poly[k];
          }
          poly = std::move(next);
        }
        ratio = bernstein_ratio(model, p, n, poly, r_n, spec);
        break;
      }
      default: {
        const Configuration nodes = equilibrium_seeded(model, n, rng, 0.1 * r_n);
        const int j = static_cast<int>(unif(rng) * n) % n;
        ratio = bernstein_ratio(LagrangeBasis(nodes, model), j, p, r_n, spec);
        break;
      }
    }
    report.worst_case = std::max(report.worst_case, ratio);
  }
  report.pass = report.worst_case <= report.bound;
  return report;
}

BoundConstants bound_constants(double beta, double K, double T) {
  if (!(beta > 1.0)) throw std::domain_error("bound constants need beta > 1");
  BoundConstants b;
  b.beta = beta;
  b.K = K;
  b.T = T;
  b.C0 = 2.0 * std::pow(std::numbers::pi, 1.0 / (2.0 * beta));
  const double gap = 1.0 - 1.0 / beta;
  b.C = b.C0 / gap;
  const double e = beta / (beta - 1.0);
  b.c = std::pow(gap, e) * std::pow(b.C0 * std::pow(T, 1.0 + 2.0 / beta) * K, -e);
  return b;
}

double morrey_ratio(const SmoothField& f, cplx z, cplx w, double beta, double M,
                    const QuadratureSpec& spec) {
  const double diff = std::abs(f.value(z) - f.value(w));
  if (diff == 0.0) return 0.0;
  const Field g = [&](cplx x) { return std::pow(std::abs(f.gradient(x)), 2.0 * beta); };
  const double norm = std::pow(integrate_disk(g, 0.0, M, spec), 1.0 / (2.0 * beta));
  return diff / (norm * std::pow(std::abs(z - w), 1.0 - 1.0 / beta));
}

CheckReport verify_morrey(double beta, long trials, std::uint64_t seed, double M) {
  const BoundConstants bc = bound_constants(beta, 1.0, 1.0);
  CheckReport report{"morrey", trials, 0.0, bc.C, false};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double inner = M / std::sqrt(2.0);
  auto point = [&] { return std::polar(inner * std::sqrt(unif(rng)), kTwoPi * unif(rng)); };

  for (long t = 0; t < trials; ++t) {
    SmoothField f;
    cplx z = point(), w = point();
    switch (t % 3) {
      case 0: {
        // random plane waves
        struct Wave {
          double amp;
          cplx k;
          double phase;
        };
        std::vector<Wave> waves;
        const int count = 1 + static_cast<int>(unif(rng) * 6.0);
        for (int i = 0; i < count; ++i) {
          waves.push_back({unif(rng) * 2.0 - 1.0, std::polar(0.1 + 6.0 * unif(rng), kTwoPi * unif(rng)),
                           kTwoPi * unif(rng)});
        }
        f.value = [waves](cplx x) {
          double v = 0.0;
          for (const auto& wv : waves) v += wv.amp * std::cos(wv.k.real() * x.real() + wv.k.imag() * x.imag() + wv.phase);
          return v;
        };
        f.gradient = [waves](cplx x) {
          cplx g = 0.0;
          for (const auto& wv : waves) {
            g -= wv.amp * wv.k * std::sin(wv.k.real() * x.real() + wv.k.imag() * x.imag() + wv.phase);
          }
          return g;
        };
        break;
      }
      case 1: {
        // Gaussian bump, with one point at its peak
        const cplx c = point();
        const double width = 0.05 + 1.5 * unif(rng);
        f.value = [c, width](cplx x) { return std::exp(-std::norm(x - c) / (width * width)); };
        f.gradient = [c, width](cplx x) {
          return -2.0 * (x - c) / (width * width) * std::exp(-std::norm(x - c) / (width * width));
        };
        z = c;
        w = c + std::polar(width * 2.0 * unif(rng), kTwoPi * unif(rng));
        if (std::abs(w) > inner) w = c * 0.99;
        break;
      }
      default: {
        // Re of a random holomorphic polynomial of degree <= 4
        std::vector<cplx> a;
        const int degree = 1 + static_cast<int>(unif(rng) * 4.0);
        for (int m = 0; m <= degree; ++m) a.emplace_back(unif(rng) * 2.0 - 1.0, unif(rng) * 2.0 - 1.0);
        f.value = [a](cplx x) {
          cplx acc = 0.0;
          for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * x + *it;
          return acc.real();
        };
        f.gradient = [a](cplx x) {
          // grad Re P = conj(P')
          cplx acc = 0.0;
          for (int m = static_cast<int>(a.size()) - 1; m >= 1; --m) {
            acc = acc * x + double(m) * a[static_cast<std::size_t>(m)];
          }
          return std::conj(acc);
        };
        break;
      }
    }
    if (z == w) continue;
    report.worst_case = std::max(report.worst_case, morrey_ratio(f, z, w, beta, M));
  }
  report.pass = report.worst_case <= report.bound;
  return report;
}

GradientLemmaResult verify_gradient_lemma(const PotentialModel& model, int n, double beta,
                                          const ChainConfig& chain, double M) {
  const cplx p = model.symmetry_center();
  const ScaleInfo info = scale_info(model, p, n, {M, 0.0, n});
  ChainConfig cfg = chain;
  cfg.beta = beta;
  const SampleSet samples = run_chain(model, n, cfg);
  const QuadratureSpec spec{1e-14, 1e-7};
  std::vector<double> values;
  for (const auto& config : samples.configurations()) {
    if (std::abs(config[0] - p) > info.r_n) {
      values.push_back(0.0);
      continue;
    }
    const LagrangeBasis basis(config, model);
    const Field g = [&](cplx z) { return std::pow(basis.grad_abs_ell(0, z), 2.0 * beta); };
    values.push_back(integrate_disk(g, p, M * info.r_n, spec) / (info.r_n * info.r_n));
  }
  GradientLemmaResult out;
  for (double v : values) out.estimate += v;
  out.estimate /= double(values.size());
  out.std_error = batch_means_std_error(values, 20);
  out.bound = std::pow(info.T, 2.0 * beta + 4.0) * std::pow(info.K, 2.0 * beta) *
              std::pow(info.r_n, -2.0 * beta);
  return out;
}

}  // namespace betagas
