#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "betagas/gibbs.hpp"

using namespace betagas;

namespace {

// O(n^2) reference energy written independently of the library
double reference_energy(const std::vector<cplx>& z, const PotentialModel& m) {
  const double n = double(z.size());
  double h = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (j != k) h -= std::log(std::abs(z[j] - z[k]));
    }
    h += n * m.evaluate(z[j]);
  }
  return h;
}

std::vector<cplx> random_points(std::mt19937_64& rng, int n, double spread = 1.0) {
  std::normal_distribution<double> g(0.0, spread);
  std::vector<cplx> z(static_cast<std::size_t>(n));
  for (auto& v : z) v = {g(rng), g(rng)};
  return z;
}

}  // namespace

TEST_CASE("energy of small configurations") {
  const auto g = PotentialModel::ginibre();
  CHECK(total_energy(Configuration({0.0}), g) == 0.0);
  CHECK(total_energy(Configuration({0.0, 1.0}), g) == doctest::Approx(2.0));
  CHECK(total_energy(Configuration({0.0, 0.5}), g) == doctest::Approx(2 * std::log(2.0) + 0.5));
  const std::vector<cplx> same{0.2, 0.2};
  CHECK(total_energy(std::span<const cplx>(same), g) == std::numeric_limits<double>::infinity());
}

TEST_CASE("energy matches the reference double loop and is permutation invariant") {
  std::mt19937_64 rng(1);
  const auto m = PotentialModel::radial_polynomial({0.5, 0.5}, {0.1, 0.2});
  for (int t = 0; t < 20; ++t) {
    auto z = random_points(rng, 2 + t * 3);
    const double h = total_energy(Configuration(z), m);
    CHECK(h == doctest::Approx(reference_energy(z, m)).epsilon(1e-12));
    std::shuffle(z.begin(), z.end(), rng);
    CHECK(total_energy(Configuration(z), m) == doctest::Approx(h).epsilon(1e-14));
  }
}

TEST_CASE("single particle moves") {
  const auto g = PotentialModel::ginibre();
  const Configuration c({0.0, 1.0});
  CHECK(move_delta(c, 1, 1.0, g) == 0.0);
  CHECK(move_delta(c, 1, 0.5, g) == doctest::Approx(total_energy(Configuration({0.0, 0.5}), g) - 2.0));
  CHECK(move_delta(c, 1, 0.5, g) == doctest::Approx(-0.113706).epsilon(1e-5));
  CHECK(move_delta(c, 1, 0.0, g) == std::numeric_limits<double>::infinity());
}

TEST_CASE("move delta agrees with a full recompute") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const PotentialModel models[] = {PotentialModel::ginibre(), PotentialModel::monomial(2, {0.1, 0.0})};
  for (const auto& m : models) {
    for (int n : {2, 17, 128}) {
      Configuration c(random_points(rng, n, 0.5));
      for (int t = 0; t < 300; ++t) {
        const int j = static_cast<int>(u(rng) * n) % n;
        const cplx w = c[j] + cplx(u(rng) - 0.5, u(rng) - 0.5) * 0.3;
        const double d = move_delta(c, j, w, m);
        std::vector<cplx> moved(c.points().begin(), c.points().end());
        moved[static_cast<std::size_t>(j)] = w;
        const double full = reference_energy(moved, m) - reference_energy({c.points().begin(), c.points().end()}, m);
        CHECK(std::abs(d - full) <= 1e-9 * (1.0 + std::abs(full)));
        if (u(rng) < 0.5) c.move_point(j, w);
      }
    }
  }
}

TEST_CASE("energy gradient") {
  const auto g = PotentialModel::ginibre();
  CHECK(std::abs(energy_gradient(Configuration({0.0}), g)[0]) == 0.0);
  for (cplx v : energy_gradient(Configuration({-0.5, 0.5}), g)) CHECK(std::abs(v) < 1e-14);

  std::mt19937_64 rng(3);
  const PotentialModel models[] = {g, PotentialModel::radial_polynomial({0.2, 0.3, 0.4}, {0.0, 0.3})};
  for (const auto& m : models) {
    for (int t = 0; t < 50; ++t) {
      const int n = 2 + t;
      const auto z = random_points(rng, n, 0.6);
      const auto grad = energy_gradient(Configuration(z), m);
      double scale = 0.0, err = 0.0;
      for (int j = 0; j < n; ++j) {
        const double h = 1e-6;
        auto shifted = [&](cplx d) {
          auto w = z;
          w[static_cast<std::size_t>(j)] += d;
          return reference_energy(w, m);
        };
        const cplx fd{(shifted(h) - shifted(-h)) / (2 * h),
                      (shifted({0, h}) - shifted({0, -h})) / (2 * h)};
        err = std::max(err, std::abs(fd - grad[static_cast<std::size_t>(j)]));
        scale = std::max(scale, std::abs(grad[static_cast<std::size_t>(j)]));
      }
      CHECK(err <= 1e-5 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("configurations reject bad input") {
  CHECK_THROWS_AS(Configuration(std::vector<cplx>{}), std::invalid_argument);
  CHECK_THROWS_AS(Configuration({1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Configuration({cplx(std::nan(""), 0.0)}), std::invalid_argument);
  CHECK_THROWS_AS(Configuration({cplx(std::numeric_limits<double>::infinity(), 0.0)}), std::invalid_argument);
}

TEST_CASE("Metropolis decision is min(1, exp(-beta delta)) in the uniform draw") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10000; ++t) {
    const double beta = 0.1 + 5 * u(rng), delta = 4 * u(rng) - 1, draw = u(rng);
    CHECK(metropolis_accept(beta, delta, draw) == (draw < std::min(1.0, std::exp(-beta * delta))));
  }
  CHECK(metropolis_accept(2.0, -1.0, 0.999999));
  CHECK_FALSE(metropolis_accept(2.0, std::numeric_limits<double>::infinity(), 0.0));
  // swapping states x_i, x_j between rungs changes the joint weight
  // exp(-b_i H_i - b_j H_j) by exp((b_i - b_j)(H_i - H_j))
  CHECK(swap_accept(1.0, 2.0, 3.0, 5.0, 0.999999));
  CHECK(swap_accept(1.0, 2.0, 5.0, 4.0, std::exp(-1.0) * 0.99));
  CHECK_FALSE(swap_accept(1.0, 2.0, 5.0, 4.0, std::exp(-1.0) * 1.01));
  CHECK_FALSE(swap_accept(1.0, 2.0, 5.0, 3.0, 0.5));
}

TEST_CASE("chain seeds") {
  CHECK(derive_chain_seed(42, 0) == derive_chain_seed(42, 0));
  CHECK(derive_chain_seed(42, 0) != derive_chain_seed(42, 1));
  CHECK(derive_chain_seed(42, 0) != derive_chain_seed(43, 0));
}

TEST_CASE("chain config validation") {
  ChainConfig c;
  c.burn_in = c.steps;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.thinning = c.steps;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.beta = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.target_acceptance = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.proposal_scale = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.chains = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("equilibrium seeding follows the radial mass") {
  const auto m = PotentialModel::monomial(2);
  std::mt19937_64 rng(6);
  const int n = 20000;
  const Configuration c = equilibrium_seeded(m, n, rng, 0.0);
  const double R = droplet(m).outer_radius;
  for (double frac : {0.25, 0.5, 0.75, 0.95}) {
    const double r = frac * R;
    const auto inside = std::count_if(c.points().begin(), c.points().end(), [&](cplx z) { return std::abs(z) <= r; });
    CHECK(double(inside) / n == doctest::Approx(m.radial_mass(r)).epsilon(0.03).scale(1.0));
  }
}

TEST_CASE("sampling is reproducible and independent of the thread count") {
  const auto g = PotentialModel::ginibre();
  ChainConfig c;
  c.beta = 2.0;
  c.steps = 200;
  c.burn_in = 50;
  c.chains = 3;
  c.seed = 99;
  c.threads = 1;
  const SampleSet a = run_chain(g, 12, c);
  c.threads = 3;
  const SampleSet b = run_chain(g, 12, c);
  REQUIRE(a.sample_count() == b.sample_count());
  CHECK(a.sample_count() == 3 * 150);
  const auto ca = a.configurations(), cb = b.configurations();
  for (std::size_t i = 0; i < ca.size(); ++i) {
    for (int j = 0; j < 12; ++j) CHECK(ca[i][j] == cb[i][j]);
  }
  for (std::size_t k = 0; k < a.chains.size(); ++k) {
    CHECK(a.chains[k].chain_id == int(k));
    CHECK(a.chains[k].seed == derive_chain_seed(99, k));
    CHECK(a.chains[k].acceptance_rate >= 0.0);
    CHECK(a.chains[k].acceptance_rate <= 1.0);
  }
}

TEST_CASE("a vanishing proposal accepts everything and never moves") {
  const auto g = PotentialModel::ginibre();
  ChainConfig c;
  c.steps = 50;
  c.burn_in = 10;
  c.adapt = false;
  c.proposal_scale = 1e-300;
  const Configuration start({0.1, -0.2, {0.3, 0.3}});
  const SampleSet s = run_chain(g, 3, c, start);
  CHECK(s.acceptance_rate() == 1.0);
  for (const auto& cfg : s.configurations()) {
    // displacements stay on the scale of the proposal itself
    for (int j = 0; j < 3; ++j) CHECK(std::abs(cfg[j] - start[j]) < 1e-290);
  }
}

TEST_CASE("one particle at inverse temperature beta has E|z|^2 = 1/beta") {
  const auto g = PotentialModel::ginibre();
  for (double beta : {1.0, 4.0}) {
    ChainConfig c;
    c.beta = beta;
    c.steps = 40000;
    c.burn_in = 1000;
    c.seed = 5;
    const SampleSet s = run_chain(g, 1, c);
    std::vector<double> r2;
    for (const auto& cfg : s.configurations()) r2.push_back(std::norm(cfg[0]));
    double mean = 0.0;
    for (double v : r2) mean += v;
    mean /= double(r2.size());
    CHECK(std::abs(mean - 1.0 / beta) <= 4.0 * batch_means_std_error(r2));
  }
}

TEST_CASE("sample sets merge chain by chain") {
  const auto g = PotentialModel::ginibre();
  ChainConfig c;
  c.steps = 20;
  c.burn_in = 5;
  SampleSet a = run_chain(g, 4, c);
  c.seed = 2;
  SampleSet b = run_chain(g, 4, c);
  const auto total = a.sample_count() + b.sample_count();
  a.merge(b);
  CHECK(a.sample_count() == total);
  CHECK(a.chains.size() == 2);
  SampleSet other = run_chain(g, 5, c);
  CHECK_THROWS(a.merge(other));
}

TEST_CASE("tempering keeps one sample set per rung") {
  const auto g = PotentialModel::ginibre();
  ChainConfig c;
  c.steps = 100;
  c.burn_in = 20;
  const TemperingResult t = run_tempering(g, 8, {1.0, 2.0, 4.0}, c);
  REQUIRE(t.per_beta.size() == 3);
  CHECK(t.per_beta[2].beta == 4.0);
  REQUIRE(t.swap_acceptance.size() == 2);
  for (double s : t.swap_acceptance) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
  CHECK_THROWS(run_tempering(g, 8, {2.0, 1.0}, c));
}

TEST_CASE("Fekete points for small n") {
  const auto g = PotentialModel::ginibre();
  const Configuration one = minimize_energy(g, Configuration({0.3}));
  CHECK(std::abs(one[0]) < 1e-9);

  const Configuration two = minimize_energy(g, Configuration({0.1, {0.2, 0.3}}));
  CHECK(std::abs(two[0] - two[1]) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(two[0] + two[1]) < 1e-8);

  const Configuration three = minimize_energy(g, Configuration({0.1, {0.2, 0.3}, {-0.3, 0.05}}));
  for (int a = 0; a < 3; ++a) {
    CHECK(std::abs(three[a] - three[(a + 1) % 3]) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(three[a]) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-8));
  }
  CHECK(gradient_sup_norm(energy_gradient(three, g)) < 1e-8);
}
