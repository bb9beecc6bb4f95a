#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "betagas/lagrange.hpp"
#include "betagas/spacing.hpp"

using namespace betagas;

namespace {

// s0 by the plain double loop over all ordered pairs
std::optional<double> brute_s0(const std::vector<cplx>& z) {
  std::optional<double> best;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (std::hypot(z[j].real(), z[j].imag()) > 1.0) continue;
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (k == j) continue;
      const double d = std::hypot(z[j].real() - z[k].real(), z[j].imag() - z[k].imag());
      if (!best || d < *best) best = d;
    }
  }
  return best;
}

ChainConfig small_chain(std::uint64_t seed) {
  ChainConfig c;
  c.steps = 900;
  c.burn_in = 300;
  c.thinning = 2;
  c.chains = 2;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("rescaling") {
  const RescaledSample a = rescale(Configuration({0.05}), 0.0, 0.1);
  CHECK(std::abs(a.z_points[0] - 0.5) < 1e-15);
  const RescaledSample b = rescale(Configuration({0.5}), 0.5, 0.1);
  CHECK(a.r_n == 0.1);
  CHECK(b.z_points[0] == 0.0);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cplx> pts;
  for (int i = 0; i < 50; ++i) pts.emplace_back(g(rng), g(rng));
  const RescaledSample s = rescale(Configuration(pts), {0.3, -0.1}, 0.07);
  const auto back = s.restore();
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(back[i] - pts[i]) <= 1e-15 * std::max(1.0, std::abs(pts[i])));
  CHECK_THROWS_AS(rescale(Configuration({0.1}), 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("spacing of hand examples") {
  const std::vector<cplx> a{0.5, {0.5, 0.3}, 2.0};
  CHECK(*spacing_s0(a) == doctest::Approx(0.3));
  CHECK(count_nD(a) == 2);
  const std::vector<cplx> b{0.0, 3.0};
  CHECK(*spacing_s0(b) == doctest::Approx(3.0));
  const std::vector<cplx> c{2.0, 3.0};
  CHECK_FALSE(spacing_s0(c).has_value());
  CHECK(count_nD(c) == 0);
  CHECK(count_nD(std::vector<cplx>{0.0}) == 1);
  // the unit circle belongs to the disk
  CHECK(count_nD(std::vector<cplx>{1.0, cplx(0.0, -1.0)}) == 2);
}

TEST_CASE("spacing agrees with the double loop") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 300; ++t) {
    std::vector<cplx> z;
    const int n = 2 + t % 40;
    for (int i = 0; i < n; ++i) z.emplace_back(u(rng), u(rng));
    const auto s = spacing_s0(z);
    const auto o = brute_s0(z);
    REQUIRE(s.has_value() == o.has_value());
    if (s) CHECK(*s == doctest::Approx(*o).epsilon(1e-14));
  }
}

TEST_CASE("separation bound formulas") {
  const auto b = theorem_bound(100, 3.0, 0.01, 0.5, 0.05);
  CHECK(b.threshold == doctest::Approx(1.3297e-3).epsilon(1e-4));
  CHECK(b.m0 == doctest::Approx(9.0510e6).epsilon(1e-4));
  CHECK(b.probability_bound == 0.0);
  CHECK(b.m0 == doctest::Approx(4.0 / std::pow(b.threshold / 2.0, 2)).epsilon(1e-13));

  for (double beta : {1.5, 2.0, 3.0, 7.0}) {
    const auto one = theorem_bound(64, beta, 0.02, 0.7, 0.03);
    const auto two = theorem_bound(128, beta, 0.02, 0.7, 0.03);
    CHECK(two.threshold / one.threshold == doctest::Approx(std::pow(2.0, -1.0 / (beta - 1.0))).epsilon(1e-14));
  }

  // beta > 2: m0 eps -> 0 as eps -> 0
  double previous = -1.0;
  for (double eps = 1e-2; eps > 1e-40; eps *= 1e-3) {
    const auto t = theorem_bound(50, 4.0, eps, 0.9, 0.05);
    CHECK(t.probability_bound >= previous);
    previous = t.probability_bound;
  }
  CHECK(previous > 0.99);

  CHECK_THROWS_AS(theorem_bound(100, 1.0, 0.01, 0.5, 0.05), std::domain_error);
  CHECK_THROWS_AS(theorem_bound(100, 2.0, 0.0, 0.5, 0.05), std::domain_error);
  CHECK_THROWS_AS(theorem_bound(100, 2.0, 0.1, 0.0, 0.05), std::domain_error);
  CHECK_THROWS_AS(theorem_bound(100, 2.0, 0.1, 0.5, 0.0), std::domain_error);
}

TEST_CASE("large beta threshold") {
  CHECK(corollary_threshold(1e12, 0.0, 0.05) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(corollary_threshold(1.0, 0.0, 0.07) == doctest::Approx(0.025752).epsilon(1e-4));
  CHECK(corollary_threshold(2.0, 1.0, 0.05) == doctest::Approx(0.018394).epsilon(1e-4));
  CHECK_THROWS_AS(corollary_threshold(1.0, 0.0, 0.08), std::domain_error);
  CHECK_THROWS_AS(corollary_threshold(1.0, 0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(corollary_threshold(0.0, 0.0, 0.05), std::domain_error);
  CHECK_THROWS_AS(corollary_threshold(1.0, -1.0, 0.05), std::domain_error);
}

TEST_CASE("packing by area") {
  const std::vector<cplx> grid{{0.5, 0.5}, {-0.5, 0.5}, {0.5, -0.5}, {-0.5, -0.5}};
  const auto a = packing_check(grid, 0.5);
  CHECK(a.pass);
  CHECK(a.separated);
  CHECK(a.count == 4);
  CHECK(a.capacity == 16.0);
  CHECK(a.disks.size() == 4);

  const auto one = packing_check(std::vector<cplx>{0.0}, 1.0);
  CHECK(one.pass);
  CHECK(one.count == 1);
  CHECK(one.capacity == 4.0);

  const auto crowded = packing_check(std::vector<cplx>{0.0, 0.1}, 0.5);
  CHECK_FALSE(crowded.separated);
  CHECK(crowded.pass);
  CHECK_THROWS_AS(packing_check(grid, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(packing_check(grid, 1.5), std::invalid_argument);

  // r0 = s0 / 2 on random point clouds always separates, and the count fits
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 500; ++t) {
    std::vector<cplx> z;
    for (int i = 0; i < 2 + t % 60; ++i) z.emplace_back(u(rng), u(rng));
    const auto s0 = spacing_s0(z);
    if (!s0) continue;
    const auto cert = packing_check(z, std::min(*s0 / 2.0, 1.0));
    CHECK(cert.separated);
    CHECK(cert.pass);
    for (cplx d : cert.disks) CHECK(std::abs(d) + cert.r0 <= 2.0);
  }
}

TEST_CASE("spacing report bookkeeping") {
  const auto g = PotentialModel::ginibre();
  const SpacingReport r = run_spacing_experiment(g, 32, 2.0, 0.0, small_chain(4));
  CHECK(r.n == 32);
  CHECK(r.r_n == doctest::Approx(1.0 / std::sqrt(32.0)));
  CHECK(r.total_samples == 600);
  CHECK(r.nD_samples.size() == 600);
  long hits = 0;
  for (int v : r.nD_samples) hits += v >= 1;
  CHECK(long(r.s0_samples.size()) == hits);
  CHECK(r.eta_hat == doctest::Approx(double(hits) / 600.0));
  for (double s : r.s0_samples) CHECK(s > 0.0);
  CHECK(r.packing_checked == hits);
  CHECK(r.packing_failures == 0);
  CHECK(r.c == doctest::Approx(bound_constants(2.0, r.K, r.T).c));
  CHECK(r.c_from_proof);
  REQUIRE(r.bound.has_value());
  REQUIRE(r.empirical_conditional.has_value());
  CHECK(r.theorem_consistent());
}

TEST_CASE("report without the bound below beta = 1 and with an override") {
  const auto g = PotentialModel::ginibre();
  const SpacingReport low = run_spacing_experiment(g, 16, 0.8, 0.0, small_chain(5));
  CHECK_FALSE(low.bound.has_value());
  CHECK_FALSE(low.empirical_conditional.has_value());

  SpacingOptions o;
  o.c_override = 0.05;
  const SpacingReport over = run_spacing_experiment(g, 16, 3.0, 0.0, small_chain(5), o);
  CHECK(over.c == 0.05);
  CHECK_FALSE(over.c_from_proof);

  // an observation point far outside the droplet never sees a particle
  const SpacingReport far = run_spacing_experiment(g, 16, 2.0, 10.0, small_chain(5));
  CHECK(far.eta_hat == 0.0);
  CHECK(far.s0_samples.empty());
  CHECK_FALSE(far.empirical_conditional.has_value());
}

TEST_CASE("independent eta estimation splits the chains") {
  SpacingOptions o;
  o.independent_eta = true;
  ChainConfig c = small_chain(6);
  c.chains = 4;
  const SpacingReport r = run_spacing_experiment(PotentialModel::ginibre(), 24, 2.0, 0.0, c, o);
  CHECK(r.total_samples == 600);
  CHECK(r.nD_samples.size() == 600);
  c.chains = 1;
  CHECK_THROWS_AS(run_spacing_experiment(PotentialModel::ginibre(), 24, 2.0, 0.0, c, o), std::invalid_argument);
}

TEST_CASE("eta estimates agree across seeds") {
  const auto g = PotentialModel::ginibre();
  ChainConfig c;
  c.steps = 3000;
  c.burn_in = 500;
  c.thinning = 5;
  c.chains = 2;
  c.seed = 100;
  const SpacingReport a = run_spacing_experiment(g, 64, 2.0, 0.0, c);
  c.seed = 200;
  const SpacingReport b = run_spacing_experiment(g, 64, 2.0, 0.0, c);
  const double se = std::hypot(a.eta_std_error, b.eta_std_error);
  CHECK(std::abs(a.eta_hat - b.eta_hat) <= 3.0 * se + 1e-12);
}

TEST_CASE("bootstrap median") {
  const std::vector<double> v{5, 1, 4, 2, 3};
  const MedianBand m = bootstrap_median(v, 500, 1);
  CHECK(m.median == 3.0);
  CHECK(m.lo <= m.median);
  CHECK(m.hi >= m.median);
  CHECK(bootstrap_median(std::vector<double>{1, 2, 3, 4}, 10, 1).median == 2.5);
  const MedianBand again = bootstrap_median(v, 500, 1);
  CHECK(again.lo == m.lo);
  CHECK(again.hi == m.hi);
  CHECK_THROWS_AS(bootstrap_median(std::vector<double>{}, 10, 1), std::invalid_argument);
}

TEST_CASE("beta sweep structure") {
  const auto g = PotentialModel::ginibre();
  const BetaSweep one = beta_sweep(g, 16, {2.0}, 0.0, small_chain(7), {}, 200);
  CHECK(one.reports.size() == 1);
  CHECK_FALSE(one.monotone.has_value());
  const BetaSweep three = beta_sweep(g, 16, {1.5, 2.0, 4.0}, 0.0, small_chain(7), {}, 200);
  CHECK(three.reports.size() == 3);
  CHECK(three.s0_medians.size() == 3);
  CHECK(three.monotone.has_value());
  CHECK(three.reports[2].beta == 4.0);
  CHECK_THROWS_AS(beta_sweep(g, 16, {2.0, 2.0}, 0.0, small_chain(7)), std::invalid_argument);
  CHECK_THROWS_AS(beta_sweep(g, 16, {}, 0.0, small_chain(7)), std::invalid_argument);
}

TEST_CASE("Fekete spacing normalizations") {
  const auto g = PotentialModel::ginibre();
  const Configuration two({-0.5, 0.5});
  const FeketeSpacing s = fekete_spacing(g, two, 0.0);
  CHECK(s.min_distance == 1.0);
  CHECK(s.rescaled == doctest::Approx(std::sqrt(2.0)));
  REQUIRE(s.lattice_normalized.has_value());
  CHECK(*s.lattice_normalized == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)));
  CHECK_FALSE(fekete_spacing(PotentialModel::monomial(2), two, 0.0).lattice_normalized.has_value());
}
