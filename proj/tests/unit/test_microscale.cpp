#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "betagas/microscale.hpp"
#include "betagas/numerics.hpp"

using namespace betagas;

TEST_CASE("homogeneity order") {
  CHECK(homogeneity_order(PotentialModel::ginibre(), 0.0) == 1);
  CHECK(homogeneity_order(PotentialModel::monomial(2), 0.0) == 2);
  CHECK(homogeneity_order(PotentialModel::monomial(2), 0.3) == 1);
  CHECK(homogeneity_order(PotentialModel::monomial(3), 0.0) == 3);
  CHECK(homogeneity_order(PotentialModel::radial_polynomial({0.0, 0.0, 1.0}, {1, 1}), {1, 1}) == 3);
}

TEST_CASE("tau0") {
  CHECK(tau0(PotentialModel::ginibre(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(tau0(PotentialModel::monomial(2), 0.0) == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-14));
  CHECK(tau0(PotentialModel::radial_polynomial({2.0}), 0.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  // k = 1 points: 1 / sqrt(dd-bar Q(p))
  const auto m = PotentialModel::monomial(2);
  CHECK(tau0(m, 0.3) == doctest::Approx(1.0 / std::sqrt(m.laplacian(0.3))).epsilon(1e-14));
}

TEST_CASE("local mass agrees with quadrature of the density") {
  const auto m = PotentialModel::radial_polynomial({0.3, 0.5, 0.2}, {0.1, -0.1});
  for (cplx p : {cplx{0.0}, cplx{0.4, 0.2}, cplx{-0.7, 0.1}}) {
    for (double r : {0.05, 0.3, 1.0}) {
      const double q = integrate_disk([&](cplx z) { return m.laplacian(z); }, p, r);
      CHECK(local_mass(m, p, r) == doctest::Approx(q).epsilon(1e-10));
    }
  }
}

TEST_CASE("microscopic scale") {
  CHECK(micro_scale(PotentialModel::ginibre(), 0.0, 100) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(micro_scale(PotentialModel::monomial(2), 0.0, 16) == doctest::Approx(std::pow(1.0 / 32, 0.25)).epsilon(1e-10));
  CHECK(micro_scale(PotentialModel::ginibre(), 0.5, 400) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK_THROWS(micro_scale(PotentialModel::ginibre(), 0.0, 0));
}

TEST_CASE("r_n approaches tau0 n^(-1/2k)") {
  // Off the symmetry center the odd Taylor terms of the density integrate to
  // zero over disks, so the relative deviation decays like r_n^2, which is
  // n^(-1/k): faster than the n^(-1/2k) allowance.
  struct Case {
    PotentialModel model;
    cplx p;
  };
  const Case cases[] = {{PotentialModel::radial_polynomial({1.0, 1.0}), {0.5, 0.0}},
                        {PotentialModel::radial_polynomial({0.0, 1.0, 1.0}), 0.0},
                        {PotentialModel::monomial(3), {0.8, 0.3}}};
  for (const auto& c : cases) {
    const int k = homogeneity_order(c.model, c.p);
    const double t = tau0(c.model, c.p);
    std::vector<double> logn, logdev;
    for (int n : {100, 1000, 10000, 100000}) {
      const double dev = std::abs(micro_scale(c.model, c.p, n) * std::pow(n, 0.5 / k) / t - 1.0);
      CHECK(dev <= std::pow(n, -0.5 / k));
      logn.push_back(std::log(double(n)));
      logdev.push_back(std::log(dev));
    }
    const double slope = (logdev.back() - logdev.front()) / (logn.back() - logn.front());
    CHECK(std::abs(slope + 1.0 / k) <= 0.15);
  }
}

TEST_CASE("H polynomial coefficients") {
  for (cplx c : h_polynomial(PotentialModel::ginibre(), 0.0)) CHECK(std::abs(c) == 0.0);
  const cplx a{0.3, -0.4};
  const auto h = h_polynomial(PotentialModel::ginibre(), a);
  REQUIRE(h.size() == 3);
  CHECK(std::abs(h[0] - std::norm(a)) < 1e-15);
  CHECK(std::abs(h[1] - 2.0 * std::conj(a)) < 1e-15);
  CHECK(std::abs(h[2]) < 1e-15);
  const auto h2 = h_polynomial(PotentialModel::monomial(2), 0.0);
  REQUIRE(h2.size() == 5);
  for (cplx c : h2) CHECK(std::abs(c) == 0.0);
}

TEST_CASE("Q splits into Re H plus the dominant part up to order 2k+1") {
  struct Case {
    PotentialModel model;
    cplx p;
  };
  const Case cases[] = {{PotentialModel::ginibre(), {0.3, 0.2}},
                        {PotentialModel::monomial(2), 0.3},
                        {PotentialModel::monomial(2), 0.0},
                        {PotentialModel::radial_polynomial({0.4, 0.0, 1.0}, {0.1, 0.0}), {0.5, -0.2}}};
  for (const auto& c : cases) {
    const int k = homogeneity_order(c.model, c.p);
    const auto h = h_polynomial(c.model, c.p);
    const double t = tau0(c.model, c.p);
    // c(r) = max over the circle of the remainder / r^(2k+1) must not grow as r shrinks
    auto worst = [&](double r) {
      double w = 0.0;
      for (int a = 0; a < 64; ++a) {
        const cplx zeta = std::polar(r, 2 * std::numbers::pi * a / 64);
        const double rem = c.model.evaluate(c.p + zeta) - evaluate_polynomial(h, zeta).real() -
                           dominant_part(c.model, c.p, zeta);
        w = std::max(w, std::abs(rem) / std::pow(r, 2 * k + 1));
      }
      return w;
    };
    const double top = worst(t);
    for (double r = t / 2; r > t / 64; r /= 2) CHECK(worst(r) <= 1.01 * top + 1e-6);
  }
}

TEST_CASE("q0 and C_n") {
  const auto g = PotentialModel::ginibre();
  CHECK(q0_norm(g, 0.0) == doctest::Approx(1.0));
  CHECK(std::pow(tau0(g, 0.0), 2) * q0_norm(g, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(q0_norm(PotentialModel::monomial(2), 0.0) == doctest::Approx(1.0));
  CHECK(cn_bound(g, 0.0, 1000000000, 2.0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(cn_bound(g, 0.0, 100, 0.0) == doctest::Approx(1.0));

  // at k = 1 points q0 is dd-bar Q(p) itself, so tau0^2 q0 = 1
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto m = PotentialModel::radial_polynomial({0.5, 0.7, 0.3});
  for (int i = 0; i < 50; ++i) {
    const cplx p{u(rng), u(rng)};
    if (homogeneity_order(m, p) != 1) continue;
    CHECK(std::pow(tau0(m, p), 2) * q0_norm(m, p) <= 1.0 + 1e-12);
  }
}

TEST_CASE("Bernstein constant and T") {
  const auto g = PotentialModel::ginibre();
  const auto K = bernstein_K(g, 0.0, 1000);
  CHECK(K.value == doctest::Approx(4.0 * std::sqrt(std::numbers::e)).epsilon(1e-14));
  CHECK(K.certified);
  CHECK(bernstein_K(g, 0.0, 1000000000, 1.0).value == doctest::Approx(4.0 * std::sqrt(std::numbers::e)).epsilon(1e-4));
  CHECK_FALSE(bernstein_K(PotentialModel::monomial(2), 0.0, 100).certified);

  for (int n : {10, 100, 1000}) CHECK(t_constant(g, 0.3, n, 3.0) == doctest::Approx(1.0).epsilon(1e-12));

  const auto m = PotentialModel::monomial(2);
  double previous = 1e300;
  for (int n : {100, 1000, 10000, 100000}) {
    const double T = t_constant(m, 0.3, n, 3.0);
    CHECK(T >= 1.0);
    CHECK(T < previous);
    previous = T;
    // r_n(z) ~ 1 / (2 |z| sqrt n) here, so the worst grid point is the one
    // closest to the origin, at distance 0.3 - 3 r_n (once 3 r_n << 0.3)
    const double r0 = micro_scale(m, 0.3, n);
    if (n >= 10000) CHECK(T == doctest::Approx(0.3 / (0.3 - 3.0 * r0)).epsilon(2e-3));
  }
}

TEST_CASE("scale info bundles the local data") {
  const auto info = scale_info(PotentialModel::ginibre(), 0.0, 100);
  CHECK(info.k == 1);
  CHECK(info.tau0 == doctest::Approx(1.0));
  CHECK(info.r_n == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(info.q0 == doctest::Approx(1.0));
  CHECK(info.T == doctest::Approx(1.0));
  CHECK(info.M == 3.0);
  CHECK(info.h_coeffs.size() == 3);
  CHECK(info.K == doctest::Approx(4.0 * std::sqrt(std::numbers::e)));

  const auto mono = scale_info(PotentialModel::monomial(2), 0.0, 16);
  CHECK(mono.k == 2);
  CHECK(mono.h_coeffs.size() == 5);
  CHECK(mono.r_n == doctest::Approx(std::pow(1.0 / 32, 0.25)));
}
