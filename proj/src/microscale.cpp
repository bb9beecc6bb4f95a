#include "betagas/microscale.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace betagas {

namespace {

double factorial(int m) {
  double out = 1.0;
  for (int i = 2; i <= m; ++i) out *= i;
  return out;
}

cplx ipow(cplx z, int e) {
  cplx out = 1.0;
  for (int i = 0; i < e; ++i) out *= z;
  return out;
}

}  // namespace

int homogeneity_order(const PotentialModel& model, cplx p) {
  // d^a dbar^b (dd-bar Q) = d^(a+1) dbar^(b+1) Q; the Laplacian is a
  // polynomial of degree 2M - 2 so there is nothing past that.
  const int max_degree = 2 * model.degree() - 2;
  for (int d = 0; d <= max_degree; ++d) {
    for (int a = 0; a <= d; ++a) {
      if (model.wirtinger(p, a + 1, d - a + 1) != cplx{}) {
        if (d % 2 != 0) {
          throw DegeneratePoint("leading homogeneous part of the Laplacian has odd degree");
        }
        return d / 2 + 1;
      }
    }
  }
  throw DegeneratePoint("Laplacian of Q vanishes to all orders at the requested point");
}

double tau0(const PotentialModel& model, cplx p) {
  const int k = homogeneity_order(model, p);
  const double lap_k = model.wirtinger(p, k, k).real();
  const double fk = factorial(k - 1);
  return std::pow(lap_k / (k * fk * fk), -1.0 / (2.0 * k));
}

double local_mass(const PotentialModel& model, cplx p, double r) {
  // integral over D_r of zeta^a zetabar^b dA is delta_ab r^(2a+2) / (a+1)
  double acc = 0.0;
  const double u = r * r;
  double upow = u;
  for (int a = 0; a <= model.degree() - 1; ++a) {
    const double fa = factorial(a);
    acc += model.wirtinger(p, a + 1, a + 1).real() / (fa * fa) * upow / (a + 1);
    upow *= u;
  }
  return acc;
}

double micro_scale(const PotentialModel& model, cplx p, int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  (void)homogeneity_order(model, p);
  auto g = [&](double r) { return n * local_mass(model, p, r) - 1.0; };
  double hi = std::max(1e-3, tau0(model, p) * std::pow(double(n), -0.5));
  for (int i = 0; g(hi) < 0.0; ++i) {
    if (i > 200) throw BracketError("disk mass never reaches 1/n");
    hi *= 2.0;
  }
  return find_root_monotone(g, 0.0, hi, 1e-15 * hi);
}

std::vector<cplx> h_polynomial(const PotentialModel& model, cplx p) {
  const int k = homogeneity_order(model, p);
  std::vector<cplx> out(static_cast<std::size_t>(2 * k + 1));
  out[0] = model.evaluate(p);
  for (int m = 1; m <= 2 * k; ++m) {
    out[static_cast<std::size_t>(m)] = 2.0 * model.wirtinger(p, m, 0) / factorial(m);
  }
  return out;
}

cplx evaluate_polynomial(const std::vector<cplx>& coeffs, cplx zeta) {
  cplx acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * zeta + *it;
  return acc;
}

double dominant_part(const PotentialModel& model, cplx p, cplx zeta) {
  const int k = homogeneity_order(model, p);
  cplx acc = 0.0;
  for (int i = 1; i < 2 * k; ++i) {
    const int j = 2 * k - i;
    acc += model.wirtinger(p, i, j) / (factorial(i) * factorial(j)) * ipow(zeta, i) *
           ipow(std::conj(zeta), j);
  }
  return acc.real();
}

double q0_norm(const PotentialModel& model, cplx p) {
  const int k = homogeneity_order(model, p);
  double acc = 0.0;
  for (int i = 1; i < 2 * k; ++i) {
    const int j = 2 * k - i;
    acc += std::abs(model.wirtinger(p, i, j)) / (factorial(i) * factorial(j));
  }
  return acc;
}

double cn_bound(const PotentialModel& model, cplx p, int n, double C) {
  const int k = homogeneity_order(model, p);
  return std::pow(tau0(model, p), 2 * k) * q0_norm(model, p) +
         C * std::pow(double(n), -1.0 / (2 * k));
}

BernsteinConstant bernstein_K(const PotentialModel& model, cplx p, int n0, double C) {
  if (n0 < 1) throw std::invalid_argument("n0 must be >= 1");
  const int k = homogeneity_order(model, p);
  // C_n is monotone in n, so the supremum sits at n0 or at infinity.
  const double c_inf = cn_bound(model, p, n0, 0.0);
  const double c_n0 = cn_bound(model, p, n0, C);
  return {4.0 * std::exp(0.5 * std::max(c_inf, c_n0)), k == 1};
}

double t_constant(const PotentialModel& model, cplx p, int n, double M) {
  constexpr int kRadii = 16;
  constexpr int kAngles = 32;
  const double r0 = micro_scale(model, p, n);
  double T = 1.0;
  for (int i = 1; i <= kRadii; ++i) {
    const double rho = M * r0 * i / kRadii;
    for (int j = 0; j < kAngles; ++j) {
      const cplx z = p + std::polar(rho, 2.0 * std::numbers::pi * j / kAngles);
      double rz;
      try {
        rz = micro_scale(model, z, n);
      } catch (const DegeneratePoint&) {
        continue;
      }
      T = std::max({T, rz / r0, r0 / rz});
    }
  }
  return T;
}

ScaleInfo scale_info(const PotentialModel& model, cplx p, int n, const ScaleOptions& opts) {
  ScaleInfo info;
  info.center = p;
  info.n = n;
  info.k = homogeneity_order(model, p);
  info.tau0 = tau0(model, p);
  info.r_n = micro_scale(model, p, n);
  info.h_coeffs = h_polynomial(model, p);
  info.q0 = q0_norm(model, p);
  info.cn_bound = cn_bound(model, p, n, opts.C);
  const auto K = bernstein_K(model, p, opts.n0 > 0 ? opts.n0 : n, opts.C);
  info.K = K.value;
  info.K_certified = K.certified;
  info.M = opts.M;
  info.T = t_constant(model, p, n, opts.M);
  return info;
}

}  // namespace betagas
