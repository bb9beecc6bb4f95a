#include "betagas/potential.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace betagas {

namespace {

cplx ipow(cplx z, int e) {
  cplx out = 1.0;
  for (int i = 0; i < e; ++i) out *= z;
  return out;
}

// m! / (m - i)!
double falling(int m, int i) {
  double out = 1.0;
  for (int t = 0; t < i; ++t) out *= m - t;
  return out;
}

}  // namespace

PotentialModel::PotentialModel(PotentialFamily family, std::vector<double> coefficients,
                               cplx center)
    : family_(family), coeffs_(std::move(coefficients)), center_(center) {
  if (coeffs_.empty()) {
    throw InvalidPotential("potential needs at least one coefficient");
  }
  for (double c : coeffs_) {
    if (!std::isfinite(c) || c < 0.0) {
      throw InvalidPotential(
          "radial coefficients must be finite and >= 0, otherwise the Laplacian of Q can be "
          "negative and the equilibrium measure is not a positive measure");
    }
  }
  if (!(coeffs_.back() > 0.0)) {
    throw InvalidPotential(
        "leading coefficient must be > 0: Q must grow faster than log|z|^2 at infinity");
  }
  if (!std::isfinite(center.real()) || !std::isfinite(center.imag())) {
    throw InvalidPotential("symmetry center must be finite");
  }
}

PotentialModel PotentialModel::ginibre(cplx symmetry_center) {
  return PotentialModel(PotentialFamily::ginibre, {1.0}, symmetry_center);
}

PotentialModel PotentialModel::monomial(int k, cplx symmetry_center) {
  if (k < 1) throw InvalidPotential("monomial exponent k must be >= 1");
  std::vector<double> c(static_cast<std::size_t>(k), 0.0);
  c.back() = 1.0;
  return PotentialModel(PotentialFamily::monomial, std::move(c), symmetry_center);
}

PotentialModel PotentialModel::radial_polynomial(std::vector<double> coefficients,
                                                 cplx symmetry_center) {
  return PotentialModel(PotentialFamily::radial_polynomial, std::move(coefficients),
                        symmetry_center);
}

double PotentialModel::growth_exponent() const noexcept {
  return std::numeric_limits<double>::infinity();
}

std::string PotentialModel::describe() const {
  std::ostringstream os;
  switch (family_) {
    case PotentialFamily::ginibre:
      os << "ginibre";
      break;
    case PotentialFamily::monomial:
      os << "monomial(k=" << degree() << ")";
      break;
    case PotentialFamily::radial_polynomial:
      os << "radial_polynomial[";
      for (std::size_t i = 0; i < coeffs_.size(); ++i) os << (i ? "," : "") << coeffs_[i];
      os << "]";
      break;
  }
  if (center_ != cplx{}) os << " at " << center_;
  return os.str();
}

double PotentialModel::evaluate(cplx z) const {
  const double u = std::norm(z - center_);
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = (acc + *it) * u;
  return acc;
}

cplx PotentialModel::wirtinger(cplx z, int i, int j) const {
  if (i < 0 || j < 0) throw std::invalid_argument("derivative orders must be >= 0");
  const cplx w = z - center_;
  const cplx wb = std::conj(w);
  cplx acc = 0.0;
  for (int m = std::max({i, j, 1}); m <= degree(); ++m) {
    const double c = coeffs_[static_cast<std::size_t>(m - 1)];
    if (c == 0.0) continue;
    acc += c * falling(m, i) * falling(m, j) * ipow(w, m - i) * ipow(wb, m - j);
  }
  return acc;
}

double PotentialModel::laplacian(cplx z) const {
  const double u = std::norm(z - center_);
  // sum_m c_m m^2 u^(m-1)
  double acc = 0.0;
  for (int m = degree(); m >= 1; --m) {
    acc = acc * u + coeffs_[static_cast<std::size_t>(m - 1)] * m * m;
  }
  return acc;
}

double PotentialModel::radial_mass(double r) const {
  // integral of dd-bar Q over D_r(s) is r Q'(r) / 2 = sum_m m c_m r^(2m)
  const double u = r * r;
  double acc = 0.0;
  for (int m = degree(); m >= 1; --m) {
    acc = (acc + m * coeffs_[static_cast<std::size_t>(m - 1)]) * u;
  }
  return acc;
}

RadialDroplet droplet(const PotentialModel& model) {
  double hi = 1.0;
  while (model.radial_mass(hi) < 1.0) hi *= 2.0;
  const double radius =
      find_root_monotone([&](double r) { return model.radial_mass(r) - 1.0; }, 0.0, hi, 1e-15);
  return {model.symmetry_center(), radius};
}

double equilibrium_density(const PotentialModel& model, const RadialDroplet& s, cplx z) {
  return std::abs(z - s.center) <= s.outer_radius ? model.laplacian(z) : 0.0;
}

double equilibrium_density(const PotentialModel& model, cplx z) {
  return equilibrium_density(model, droplet(model), z);
}

}  // namespace betagas
