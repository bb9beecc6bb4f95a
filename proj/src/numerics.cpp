#include "betagas/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace betagas {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kMaxPanels = std::size_t{1} << 20;

// Full node/weight tables on [-1, 1] expanded from boost's half tables.
template <unsigned N>
struct GaussRule {
  std::array<double, N> x{};
  std::array<double, N> w{};

  GaussRule() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    std::size_t k = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) {
        x[k] = 0.0;
        w[k++] = wt[i];
      } else {
        x[k] = -a[i];
        w[k++] = wt[i];
        x[k] = a[i];
        w[k++] = wt[i];
      }
    }
  }
};

const GaussRule<8>& coarse_rule() {
  static const GaussRule<8> rule;
  return rule;
}

const GaussRule<16>& fine_rule() {
  static const GaussRule<16> rule;
  return rule;
}

// Panels live in (r, angle). In r^2 an off-center smooth integrand picks up a
// sqrt singularity at r = 0 and the refinement stalls there.
struct Panel {
  double r0, r1, th0, th1;
  double value = 0.0;
  double error = 0.0;
  int depth = 0;

  bool operator<(const Panel& other) const { return error < other.error; }
};

template <unsigned N>
double apply_rule(const GaussRule<N>& rule, const Field& f, cplx center, const Panel& p,
                  double* abs_sum) {
  const double rm = 0.5 * (p.r0 + p.r1), rh = 0.5 * (p.r1 - p.r0);
  const double am = 0.5 * (p.th0 + p.th1), ah = 0.5 * (p.th1 - p.th0);
  double sum = 0.0, asum = 0.0;
  for (unsigned a = 0; a < N; ++a) {
    const double r = rm + rh * rule.x[a];
    for (unsigned b = 0; b < N; ++b) {
      const double angle = am + ah * rule.x[b];
      const double v = r * f(center + std::polar(r, angle));
      sum += rule.w[a] * rule.w[b] * v;
      asum += rule.w[a] * rule.w[b] * std::abs(v);
    }
  }
  // dA = dx dy / pi = r dr d(angle) / pi
  const double jac = rh * ah / std::numbers::pi;
  if (abs_sum) *abs_sum = asum * jac;
  return sum * jac;
}

void evaluate_panel(const Field& f, cplx center, Panel& p) {
  double abs_fine = 0.0;
  const double coarse = apply_rule(coarse_rule(), f, center, p, nullptr);
  const double fine = apply_rule(fine_rule(), f, center, p, &abs_fine);
  if (!std::isfinite(fine)) {
    throw std::domain_error("integrand is not finite on the integration domain");
  }
  p.value = fine;
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * abs_fine;
  p.error = std::max(std::abs(fine - coarse), floor);
}

double integrate_polar(const Field& f, cplx center, double inner, double outer,
                       const QuadratureSpec& spec) {
  spec.validate();
  if (!(inner >= 0.0) || !(outer > inner) || !std::isfinite(outer)) {
    throw std::invalid_argument("integration radii must satisfy 0 <= inner < outer < inf");
  }

  std::vector<Panel> heap;
  heap.reserve(static_cast<std::size_t>(spec.radial_panels * spec.angular_panels) * 4);
  for (int i = 0; i < spec.radial_panels; ++i) {
    for (int j = 0; j < spec.angular_panels; ++j) {
      Panel p{inner + (outer - inner) * i / spec.radial_panels,
              inner + (outer - inner) * (i + 1) / spec.radial_panels,
              kTwoPi * j / spec.angular_panels, kTwoPi * (j + 1) / spec.angular_panels};
      evaluate_panel(f, center, p);
      heap.push_back(p);
    }
  }
  std::make_heap(heap.begin(), heap.end());

  auto totals = [&heap] {
    double v = 0.0, e = 0.0;
    for (const auto& p : heap) {
      v += p.value;
      e += p.error;
    }
    return std::pair{v, e};
  };

  auto [value, error] = totals();
  while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
    std::pop_heap(heap.begin(), heap.end());
    Panel worst = heap.back();
    heap.pop_back();
    if (worst.depth >= spec.max_refinements || heap.size() + 4 > kMaxPanels) {
      throw RefinementExhausted(value, error);
    }
    value -= worst.value;
    error -= worst.error;
    const double rm = 0.5 * (worst.r0 + worst.r1);
    const double am = 0.5 * (worst.th0 + worst.th1);
    const std::array<Panel, 4> children{{{worst.r0, rm, worst.th0, am},
                                         {worst.r0, rm, am, worst.th1},
                                         {rm, worst.r1, worst.th0, am},
                                         {rm, worst.r1, am, worst.th1}}};
    for (Panel child : children) {
      child.depth = worst.depth + 1;
      evaluate_panel(f, center, child);
      value += child.value;
      error += child.error;
      heap.push_back(child);
      std::push_heap(heap.begin(), heap.end());
    }
    // the running sums drift; resync them now and then
    if (heap.size() % 1024 < 4) std::tie(value, error) = totals();
  }
  return totals().first;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw std::invalid_argument("quadrature tolerances must be positive");
  }
  if (radial_panels < 4 || angular_panels < 4) {
    throw std::invalid_argument("quadrature panel counts must be at least 4");
  }
  if (max_refinements < 1) {
    throw std::invalid_argument("max_refinements must be at least 1");
  }
}

RefinementExhausted::RefinementExhausted(double estimate, double error_bound)
    : std::runtime_error("quadrature refinement exhausted: estimate " + std::to_string(estimate) +
                         ", error bound " + std::to_string(error_bound)),
      estimate_(estimate),
      error_bound_(error_bound) {}

double integrate_disk(const Field& f, cplx center, double radius, const QuadratureSpec& spec) {
  if (!(radius > 0.0)) throw std::invalid_argument("disk radius must be positive");
  return integrate_polar(f, center, 0.0, radius, spec);
}

double integrate_annulus(const Field& f, cplx center, double inner, double outer,
                         const QuadratureSpec& spec) {
  return integrate_polar(f, center, inner, outer, spec);
}

TruncatedIntegral integrate_plane_truncated(const Field& f, cplx center, double cutoff_radius,
                                            const QuadratureSpec& spec,
                                            std::optional<double> tail_bound) {
  TruncatedIntegral out;
  out.value = integrate_disk(f, center, cutoff_radius, spec);
  if (tail_bound) {
    out.tail_bound = *tail_bound;
  } else {
    constexpr int kSamples = 256;
    double edge = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      edge = std::max(edge, std::abs(f(center + std::polar(cutoff_radius, kTwoPi * i / kSamples))));
    }
    out.tail_bound = edge * cutoff_radius * cutoff_radius;
  }
  return out;
}

double find_root_monotone(const std::function<double(double)>& g, double lo, double hi,
                          double tol) {
  if (!(lo <= hi)) throw BracketError("root bracket has lo > hi");
  if (!(tol > 0.0)) throw std::invalid_argument("root tolerance must be positive");
  double glo = g(lo), ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if (std::signbit(glo) == std::signbit(ghi)) {
    throw BracketError("g has the same sign at both ends of [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  }

  std::uintmax_t max_iter = 200;
  auto width_ok = [tol](double a, double b) { return std::abs(b - a) <= tol; };
  try {
    auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, width_ok, max_iter);
    lo = a;
    hi = b;
  } catch (const boost::math::evaluation_error&) {
    // fall through to bisection on the original bracket
  }
  if (hi < lo) std::swap(lo, hi);
  glo = g(lo);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if (std::signbit(gm) == std::signbit(glo)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double batch_means_std_error(std::span<const double> values, int batches) {
  const std::size_t m = values.size();
  if (m < 2 || batches < 2) return 0.0;
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(batches), m);
  const std::size_t per = m / count;
  std::vector<double> means(count, 0.0);
  for (std::size_t b = 0; b < count; ++b) {
    for (std::size_t i = 0; i < per; ++i) means[b] += values[b * per + i];
    means[b] /= double(per);
  }
  double mu = 0.0;
  for (double v : means) mu += v;
  mu /= double(count);
  double var = 0.0;
  for (double v : means) var += (v - mu) * (v - mu);
  var /= double(count - 1);
  return std::sqrt(var / double(count));
}

}  // namespace betagas
