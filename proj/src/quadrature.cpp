#include "opuclab/quadrature.hpp"

#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace opuclab {

namespace {

Cx sample_checked(const Integrand& f, const Real& theta, unsigned idx) {
  Cx v = f(theta);
  if (!is_finite(v))
    throw ValidationError("quadrature: non-finite sample at node index " + std::to_string(idx));
  return v;
}

}  // namespace

Cx periodic_trapezoid_mean(const Integrand& f, unsigned points, const PrecisionContext& ctx) {
  auto scope = ctx.activate();
  const Real pi = pi_val();
  Cx sum(0);
  Real two_pi_over_m = 2 * pi / static_cast<long>(points);
  for (unsigned j = 0; j < points; j++) {
    Real theta = -pi + two_pi_over_m * static_cast<long>(j);
    sum += sample_checked(f, theta, j);
  }
  return sum / Real(static_cast<long>(points));
}

QuadResult periodic_trapezoid_auto(const Integrand& f, const PrecisionContext& ctx,
                                   unsigned start_points, unsigned cap_points) {
  auto scope = ctx.activate();
  const Real pi = pi_val();
  const Real tol = ctx.tol();
  unsigned m = start_points ? start_points : ctx.base_quad_points;

  // Running sum of raw samples; refining from M to 2M only adds the odd
  // nodes of the finer grid, so earlier samples are reused.
  Cx sum(0);
  Real step = 2 * pi / static_cast<long>(m);
  for (unsigned j = 0; j < m; j++) sum += sample_checked(f, -pi + step * static_cast<long>(j), j);
  Cx value = sum / Real(static_cast<long>(m));
  Real delta(0);

  while (m < cap_points) {
    unsigned m2 = m * 2;
    Real step2 = 2 * pi / static_cast<long>(m2);
    for (unsigned j = 1; j < m2; j += 2) sum += sample_checked(f, -pi + step2 * static_cast<long>(j), j);
    Cx value2 = sum / Real(static_cast<long>(m2));
    delta = abs(value2 - value);
    value = value2;
    m = m2;
    if (delta <= tol * fmax(Real(1), abs(value))) return {value, delta, m, true};
  }
  return {value, delta, m, false};
}

const GaussRule& gauss_legendre(unsigned n) {
  thread_local std::map<std::pair<unsigned, unsigned>, GaussRule> cache;
  unsigned digits = Real::default_precision();
  auto key = std::make_pair(n, digits);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  const Real pi = pi_val();
  // Newton on P_n from the Chebyshev-like seed; quadratic convergence makes
  // a fixed iteration count sufficient for any practical precision.
  unsigned iters = 6 + static_cast<unsigned>(std::log2(static_cast<double>(digits) + 1));
  auto legendre_pair = [n](const Real& x, Real& pn, Real& pprev) {
    Real p0(1), p1 = x;
    for (unsigned k = 1; k < n; k++) {
      Real p2 = ((2 * static_cast<long>(k) + 1) * x * p1 - static_cast<long>(k) * p0) /
                static_cast<long>(k + 1);
      p0 = p1;
      p1 = p2;
    }
    pn = p1;
    pprev = p0;
  };
  for (unsigned i = 0; i < n; i++) {
    Real x = cos(pi * (Real(static_cast<long>(i)) + Real(0.75)) / (Real(static_cast<long>(n)) + Real(0.5)));
    Real pn(0), pprev(0);
    for (unsigned it2 = 0; it2 < iters; it2++) {
      legendre_pair(x, pn, pprev);
      Real dp = static_cast<long>(n) * (x * pn - pprev) / (x * x - 1);
      x -= pn / dp;
    }
    legendre_pair(x, pn, pprev);
    Real dp = static_cast<long>(n) * (x * pn - pprev) / (x * x - 1);
    rule.x[i] = x;
    rule.w[i] = 2 / ((1 - x * x) * dp * dp);
  }
  return cache.emplace(key, std::move(rule)).first->second;
}

Cx integrate_gauss(const Integrand& f, const Real& a, const Real& b, unsigned n) {
  const GaussRule& rule = gauss_legendre(n);
  Real half = (b - a) / 2;
  Real mid = (a + b) / 2;
  Cx sum(0);
  for (unsigned i = 0; i < n; i++) sum += f(mid + half * rule.x[i]) * rule.w[i];
  return sum * half;
}

Cx segmented_gauss_mean(const Integrand& f, const std::vector<Real>& breakpoints,
                        unsigned nodes_per_segment, const PrecisionContext& ctx) {
  auto scope = ctx.activate();
  if (breakpoints.empty()) return periodic_trapezoid_mean(f, ctx.base_quad_points, ctx);
  const Real pi = pi_val();
  const GaussRule& rule = gauss_legendre(nodes_per_segment);
  Cx total(0);
  unsigned idx = 0;
  auto add_segment = [&](const Real& a, const Real& b) {
    Real half = (b - a) / 2;
    Real mid = (a + b) / 2;
    Cx sum(0);
    for (unsigned i = 0; i < nodes_per_segment; i++) {
      Real theta = mid + half * rule.x[i];
      // Angles beyond pi wrap into the principal period for the evaluator.
      Real t = theta > pi ? Real(theta - 2 * pi) : theta;
      sum += sample_checked(f, t, idx++) * rule.w[i];
    }
    total += sum * half;
  };
  for (std::size_t s = 0; s + 1 < breakpoints.size(); s++) add_segment(breakpoints[s], breakpoints[s + 1]);
  add_segment(breakpoints.back(), breakpoints.front() + 2 * pi);
  return total / (2 * pi);
}

QuadResult segmented_gauss_auto(const Integrand& f, const std::vector<Real>& breakpoints,
                                const PrecisionContext& ctx, unsigned start_nodes,
                                unsigned cap_nodes) {
  auto scope = ctx.activate();
  if (breakpoints.empty()) return periodic_trapezoid_auto(f, ctx);
  const Real tol = ctx.tol();
  unsigned g = start_nodes;
  Cx value = segmented_gauss_mean(f, breakpoints, g, ctx);
  Real delta(0);
  while (g < cap_nodes) {
    g *= 2;
    Cx value2 = segmented_gauss_mean(f, breakpoints, g, ctx);
    delta = abs(value2 - value);
    value = value2;
    if (delta <= tol * fmax(Real(1), abs(value)))
      return {value, delta, g * static_cast<unsigned>(breakpoints.size()), true};
  }
  return {value, delta, g * static_cast<unsigned>(breakpoints.size()), false};
}

}  // namespace opuclab
