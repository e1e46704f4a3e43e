#pragma once

#include <functional>
#include <vector>

#include "opuclab/cx.hpp"

namespace opuclab {

using Integrand = std::function<Cx(const Real&)>;

struct QuadResult {
  Cx value;
  Real est_error;   // |last - previous| of the doubling sequence
  unsigned nodes;   // nodes used by the final pass (total across segments)
  bool converged;
};

// Mean of f over one period: (1/2pi) integral_{-pi}^{pi} f, via the M-point
// rule with nodes theta_j = -pi + 2*pi*j/M. Exact for trigonometric
// polynomials of degree < M/2 (the j=0..M-1 exponentials it resolves).
// Non-finite samples raise ValidationError naming the node index.
Cx periodic_trapezoid_mean(const Integrand& f, unsigned points, const PrecisionContext& ctx);

// Doubles the node count until two successive passes agree within
// ctx.tol * max(1, |value|) or the cap is reached.
QuadResult periodic_trapezoid_auto(const Integrand& f, const PrecisionContext& ctx,
                                   unsigned start_points = 0, unsigned cap_points = 1u << 18);

// Gauss-Legendre nodes and weights on (-1, 1) at the active precision,
// cached per (count, precision).
struct GaussRule {
  std::vector<Real> x;
  std::vector<Real> w;
};
const GaussRule& gauss_legendre(unsigned n);

// integral_a^b f via n-point Gauss-Legendre.
Cx integrate_gauss(const Integrand& f, const Real& a, const Real& b, unsigned n);

// Mean of f over one period by composite Gauss-Legendre between sorted
// breakpoints in [-pi, pi); the gap wrapping through pi is one extra
// segment. With no breakpoints, delegates to the periodic rule.
Cx segmented_gauss_mean(const Integrand& f, const std::vector<Real>& breakpoints,
                        unsigned nodes_per_segment, const PrecisionContext& ctx);

QuadResult segmented_gauss_auto(const Integrand& f, const std::vector<Real>& breakpoints,
                                const PrecisionContext& ctx, unsigned start_nodes = 32,
                                unsigned cap_nodes = 1u << 14);

}  // namespace opuclab
