#include "opuclab/opuc.hpp"

#include <cmath>

namespace opuclab {

std::string WeightSpec::describe() const {
  std::string head = mode == WeightMode::Varying
                         ? "varying[n=" + std::to_string(n_weight) + "]:"
                         : "fixed:";
  return head + potential.describe();
}

namespace {

// All moments t = 0..n_max in one pass: Gauss panels between kinks (or a
// uniform grid when there are none), phases built incrementally per node.
std::vector<Cx> moment_pass(const WeightSpec& w, const Real& V0, long n_max, unsigned G) {
  const Real pi = pi_val();
  const Real two_pi = 2 * pi;
  const Real s = w.scale_s();
  std::vector<Cx> acc(n_max + 1, Cx(0));

  auto absorb = [&](const Real& theta_raw, const Real& weight_q) {
    Real theta = theta_raw;
    if (theta > pi) theta -= two_pi;
    if (theta < -pi) theta += two_pi;
    Real f = exp(-s * (w.potential(theta) - V0)) * weight_q;
    if (!is_finite(f)) throw ValidationError("moments: non-finite integrand sample");
    Cx step = unit(-theta);
    Cx ph(1);
    for (long t = 0; t <= n_max; t++) {
      acc[t] += f * ph;
      ph *= step;
    }
  };

  const std::vector<Real>& bp = w.potential.jump_angles();
  if (bp.empty()) {
    for (unsigned q = 0; q < G; q++)
      absorb(-pi + two_pi * Real(static_cast<long>(q)) / static_cast<long>(G),
             Real(1) / static_cast<long>(G));
  } else {
    const GaussRule& rule = gauss_legendre(G);
    auto segment = [&](const Real& a, const Real& b) {
      Real half = (b - a) / 2;
      Real mid = (a + b) / 2;
      for (unsigned q = 0; q < G; q++) absorb(mid + half * rule.x[q], rule.w[q] * half / two_pi);
    };
    for (std::size_t i = 0; i + 1 < bp.size(); i++) segment(bp[i], bp[i + 1]);
    segment(bp.back(), bp.front() + two_pi);
  }
  return acc;
}

}  // namespace

MomentTable build_moments(const WeightSpec& w, long n_max, const PrecisionContext& ctx) {
  if (n_max < 0) throw ValidationError("moments: n_max must be >= 0");
  if (w.mode == WeightMode::Varying && w.n_weight < 1)
    throw ValidationError("moments: varying mode needs n_weight >= 1");

  Real s = w.scale_s();
  Real osc = w.potential.osc_bound();
  Real needed = s * osc / log2_val() + 64;
  if (Real(static_cast<long>(ctx.mantissa_bits)) < needed)
    throw PrecisionGateError("moments: weight spans e^{" + (s * osc).str(6) +
                             "}; need >= " + needed.str(6) + " mantissa bits, have " +
                             std::to_string(ctx.mantissa_bits));

  QuadResult v0q = segmented_gauss_auto([&](const Real& t) { return Cx(w.potential(t)); },
                                        w.potential.jump_angles(), ctx);
  Real V0 = v0q.value.re;

  // Moments are consumed by recursions that subtract near-equal quantities;
  // hold them well below ctx.tol so identity checks at 10 * tol have room.
  Real mtol = ctx.tol() * pow(Real(2), -32);
  unsigned G = 64;
  while (G < static_cast<unsigned>(std::max<long>(n_max, 64))) G *= 2;
  std::vector<Cx> prev = moment_pass(w, V0, n_max, G);
  for (G *= 2; G <= (1u << 15); G *= 2) {
    std::vector<Cx> cur = moment_pass(w, V0, n_max, G);
    Real diff(0);
    for (long t = 0; t <= n_max; t++) diff = fmax(diff, abs(cur[t] - prev[t]));
    if (diff <= mtol * fmax(Real(1), abs(cur[0])))
      return MomentTable(std::move(cur), n_max, V0, s);
    prev = std::move(cur);
  }
  throw ConvergenceError("moments: quadrature did not stabilise at " +
                         std::to_string(1u << 15) + " nodes");
}

OpucFamily levinson(const MomentTable& moments, long n_max, const WeightSpec& w,
                    const PrecisionContext& ctx) {
  if (n_max > moments.n_max())
    throw ValidationError("levinson: moment table too short for requested degree");

  OpucFamily fam{w, {}, moments.V0(), moments.s()};

  std::vector<Cx> c = {Cx(1)};
  Real nsq = moments.mu(0).re;
  if (!(nsq > 0)) throw ConvergenceError("levinson: nonpositive norm at level 0");
  fam.level.push_back(OpucLevel{0, c, Cx(1), nsq, 1 / nsq});

  for (long n = 0; n < n_max; n++) {
    Cx ip(0);  // <z pi_n, 1> = sum_j c_j mu(j - n - 1)
    for (long j = 0; j <= n; j++) ip += c[j] * moments.mu(j - n - 1);
    Cx alpha = -ip / nsq;
    if (!(abs(alpha) < 1))
      throw ConvergenceError("levinson: |alpha| >= 1 at level " + std::to_string(n + 1));

    std::vector<Cx> cn(n + 2);
    cn[0] = Cx(1);
    for (long j = 1; j <= n + 1; j++)
      cn[j] = (j <= n ? c[j] : Cx(0)) + alpha * conj(c[n + 1 - j]);

    // Direct norm <pi, z^{n+1}> = sum_j c_j mu(j); the recursion identity
    // (1 - |alpha|^2) ||pi_n||^2 only cross-checks it.
    Cx ns(0);
    for (long j = 0; j <= n + 1; j++) ns += cn[j] * moments.mu(j);
    Real direct = ns.re;
    Real predicted = (1 - norm_sq(alpha)) * nsq;
    Real guard = Real(1000000) * ctx.tol() * fmax(direct, Real(1));
    if (!(direct > 0) || abs(ns.im) > guard || abs(direct - predicted) > guard)
      throw ConvergenceError("levinson: norm identity violated at level " +
                             std::to_string(n + 1));

    c = std::move(cn);
    nsq = direct;
    fam.level.push_back(OpucLevel{n + 1, c, alpha, nsq, 1 / nsq});
  }

  // Full quadratic-form norm at the top level, an O(n^2) independent check
  // that does not lean on orthogonality.
  {
    const std::vector<Cx>& cf = fam.level.back().c;
    long n = n_max;
    Cx full(0);
    for (long j = 0; j <= n; j++)
      for (long l = 0; l <= n; l++) full += cf[j] * conj(cf[l]) * moments.mu(j - l);
    Real guard = Real(1000000) * ctx.tol() * fmax(full.re, Real(1));
    if (abs(full - Cx(fam.level.back().norm_sq_scaled)) > guard)
      throw ConvergenceError("levinson: quadratic-form norm mismatch at top level");
  }
  return fam;
}

OpucFamily gram_schmidt_oracle(const MomentTable& moments, long n_max, const WeightSpec& w,
                               const PrecisionContext& ctx) {
  if (n_max > moments.n_max())
    throw ValidationError("gram-schmidt: moment table too short for requested degree");

  // Ascending coefficient vectors; <z^a, z^b> = mu(b - a).
  auto inner = [&](const std::vector<Cx>& f, const std::vector<Cx>& g) {
    Cx acc(0);
    for (std::size_t a = 0; a < f.size(); a++)
      for (std::size_t b = 0; b < g.size(); b++)
        acc += f[a] * conj(g[b]) * moments.mu(static_cast<long>(b) - static_cast<long>(a));
    return acc;
  };

  OpucFamily fam{w, {}, moments.V0(), moments.s()};

  std::vector<std::vector<Cx>> u;
  std::vector<Real> unsq;
  for (long p = 0; p <= n_max; p++) {
    std::vector<Cx> v(p + 1, Cx(0));
    v[p] = Cx(1);
    for (long q = 0; q < p; q++) {
      Cx coef = inner(v, u[q]) / unsq[q];
      for (std::size_t l = 0; l < u[q].size(); l++) v[l] -= coef * u[q][l];
    }
    Cx nn = inner(v, v);
    if (!(nn.re > 0) || abs(nn.im) > Real(1000) * ctx.tol() * fmax(nn.re, Real(1)))
      throw ConvergenceError("gram-schmidt: moment matrix not positive definite at level " +
                             std::to_string(p));
    u.push_back(v);
    unsq.push_back(nn.re);

    OpucLevel lvl;
    lvl.n = p;
    lvl.c.resize(p + 1);
    for (long j = 0; j <= p; j++) lvl.c[j] = v[p - j];
    lvl.alpha = p == 0 ? Cx(1) : v[0];
    lvl.norm_sq_scaled = nn.re;
    lvl.gamma_sq_scaled = 1 / nn.re;
    fam.level.push_back(std::move(lvl));
  }
  return fam;
}

}  // namespace opuclab
