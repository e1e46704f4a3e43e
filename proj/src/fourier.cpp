#include "opuclab/fourier.hpp"

#include <limits>

#include "opuclab/fft.hpp"

namespace opuclab {

namespace {

// sum_{j > M} j^{-k} <= M^{-k} + M^{1-k}/(k-1); infinite for k < 2.
Real zeta_tail(long M, int k) {
  if (k < 2) return std::numeric_limits<Real>::infinity();
  Real m(M);
  return pow(m, -k) + pow(m, 1 - k) / (k - 1);
}

// V_j for j = 0..jmax, all from one composite Gauss pass between kinks,
// with node counts doubled until the whole batch stabilises.
std::vector<Cx> low_coeffs_gauss(const PotentialV& V, long jmax, const PrecisionContext& ctx) {
  const Real pi = pi_val();
  const Real two_pi = 2 * pi;
  const std::vector<Real>& bp = V.jump_angles();

  auto pass = [&](unsigned G) {
    std::vector<Cx> acc(jmax + 1, Cx(0));
    const GaussRule& rule = gauss_legendre(G);
    auto add_segment = [&](const Real& a, const Real& b) {
      Real half = (b - a) / 2;
      Real mid = (a + b) / 2;
      for (unsigned q = 0; q < G; q++) {
        Real theta = mid + half * rule.x[q];
        Real vw = V(theta > pi ? Real(theta - two_pi) : theta) * rule.w[q] * half;
        Cx ph(1);
        Cx step = unit(-theta);  // phase is 2pi-periodic, no wrap needed
        for (long j = 0; j <= jmax; j++) {
          acc[j] += vw * ph;
          ph *= step;
        }
      }
    };
    if (bp.empty()) {
      add_segment(-pi, pi);
    } else {
      for (std::size_t i = 0; i + 1 < bp.size(); i++) add_segment(bp[i], bp[i + 1]);
      add_segment(bp.back(), bp.front() + two_pi);
    }
    for (Cx& c : acc) c /= two_pi;
    return acc;
  };

  std::vector<Cx> prev = pass(64);
  for (unsigned G = 128; G <= 8192; G *= 2) {
    std::vector<Cx> cur = pass(G);
    Real diff(0);
    for (long j = 0; j <= jmax; j++) diff = fmax(diff, abs(cur[j] - prev[j]));
    Real scale = fmax(Real(1), abs(cur[0]));
    if (diff <= ctx.tol() * scale) return cur;
    prev = std::move(cur);
  }
  throw ConvergenceError("fourier: low-mode quadrature did not stabilise");
}

// V_j for j = 1..Mt from one dense FFT on a half-offset grid. Accuracy is
// set by aliasing, |error_j| <= sum_{m != 0} |V_{j + m Nf}|, so the grid is
// kept at >= 4x oversampling.
std::vector<Cx> bulk_coeffs_fft(const PotentialV& V, long Mt) {
  std::size_t nf = 1;
  while (static_cast<long>(nf) < 4 * Mt) nf <<= 1;
  const Real pi = pi_val();
  const Real nf_r(static_cast<long>(nf));
  std::vector<Cx> a(nf);
  for (std::size_t q = 0; q < nf; q++)
    a[q] = Cx(V(-pi + 2 * pi * (Real(static_cast<long>(q)) + Real(1) / 2) / nf_r));
  fft_pow2(a, false);
  // Node offset: theta_q = -pi + 2 pi (q + 1/2)/Nf, hence the per-mode
  // phase (-1)^j e^{-i j pi/Nf} on top of the raw DFT bin.
  std::vector<Cx> out(Mt);
  Cx tw = unit(-pi / nf_r);
  Cx ph = tw;
  for (long j = 1; j <= Mt; j++) {
    Cx c = a[j] * ph / nf_r;
    out[j - 1] = (j & 1) ? -c : c;
    ph *= tw;
  }
  return out;
}

FourierTable exact_table(Real V0, std::vector<Cx> coeff, int k) {
  FourierTable t;
  t.V0 = std::move(V0);
  t.M_trunc = static_cast<long>(coeff.size());
  t.coeff = std::move(coeff);
  t.tail_bound = Real(0);
  t.meets_tol = true;
  t.k = k;
  return t;
}

}  // namespace

FourierTable build_fourier(const PotentialV& V, const PrecisionContext& ctx, long cap) {
  if (cap < 1) throw ValidationError("build_fourier: cap must be >= 1");

  if (std::holds_alternative<std::monostate>(V.form()))
    return exact_table(Real(0), {}, V.smoothness_k());

  if (const auto* c = std::get_if<CosineForm>(&V.form())) {
    std::vector<Cx> coeff(c->k0, Cx(0));
    coeff[c->k0 - 1] = Cx(c->A / 2);
    return exact_table(Real(0), std::move(coeff), V.smoothness_k());
  }

  if (const auto* fl = std::get_if<FourierListForm>(&V.form()))
    return exact_table(fl->V0, fl->coeff, V.smoothness_k());

  if (const auto* pc = std::get_if<PiecewiseCubicForm>(&V.form())) {
    // V_j = -2 M sin^2(j eps/2) / (pi j^4); the mean follows from summing
    // the series at theta = 0 against the inner branch value:
    // V0 = 7 M eps^4/(24 pi) - M eps^3/2 + M pi eps^2/6.
    const Real pi = pi_val();
    const Real& M = pc->M;
    const Real& e = pc->eps;
    FourierTable t;
    t.V0 = 7 * M * e * e * e * e / (24 * pi) - M * e * e * e / 2 + M * pi * e * e / 6;
    t.M_trunc = cap;
    t.coeff.reserve(cap);
    for (long j = 1; j <= cap; j++) {
      Real s = sin(Real(j) * e / 2);
      Real j4 = Real(j) * Real(j);
      j4 *= j4;
      t.coeff.push_back(Cx(-2 * M * s * s / (pi * j4)));
    }
    t.k = 3;  // sup |V'''| = M
    t.tail_bound = abs(M) * zeta_tail(t.M_trunc, t.k);
    t.meets_tol = is_finite(t.tail_bound) && t.tail_bound < ctx.tol();
    return t;
  }

  const auto& jf = std::get<JumpFamilyForm>(V.form());
  const int k = static_cast<int>(jf.k);
  long j_lo = std::min<long>(128, cap);
  std::vector<Cx> low = low_coeffs_gauss(V, j_lo, ctx);

  FourierTable t;
  t.V0 = low[0].re;
  t.k = k;
  t.M_trunc = cap;
  if (cap <= j_lo) {
    t.coeff.assign(low.begin() + 1, low.end());
  } else {
    t.coeff = bulk_coeffs_fft(V, cap);
    // The two routes overlap on the upper half of the Gauss range; treat a
    // mismatch there as a failure of either one.
    Real agree_tol = fmax(Real(1000) * ctx.tol(), Real(1e-9) * (1 + V.sup_deriv(1)));
    for (long j = j_lo / 2 + 1; j <= j_lo; j++)
      if (abs(t.coeff[j - 1] - low[j]) > agree_tol)
        throw ConvergenceError("fourier: quadrature and FFT coefficients disagree at mode " +
                               std::to_string(j));
    for (long j = 1; j <= j_lo; j++) t.coeff[j - 1] = low[j];
  }
  t.tail_bound = V.sup_deriv(static_cast<unsigned>(k)) * zeta_tail(t.M_trunc, k);
  t.meets_tol = is_finite(t.tail_bound) && t.tail_bound < ctx.tol();
  return t;
}

ConditionTReport check_condition_t(const PotentialV& V, const FourierTable& table,
                                   const PrecisionContext& ctx) {
  ConditionTReport rep;
  rep.sum = Real(0);
  for (long j = 1; j <= table.M_trunc; j++) rep.sum += 2 * Real(j) * abs(table.coeff[j - 1]);

  if (table.tail_bound == 0) {
    rep.tail = Real(0);
  } else {
    // |V_j| <= TV(V^{(k)}) / (2 pi j^{k+1}) gives
    // 2 sum_{j>M} j |V_j| <= (TV/pi) sum_{j>M} j^{-k}. The continuous part
    // of TV is a dense sample estimate; the kink jumps are exact jets.
    int k = table.k;
    Real tv(0);
    for (const Real& a : V.jump_angles()) tv += abs(V.derivative_jump(a, k));
    const long samples = 4096;
    const Real pi = pi_val();
    Real cont(0);
    for (long i = 0; i < samples; i++) {
      Real theta = -pi + 2 * pi * (Real(i) + Real(1) / 2) / samples;
      cont += abs(V.jet(theta, k + 1).deriv(k + 1));
    }
    tv += cont * 2 * pi / samples;
    rep.tail = tv / pi * zeta_tail(table.M_trunc, k);
  }
  (void)ctx;
  rep.holds = is_finite(rep.tail) && rep.sum + rep.tail < 1;
  rep.margin = 1 - rep.sum - rep.tail;
  return rep;
}

ConditionConvexReport check_condition_convex(const PotentialV& V, const PrecisionContext& ctx) {
  ConditionConvexReport rep;
  rep.inf_vpp = std::numeric_limits<Real>::infinity();
  rep.argmin = Real(0);
  auto consider = [&](const Real& theta, const Real& val) {
    if (val < rep.inf_vpp) {
      rep.inf_vpp = val;
      rep.argmin = theta;
    }
  };
  const long samples = 4096;
  const Real pi = pi_val();
  for (long i = 0; i < samples; i++) {
    Real theta = -pi + 2 * pi * (Real(i) + Real(1) / 2) / samples;
    consider(theta, V.jet(theta, 2).deriv(2));
  }
  for (const Real& a : V.jump_angles()) {
    consider(a, V.jet_sided(a, 2, +1).deriv(2));
    consider(a, V.jet_sided(a, 2, -1).deriv(2));
    // A downward kink in V' puts a negative point mass into V''.
    if (V.derivative_jump(a, 1) < -1000 * ctx.tol())
      consider(a, -std::numeric_limits<Real>::infinity());
  }
  rep.holds = rep.inf_vpp > Real(-1) / 2;
  rep.margin = rep.inf_vpp + Real(1) / 2;
  return rep;
}

}  // namespace opuclab
