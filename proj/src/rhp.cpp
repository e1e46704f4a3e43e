#include "opuclab/rhp.hpp"

#include <algorithm>
#include <cmath>

namespace opuclab {

namespace {

// Wrap an angle into [-pi, pi) before handing it to the potential, whose
// piecewise description only covers one period.
Real wrap_angle(Real theta) {
  const Real pi = pi_val();
  const Real two_pi = 2 * pi;
  while (theta >= pi) theta -= two_pi;
  while (theta < -pi) theta += two_pi;
  return theta;
}

// Horner evaluation of a descending coefficient vector together with the
// first two derivatives in z.
struct PolyJet {
  Cx p, dp, ddp;
};

PolyJet poly_jet(const std::vector<Cx>& c, const Cx& z) {
  Cx p(0), dp(0), ddp(0);
  for (const Cx& coef : c) {
    ddp = ddp * z + dp * Real(2);
    dp = dp * z + p;
    p = p * z + coef;
  }
  return {p, dp, ddp};
}

// Scaled circle density g(theta) = P(e^{i theta}) e^{-i n theta} e^{-s(V - V0)}
// and its first two theta-derivatives. P is given by descending coefficients.
struct DensityJet {
  Cx g0, g1, g2;
};

class CircleDensity {
 public:
  CircleDensity(const std::vector<Cx>& coeff, long n, const PotentialV& V, Real s, Real V0)
      : coeff_(coeff), n_(n), V_(V), s_(std::move(s)), v0_(std::move(V0)) {}

  Cx value(const Real& theta_raw) const {
    Real theta = wrap_angle(theta_raw);
    Cx s = unit(theta);
    Cx p(0);
    for (const Cx& coef : coeff_) p = p * s + coef;
    Real w = exp(-s_ * (V_(theta) - v0_));
    return p * unit(-Real(n_) * theta) * w;
  }

  DensityJet jets(const Real& theta_raw) const {
    Real theta = wrap_angle(theta_raw);
    Cx s = unit(theta);
    PolyJet pj = poly_jet(coeff_, s);
    // A = P(e^{i theta}): A' = i s P', A'' = -s P' - s^2 P''
    Cx A = pj.p;
    Cx A1 = Cx(0, 1) * s * pj.dp;
    Cx A2 = Cx(-1, 0) * (s * pj.dp + s * s * pj.ddp);
    // B = e^{-i n theta}
    Cx B = unit(-Real(n_) * theta);
    Cx B1 = Cx(0, -Real(n_)) * B;
    Cx B2 = Cx(-Real(n_) * Real(n_), 0) * B;
    // C = e^{-s(V - V0)}
    Jet vj = V_.jet(theta, 2);
    Real v1 = vj.deriv(1), v2 = vj.deriv(2);
    Real Cv = exp(-s_ * (vj.deriv(0) - v0_));
    Real C1 = -s_ * v1 * Cv;
    Real C2 = (s_ * s_ * v1 * v1 - s_ * v2) * Cv;
    DensityJet out;
    out.g0 = A * B * Cv;
    out.g1 = A1 * B * Cv + A * B1 * Cv + A * B * C1;
    out.g2 = A2 * B * Cv + A * B2 * Cv + A * B * C2 +
             Real(2) * (A1 * B1 * Cv + A1 * B * C1 + A * B1 * C1);
    return out;
  }

 private:
  const std::vector<Cx>& coeff_;
  long n_;
  const PotentialV& V_;
  Real s_;
  Real v0_;
};

// (1/2pi i) oint g(s)/(s - z) ds over the unit circle, z strictly off it.
// Far points integrate directly; near points subtract the second order Taylor
// model of g at the foot point and add its closed-form Cauchy transform.
Cx cauchy_transform(const CircleDensity& g, const std::vector<Real>& kinks, const Cx& z,
                    const PrecisionContext& ctx) {
  const Real pi = pi_val();
  const Real two_pi = 2 * pi;
  Real dist = abs(abs(z) - 1);

  if (dist > Real("0.05")) {
    QuadResult q = segmented_gauss_auto(
        [&](const Real& theta) {
          Cx s = unit(theta);
          return g.value(theta) * s / (s - z);
        },
        kinks, ctx);
    return q.value;
  }

  Real theta0 = arg(z);
  Cx s0 = unit(theta0);

  // Half-width of the graded region: stay clear of kinks so every panel sees
  // an analytic density.
  Real gap = pi;
  for (const Real& a : kinks) {
    for (int k = -1; k <= 1; k++) {
      Real d = abs(theta0 - (a + Real(2 * k) * pi));
      gap = fmin(gap, d);
    }
  }
  if (gap < Real("1e-3"))
    throw ValidationError("cauchy transform: evaluation angle too close to a weight kink");
  Real delta_w = fmin(gap / 2, pi / 8);

  DensityJet j = g.jets(theta0);
  // Convert theta-derivatives at theta0 into Taylor coefficients of g in
  // powers of u = s - s0 (series reversion of s = s0 e^{i(theta-theta0)}).
  Cx alpha = Cx(0, -1) / s0;           // dtheta/ds at s0
  Cx beta = Cx(0, 1) / (Real(2) * s0 * s0);  // second reversion coefficient
  Cx a0 = j.g0;
  Cx a1 = j.g1 * alpha;
  Cx a2 = j.g1 * beta + (j.g2 / Real(2)) * (alpha * alpha);

  auto taylor = [&](const Cx& s) {
    Cx u = s - s0;
    return a0 + u * (a1 + u * a2);
  };

  // Panel edges over [theta0 - pi, theta0 + pi]: kinks lifted into the
  // window, coarse panels capped at pi/8, geometric grading toward theta0.
  std::vector<Real> edges;
  auto push_range = [&](const Real& a, const Real& b) {
    // split [a, b] into chunks of width <= pi/8
    Real width = b - a;
    if (!(width > 0)) return;
    long parts = 1;
    while (width / parts > pi / 8) parts++;
    for (long i = 0; i <= parts; i++) edges.push_back(a + width * Real(i) / Real(parts));
  };
  std::vector<Real> lifted;
  for (const Real& a : kinks)
    for (int k = -2; k <= 2; k++) {
      Real cand = a + Real(2 * k) * pi;
      if (cand > theta0 - pi && cand < theta0 + pi) lifted.push_back(cand);
    }
  lifted.push_back(theta0 - pi);
  lifted.push_back(theta0 + pi);
  lifted.push_back(theta0 - delta_w);
  lifted.push_back(theta0 + delta_w);
  std::sort(lifted.begin(), lifted.end());
  for (std::size_t i = 0; i + 1 < lifted.size(); i++) {
    const Real& a = lifted[i];
    const Real& b = lifted[i + 1];
    if (b <= theta0 - delta_w || a >= theta0 + delta_w) {
      push_range(a, b);
    }
  }
  // geometric panels, depth chosen so the unresolved central sliver
  // contributes below 1e-20 relative to the density scale
  const int depth = 30;
  Real h = delta_w;
  for (int t = 0; t < depth; t++) {
    Real hn = h / 2;
    edges.push_back(theta0 + h);
    edges.push_back(theta0 - h);
    h = hn;
  }
  edges.push_back(theta0 + h);
  edges.push_back(theta0 - h);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(), [](const Real& x, const Real& y) {
                return abs(x - y) == 0;
              }),
              edges.end());

  const GaussRule& rule = gauss_legendre(64);
  Cx remainder(0);
  for (std::size_t i = 0; i + 1 < edges.size(); i++) {
    Real half = (edges[i + 1] - edges[i]) / 2;
    if (!(half > 0)) continue;
    Real mid = (edges[i] + edges[i + 1]) / 2;
    for (unsigned q = 0; q < 64; q++) {
      Real theta = mid + half * rule.x[q];
      Cx s = unit(theta);
      Cx integrand = (g.value(theta) - taylor(s)) * s / (s - z);
      remainder += (rule.w[q] * half) * integrand;
    }
  }
  remainder /= two_pi;

  // Closed form for the Taylor part: analytic inside, so the transform is
  // T(z) inside and 0 outside.
  Cx closed(0);
  if (abs(z) < 1) closed = taylor(z);
  return remainder + closed;
}

}  // namespace

MatrixM assemble_M(const OpucFamily& fam, long n, const Cx& z, const PrecisionContext& ctx) {
  if (n < 1) throw ValidationError("assemble_M: degree must be >= 1");
  if (static_cast<std::size_t>(n) >= fam.level.size())
    throw ValidationError("assemble_M: family too short for requested degree");
  if (abs(abs(z) - 1) < Real("1e-12"))
    throw ValidationError("assemble_M: z on the unit circle; use rhp_residual for boundary values");

  const OpucLevel& top = fam.at(n);
  const OpucLevel& prev = fam.at(n - 1);
  const PotentialV& V = fam.weight.potential;
  const std::vector<Real>& kinks = V.jump_angles();

  // pi_{n-1}^* in descending storage: coefficient of z^{n-1-j} is
  // conj(c_{n-1, n-1-j}), i.e. the conjugate of the reversed vector.
  std::vector<Cx> star(prev.c.size());
  for (std::size_t j = 0; j < prev.c.size(); j++) star[j] = conj(prev.c[prev.c.size() - 1 - j]);

  CircleDensity g1(top.c, n, V, fam.s, fam.V0);
  CircleDensity g2(star, n, V, fam.s, fam.V0);

  Real ef = exp(fam.s * fam.V0);  // e^{s V0}: converts scaled gamma^2 to true
  MatrixM m;
  m.m11 = top.eval(z);
  m.m12 = cauchy_transform(g1, kinks, z, ctx) / ef;
  Cx star_z(0);
  for (const Cx& coef : star) star_z = star_z * z + coef;
  Real gsq = fam.gamma_sq_scaled(n - 1) * ef;
  m.m21 = Cx(-gsq) * star_z;
  m.m22 = Cx(-fam.gamma_sq_scaled(n - 1)) * cauchy_transform(g2, kinks, z, ctx);
  return m;
}

Real rhp_residual(const OpucFamily& fam, long n, const Real& theta0, const PrecisionContext& ctx,
                  const Real& delta) {
  if (!(delta > 0) || delta > Real("1e-4"))
    throw ValidationError("rhp_residual: delta must lie in (0, 1e-4]");
  Cx s0 = unit(theta0);

  auto extrapolate = [&](int side) {
    // side +1: approach from outside, radius 1 + k delta
    MatrixM m[3];
    for (int k = 0; k < 3; k++) {
      Real r = 1 + Real(side) * delta * Real(1 << k);
      m[k] = assemble_M(fam, n, Cx(r) * s0, ctx);
    }
    auto rich = [](const Cx& f1, const Cx& f2, const Cx& f4) {
      return (Real(8) * f1 - Real(6) * f2 + f4) / Real(3);
    };
    MatrixM out;
    out.m11 = rich(m[0].m11, m[1].m11, m[2].m11);
    out.m12 = rich(m[0].m12, m[1].m12, m[2].m12);
    out.m21 = rich(m[0].m21, m[1].m21, m[2].m21);
    out.m22 = rich(m[0].m22, m[1].m22, m[2].m22);
    return out;
  };

  MatrixM plus = extrapolate(-1);   // boundary value from inside
  MatrixM minus = extrapolate(+1);  // boundary value from outside

  Real phi = exp(-fam.s * fam.weight.potential(wrap_angle(theta0)));
  Cx jump12 = Cx(phi) * unit(-Real(n) * theta0);

  // M_+ - M_- J with J = [[1, phi e^{-i n theta}], [0, 1]]
  Cx r11 = plus.m11 - minus.m11;
  Cx r12 = plus.m12 - (minus.m11 * jump12 + minus.m12);
  Cx r21 = plus.m21 - minus.m21;
  Cx r22 = plus.m22 - (minus.m21 * jump12 + minus.m22);
  return fmax(fmax(abs(r11), abs(r12)), fmax(abs(r21), abs(r22)));
}

}  // namespace opuclab
