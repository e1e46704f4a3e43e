#include "opuclab/szego.hpp"

#include <limits>

#include "opuclab/fft.hpp"

namespace opuclab {

namespace {

Real domain_slack() { return sqrt(std::numeric_limits<Real>::epsilon()); }

}  // namespace

Cx SzegoEvaluator::N_outside(const Cx& z) const {
  Real m = abs(z);
  if (m < 1 - domain_slack())
    throw ValidationError("szego: N requested inside the unit circle, |z| = " + m.str(10));
  Cx w = Cx(1) / z;
  Cx acc(0);
  for (long j = table_.M_trunc; j >= 1; j--) acc = (acc + conj(table_.coeff[j - 1])) * w;
  return acc;
}

Cx SzegoEvaluator::N_inside(const Cx& z) const {
  Real m = abs(z);
  if (m > 1 + domain_slack())
    throw ValidationError("szego: Nbar requested outside the unit circle, |z| = " + m.str(10));
  Cx acc(0);
  for (long j = table_.M_trunc; j >= 1; j--) acc = (acc + table_.coeff[j - 1]) * z;
  return acc;
}

Cx SzegoEvaluator::N_theta(const Real& theta) const {
  Cx step = unit(-theta);
  Cx ph = step;
  Cx acc(0);
  for (long j = 1; j <= table_.M_trunc; j++) {
    Cx t = conj(table_.coeff[j - 1]) * ph;        // conj(V_j) e^{-ij theta}
    acc += Cx(t.im, -t.re) * Real(j);             // times -ij
    ph *= step;
  }
  return acc;
}

std::vector<Real> SzegoEvaluator::Omega_derivs(const Real& theta, unsigned pmax) const {
  std::vector<Real> out(pmax + 1, Real(0));
  Cx step = unit(theta);
  Cx ph = step;
  for (long j = 1; j <= table_.M_trunc; j++) {
    Cx t = table_.coeff[j - 1] * ph;
    Real jp(1);
    for (unsigned p = 0; p <= pmax; p++) {
      Real im;  // Im(i^p t)
      switch (p % 4) {
        case 0: im = t.im; break;
        case 1: im = t.re; break;
        case 2: im = -t.im; break;
        default: im = -t.re; break;
      }
      out[p] -= 2 * jp * im;
      jp *= j;
    }
    ph *= step;
  }
  return out;
}

std::vector<Cx> SzegoEvaluator::ring_sum(const std::vector<Cx>& a, std::size_t M_angles,
                                         const Real& theta0) const {
  if (!is_pow2(M_angles)) throw ValidationError("szego: ring size must be a power of two");
  std::vector<Cx> bins(M_angles, Cx(0));
  Cx step = unit(theta0);
  Cx ph = step;  // e^{i j theta0}, j = 1
  for (std::size_t j = 1; j <= a.size(); j++) {
    bins[j % M_angles] += a[j - 1] * ph;
    ph *= step;
  }
  fft_pow2(bins, true);  // bins_m <- (1/M) sum_q bins_q e^{+2 pi i q m / M}
  Real scale(static_cast<long>(M_angles));
  for (Cx& b : bins) b *= scale;
  return bins;
}

std::vector<Cx> SzegoEvaluator::N_inside_ring(const Real& r, std::size_t M_angles,
                                              const Real& theta0) const {
  if (r > 1 + domain_slack())
    throw ValidationError("szego: Nbar ring outside the unit circle, r = " + r.str(10));
  std::vector<Cx> a(table_.M_trunc);
  Real rp(1);
  for (long j = 1; j <= table_.M_trunc; j++) {
    rp *= r;
    a[j - 1] = table_.coeff[j - 1] * rp;
  }
  return ring_sum(a, M_angles, theta0);
}

std::vector<Cx> SzegoEvaluator::N_outside_ring(const Real& r, std::size_t M_angles,
                                               const Real& theta0) const {
  if (r < 1 - domain_slack())
    throw ValidationError("szego: N ring inside the unit circle, r = " + r.str(10));
  // N(r e^{i theta}) = conj(sum_j V_j r^{-j} e^{ij theta}) for real r.
  std::vector<Cx> a(table_.M_trunc);
  Real ri(1);
  for (long j = 1; j <= table_.M_trunc; j++) {
    ri /= r;
    a[j - 1] = table_.coeff[j - 1] * ri;
  }
  std::vector<Cx> s = ring_sum(a, M_angles, theta0);
  for (Cx& v : s) v = conj(v);
  return s;
}

std::vector<Cx> SzegoEvaluator::N_theta_ring(std::size_t M_angles, const Real& theta0) const {
  // conj(sum_j (ij) V_j e^{ij theta}).
  std::vector<Cx> a(table_.M_trunc);
  for (long j = 1; j <= table_.M_trunc; j++) {
    const Cx& v = table_.coeff[j - 1];
    a[j - 1] = Cx(-v.im, v.re) * Real(j);
  }
  std::vector<Cx> s = ring_sum(a, M_angles, theta0);
  for (Cx& v : s) v = conj(v);
  return s;
}

std::vector<Real> SzegoEvaluator::Omega_deriv_ring(unsigned p, std::size_t M_angles,
                                                   const Real& theta0) const {
  std::vector<Cx> a(table_.M_trunc);
  for (long j = 1; j <= table_.M_trunc; j++) {
    Cx t = table_.coeff[j - 1];
    Real jp = pow(Real(j), static_cast<int>(p));
    switch (p % 4) {  // (ij)^p = j^p i^p
      case 0: break;
      case 1: t = Cx(-t.im, t.re); break;
      case 2: t = -t; break;
      default: t = Cx(t.im, -t.re); break;
    }
    a[j - 1] = t * jp;
  }
  std::vector<Cx> s = ring_sum(a, M_angles, theta0);
  std::vector<Real> out(M_angles);
  for (std::size_t m = 0; m < M_angles; m++) out[m] = -2 * s[m].im;
  return out;
}

KappaPrimeMin kappa_prime_min(const SzegoEvaluator& se, const std::vector<Real>& kink_angles) {
  const std::size_t M = 4096;
  const Real pi = pi_val();
  Real theta0 = -pi + pi / M;  // centered lattice
  std::vector<Real> op = se.Omega_deriv_ring(1, M, theta0);
  KappaPrimeMin best{std::numeric_limits<Real>::infinity(), Real(0)};
  for (std::size_t m = 0; m < M; m++) {
    Real v = 1 + op[m];
    if (v < best.value) {
      best.value = v;
      best.argmin = theta0 + 2 * pi * Real(static_cast<long>(m)) / M;
    }
  }
  const Real probe("1e-6");
  for (const Real& a : kink_angles) {
    for (int s : {-1, +1}) {
      Real theta = a + s * probe;
      Real v = se.kappa_prime(theta);
      if (v < best.value) {
        best.value = v;
        best.argmin = theta;
      }
    }
  }
  return best;
}

ExtensionSample extend_em(const std::vector<Cx>& derivs, unsigned m, const Real& r,
                          const Real& theta) {
  if (m < 1) throw ValidationError("extension: order must be >= 1");
  if (derivs.size() < m + 1)
    throw ValidationError("extension: need derivatives through order m");
  if (!(r > 0)) throw ValidationError("extension: radius must be positive");

  Cx L(Real(0), -log(r));  // -i log r
  ExtensionSample out;

  Cx lp(1);  // L^p / p!
  Cx inner_sum(0);  // sum_{p<=m-2} f^{(p+1)} L^p / p!
  for (unsigned p = 0; p < m; p++) {
    out.value += derivs[p] * lp;
    if (p + 2 <= m) inner_sum += derivs[p + 1] * lp;
    lp *= L;
    lp /= Real(static_cast<long>(p + 1));
  }
  Cx top(1);
  Real f2(1);
  for (unsigned q = 1; q < m; q++) {
    top *= L;
    f2 *= static_cast<long>(q);
  }
  Cx lead = derivs[m] * top / f2;  // f^{(m)} L^{m-1}/(m-1)!

  Cx eit = unit(theta);
  Cx front(Real(0), Real(1) / (2 * r));  // i/(2r)
  out.dbar = front * eit * lead;
  out.dz = -(front * conj(eit)) * (lead + Real(2) * inner_sum);
  return out;
}

}  // namespace opuclab
