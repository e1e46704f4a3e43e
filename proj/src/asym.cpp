#include "opuclab/asym.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "opuclab/bump.hpp"
#include "opuclab/fft.hpp"

namespace opuclab {

namespace {

std::string real_str(const Real& x) {
  return x.str(Real::default_precision(), std::ios_base::scientific);
}

std::string dbl_str(const Real& x) {
  std::ostringstream o;
  o << std::setprecision(17) << static_cast<double>(x);
  return o.str();
}

// Descending-power Horner, matching the OpucLevel storage order.
Cx horner(const std::vector<Cx>& c, const Cx& z) {
  Cx acc(0);
  for (const Cx& cj : c) acc = acc * z + cj;
  return acc;
}

// Coefficients of the z-derivative of a degree-n polynomial stored
// descending: d[j] = (n - j) c[j], j = 0..n-1.
std::vector<Cx> deriv_coeffs(const std::vector<Cx>& c, long n) {
  std::vector<Cx> d;
  if (n <= 0) return d;
  d.reserve(static_cast<std::size_t>(n));
  for (long j = 0; j < n; j++) d.push_back(c[static_cast<std::size_t>(j)] * Real(n - j));
  return d;
}

// Unit-circle points computed by cos/sin land within an ulp of modulus one;
// the circle kinds accept that much slack on their closed boundary.
Real circle_slack() { return sqrt(sqrt(std::numeric_limits<Real>::epsilon())); }

Cx extension_value_V(const PotentialV& V, unsigned k, const Real& r, const Real& theta) {
  Jet jv = V.jet(theta, k);
  std::vector<Cx> derivs(k + 1);
  for (unsigned p = 0; p <= k; p++) derivs[p] = Cx(jv.deriv(p));
  return extend_em(derivs, k, r, theta).value;
}

Cx extension_value_Omega(const SzegoEvaluator& sz, unsigned k, const Real& r,
                         const Real& theta) {
  std::vector<Real> om = sz.Omega_derivs(theta, k);
  std::vector<Cx> derivs(k + 1);
  for (unsigned p = 0; p <= k; p++) derivs[p] = Cx(om[p]);
  return extend_em(derivs, k, r, theta).value;
}

// Fornberg weights: w[i] such that f^{(p)}(x0) ~ sum_i w[i] f(x[i]).
std::vector<Real> fd_weights(const Real& x0, const std::vector<Real>& x, unsigned p) {
  const std::size_t q = x.size();
  std::vector<std::vector<Real>> C(q, std::vector<Real>(p + 1, Real(0)));
  C[0][0] = 1;
  Real c1(1);
  Real c4 = x[0] - x0;
  for (std::size_t i = 1; i < q; i++) {
    unsigned mn = static_cast<unsigned>(std::min<std::size_t>(i, p));
    Real c2(1);
    Real c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; j++) {
      Real c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (unsigned s = mn; s >= 1; s--)
          C[i][s] = c1 * (Real(static_cast<int>(s)) * C[i - 1][s - 1] - c5 * C[i - 1][s]) / c2;
        C[i][0] = -c1 * c5 * C[i - 1][0] / c2;
      }
      for (unsigned s = mn; s >= 1; s--)
        C[j][s] = (c4 * C[j][s] - Real(static_cast<int>(s)) * C[j][s - 1]) / c3;
      C[j][0] = c4 * C[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<Real> w(q);
  for (std::size_t i = 0; i < q; i++) w[i] = C[i][p];
  return w;
}

}  // namespace

const char* to_string(ApproxKind kind) {
  switch (kind) {
    case ApproxKind::OutsideFixed: return "outside_fixed";
    case ApproxKind::CircleFixed: return "circle_fixed";
    case ApproxKind::InsideFixed: return "inside_fixed";
    case ApproxKind::InsideDeep: return "inside_deep";
    case ApproxKind::JumpModel: return "jump_model";
    case ApproxKind::OutsideVarying: return "outside_varying";
    case ApproxKind::CircleVarying: return "circle_varying";
    case ApproxKind::InsideVarying: return "inside_varying";
  }
  return "unknown";
}

bool is_varying(ApproxKind kind) {
  return kind == ApproxKind::OutsideVarying || kind == ApproxKind::CircleVarying ||
         kind == ApproxKind::InsideVarying;
}

Cx RationalFn::prefactor() const {
  Cx ip;
  switch ((k + 1) % 4) {
    case 0: ip = Cx(1); break;
    case 1: ip = Cx(0, 1); break;
    case 2: ip = Cx(-1); break;
    default: ip = Cx(0, -1); break;
  }
  return ip / (2 * pi_val());
}

Cx RationalFn::residue_num(std::size_t j) const {
  return prefactor() * weights[j] * unit(Real(n + 1) * pole_angles[j]);
}

Cx RationalFn::eval(const Cx& z) const {
  Cx acc(0);
  for (std::size_t j = 0; j < pole_angles.size(); j++)
    acc += residue_num(j) / (unit(pole_angles[j]) - z);
  return acc;
}

std::vector<Cx> RationalFn::numerator() const {
  const std::size_t l = ell();
  std::vector<Cx> asc(l, Cx(0));  // coefficient of z^t
  for (std::size_t j = 0; j < l; j++) {
    std::vector<Cx> prod{Cx(1)};
    for (std::size_t i = 0; i < l; i++) {
      if (i == j) continue;
      Cx pi_root = unit(pole_angles[i]);
      std::vector<Cx> next(prod.size() + 1, Cx(0));
      for (std::size_t t = 0; t < prod.size(); t++) {
        next[t] += pi_root * prod[t];
        next[t + 1] -= prod[t];
      }
      prod = std::move(next);
    }
    Cx b = residue_num(j);
    for (std::size_t t = 0; t < prod.size(); t++) asc[t] += b * prod[t];
  }
  std::reverse(asc.begin(), asc.end());
  return asc;
}

RationalFn make_fn(const PotentialV& V, const SzegoEvaluator& sz, long n) {
  std::vector<Real> angles = V.jump_angles();
  if (angles.empty())
    throw ValidationError("f_n needs a weight whose potential has derivative jumps");
  if (n < 0) throw ValidationError("f_n: degree must be nonnegative");
  RationalFn fn;
  fn.n = n;
  fn.k = V.smoothness_k();
  fn.pole_angles = angles;
  fn.weights.reserve(angles.size());
  for (const Real& a : angles)
    fn.weights.push_back(Cx(V.derivative_jump(a, fn.k)) * unit(sz.Omega(a)));
  return fn;
}

Real fd_derivative_jump(const PotentialV& V, const Real& a, unsigned p) {
  const std::size_t q = p + 6;
  const Real h = pow(Real(2), -10);
  std::vector<Real> kinks = V.jump_angles();
  if (kinks.size() >= 2) {
    std::sort(kinks.begin(), kinks.end());
    Real gap = kinks.front() + 2 * pi_val() - kinks.back();
    for (std::size_t i = 1; i < kinks.size(); i++) gap = (std::min)(gap, kinks[i] - kinks[i - 1]);
    if (!(Real(static_cast<long>(q)) * h < gap / 2))
      throw ValidationError("fd stencil would span a neighboring kink");
  }
  Real est[2];
  for (int side = 0; side < 2; side++) {
    Real dir = side == 0 ? Real(-1) : Real(1);
    std::vector<Real> nodes(q);
    for (std::size_t i = 0; i < q; i++) nodes[i] = a + dir * h * Real(static_cast<long>(i) + 1);
    std::vector<Real> w = fd_weights(a, nodes, p);
    Real acc(0);
    for (std::size_t i = 0; i < q; i++) acc += w[i] * V(nodes[i]);
    est[side] = acc;
  }
  return est[1] - est[0];
}

bool Approximant::in_region(const Cx& z) const {
  Real m = abs(z);
  switch (kind) {
    case ApproxKind::OutsideFixed:
    case ApproxKind::OutsideVarying:
      return m > 1;
    case ApproxKind::CircleFixed:
    case ApproxKind::CircleVarying:
      return m >= 1 - circle_slack();
    case ApproxKind::InsideFixed:
    case ApproxKind::InsideVarying:
      return m > 0 && m < 1;
    case ApproxKind::InsideDeep:
      return m < 1;
    case ApproxKind::JumpModel: {
      if (m >= 1) return false;
      if (m == 0) return true;
      return log(m) < -(Real(static_cast<int>(k)) - sigma) * log(Real(n)) / Real(n);
    }
  }
  return false;
}

Cx Approximant::eval(const Cx& z) const {
  if (!in_region(z))
    throw ValidationError(std::string(to_string(kind)) + " evaluated off its region, |z| = " +
                          abs(z).str(10));
  const Real r = abs(z);
  switch (kind) {
    case ApproxKind::OutsideFixed:
    case ApproxKind::CircleFixed:
      return pow_i(z, n) * exp(sz.N_outside(z));
    case ApproxKind::OutsideVarying:
    case ApproxKind::CircleVarying:
      return pow_i(z, n) * exp(Real(n) * sz.N_outside(z));
    case ApproxKind::InsideDeep:
      return Cx(0);
    case ApproxKind::InsideFixed: {
      Real theta = arg(z);
      return pow_i(z, n) * sz.S_inside(z) * exp(extension_value_V(V, k, r, theta));
    }
    case ApproxKind::JumpModel: {
      Cx nb = sz.N_inside(z);
      Real nk1 = pow(Real(n), static_cast<int>(k) + 1);
      Cx power(0);
      if (r > 0) {
        Real bv = bump(log(r) / epsilon);
        if (bv != 0) {
          Real theta = arg(z);
          power = pow_i(z, n) * exp(Cx(-sz.table().V0) - nb) *
                  exp(extension_value_V(V, k, r, theta)) * bv;
        }
      }
      return power + exp(nb) * fn.eval(z) / nk1;
    }
    case ApproxKind::InsideVarying: {
      Real theta = arg(z);
      Cx ext = extension_value_Omega(sz, k, r, theta);
      return pow_i(z, n) * exp(Real(n) * sz.N_inside(z)) * exp(Cx(0, 1) * Real(n) * ext);
    }
  }
  return Cx(0);
}

Approximant make_approximant(ApproxKind kind, const SzegoEvaluator& sz, const PotentialV& V,
                             long n, const Real& sigma, const Real& epsilon,
                             const PrecisionContext& ctx) {
  (void)ctx;
  if (n < 1) throw ValidationError("approximant needs degree n >= 1");
  Approximant a{kind,  n, static_cast<unsigned>(V.smoothness_k()),
                sigma, epsilon, sz, V, RationalFn{}};
  switch (kind) {
    case ApproxKind::InsideFixed:
      if (a.k < 1)
        throw ValidationError("inside formula needs smoothness order k >= 1");
      break;
    case ApproxKind::JumpModel:
      if (V.jump_angles().empty())
        throw ValidationError("jump model needs a weight with derivative jumps");
      if (a.k < 2) throw ValidationError("jump model needs smoothness order k >= 2");
      if (!(epsilon > 0)) throw ValidationError("jump model needs a positive bump scale");
      if (!(sigma > 0)) throw ValidationError("jump model needs a positive region margin");
      a.fn = make_fn(V, sz, n);
      break;
    case ApproxKind::OutsideVarying:
    case ApproxKind::CircleVarying:
    case ApproxKind::InsideVarying: {
      if (a.k < 2)
        throw ValidationError("varying-weight formulas need smoothness order k >= 2");
      KappaPrimeMin kp = kappa_prime_min(sz, V.jump_angles());
      if (!(kp.value > 0))
        throw ValidationError("varying-weight asymptotics need min kappa' > 0, got " +
                              real_str(kp.value) + " at theta = " + real_str(kp.argmin));
      break;
    }
    default:
      break;
  }
  return a;
}

Approximant make_approximant(ApproxKind kind, const SzegoEvaluator& sz, const PotentialV& V,
                             long n, const PrecisionContext& ctx) {
  Real half = Real(1) / 2;
  return make_approximant(kind, sz, V, n, half, half, ctx);
}

Real normalized_error_at(const Approximant& a, const OpucLevel& pi, const Cx& z) {
  if (pi.n != a.n)
    throw ValidationError("normalized error: polynomial degree does not match approximant");
  if (!a.in_region(z))
    throw ValidationError(std::string(to_string(a.kind)) + " error requested off its region");
  Cx pv = pi.eval(z);
  const Real r = abs(z);
  switch (a.kind) {
    case ApproxKind::OutsideFixed:
    case ApproxKind::CircleFixed:
      return abs(pv * pow_i(z, -a.n) * exp(-a.sz.N_outside(z)) - 1);
    case ApproxKind::OutsideVarying:
    case ApproxKind::CircleVarying:
      return abs(pv * pow_i(z, -a.n) * exp(-Real(a.n) * a.sz.N_outside(z)) - 1);
    case ApproxKind::InsideDeep:
      return abs(pv);
    case ApproxKind::InsideFixed:
      return abs(pv - a.eval(z));
    case ApproxKind::JumpModel: {
      Cx nb = a.sz.N_inside(z);
      Real nk1 = pow(Real(a.n), static_cast<int>(a.k) + 1);
      Cx power(0);
      if (r > 0) {
        Real bv = bump(log(r) / a.epsilon);
        if (bv != 0)
          power = nk1 * pow_i(z, a.n) * exp(Cx(-a.sz.table().V0) - Real(2) * nb) *
                  exp(extension_value_V(a.V, a.k, r, arg(z))) * bv;
      }
      return abs(nk1 * exp(-nb) * pv - power - a.fn.eval(z));
    }
    case ApproxKind::InsideVarying: {
      Cx ext = extension_value_Omega(a.sz, a.k, r, arg(z));
      return abs(pv * exp(-Real(a.n) * a.sz.N_inside(z)) -
                 pow_i(z, a.n) * exp(Cx(0, 1) * Real(a.n) * ext));
    }
  }
  return Real(0);
}

RegionSpec RegionSpec::circle() {
  RegionSpec r;
  r.shape = Shape::Circle;
  r.r_lo = 1;
  r.r_hi = 1;
  return r;
}

RegionSpec RegionSpec::annulus(const Real& r_lo, const Real& r_hi) {
  if (!(r_lo >= 0) || !(r_hi > r_lo))
    throw ValidationError("annulus region needs 0 <= r_lo < r_hi");
  RegionSpec r;
  r.shape = Shape::Annulus;
  r.r_lo = r_lo;
  r.r_hi = r_hi;
  return r;
}

std::string RegionSpec::describe() const {
  if (shape == Shape::Circle)
    return "circle:" + std::to_string(circle_per_n) + "n half-offset";
  std::ostringstream o;
  o << "annulus[" << static_cast<double>(r_lo) << "," << static_cast<double>(r_hi) << "]:"
    << radial << "x" << angular << " half-offset";
  return o.str();
}

namespace {

ErrorEntry sup_error_circle(const Approximant& a, const OpucLevel& lv, const RegionSpec& region,
                            long p) {
  if (a.kind != ApproxKind::CircleFixed && a.kind != ApproxKind::CircleVarying)
    throw ValidationError("circle sampling applies to the circle kinds only");
  const long A = region.circle_per_n * a.n;
  if (A < 1) throw ValidationError("circle sample count must be positive");
  const Real pi = pi_val();
  const Real theta0 = -pi + pi / Real(A);
  const Real s = is_varying(a.kind) ? Real(a.n) : Real(1);
  const std::vector<Cx>& c = lv.c;
  std::vector<Cx> dcoef;
  if (p == 1) dcoef = deriv_coeffs(c, a.n);

  std::vector<Cx> Nv, Nth;
  if (is_pow2(static_cast<std::size_t>(A))) {
    Nv = a.sz.N_outside_ring(Real(1), static_cast<std::size_t>(A), theta0);
    if (p == 1) Nth = a.sz.N_theta_ring(static_cast<std::size_t>(A), theta0);
  } else {
    // Slow path: one table sweep per sample. Fine for smooth weights; for
    // kink weights with long tables prefer power-of-two n.
    Nv.resize(static_cast<std::size_t>(A));
    if (p == 1) Nth.resize(static_cast<std::size_t>(A));
    for (long t = 0; t < A; t++) {
      Real theta = theta0 + 2 * pi * Real(t) / Real(A);
      Nv[static_cast<std::size_t>(t)] = a.sz.N_outside(unit(theta));
      if (p == 1) Nth[static_cast<std::size_t>(t)] = a.sz.N_theta(theta);
    }
  }

  Real best(0);
  for (long t = 0; t < A; t++) {
    Real theta = theta0 + 2 * pi * Real(t) / Real(A);
    Cx z = unit(theta);
    Cx pv = horner(c, z);
    Cx F = pow_i(z, -a.n) * exp(-s * Nv[static_cast<std::size_t>(t)]);
    Real e;
    if (p == 0) {
      e = abs(F * pv - 1);
    } else {
      Cx dv = horner(dcoef, z);
      Cx term = Cx(0, 1) * z * dv - Cx(Real(0), Real(a.n)) * pv -
                s * Nth[static_cast<std::size_t>(t)] * pv;
      e = abs(F * term);
    }
    if (e > best) best = e;
  }
  return ErrorEntry{a.n, best, A};
}

ErrorEntry sup_error_annulus(const Approximant& a, const OpucLevel& lv,
                             const RegionSpec& region) {
  const long R = region.radial;
  const long A = region.angular;
  if (R < 1) throw ValidationError("annulus needs at least one radial sample");
  if (A < 4 || !is_pow2(static_cast<std::size_t>(A)))
    throw ValidationError("annulus angular count must be a power of two >= 4");

  const bool inside = a.kind == ApproxKind::InsideFixed || a.kind == ApproxKind::InsideDeep ||
                      a.kind == ApproxKind::JumpModel || a.kind == ApproxKind::InsideVarying;
  const Real dr = (region.r_hi - region.r_lo) / Real(R);
  const Real r_min = region.r_lo + dr / 2;
  const Real r_max = region.r_lo + dr * (Real(R) - Real(1) / 2);
  if (!a.in_region(Cx(r_min)) || !a.in_region(Cx(r_max)))
    throw ValidationError(std::string("sample radii leave the region of ") + to_string(a.kind));

  const Real pi = pi_val();
  const Real theta0 = -pi + pi / Real(A);
  const Real s = is_varying(a.kind) ? Real(a.n) : Real(1);
  const std::vector<Cx>& c = lv.c;
  const Real V0 = a.sz.table().V0;
  const Real nk1 = pow(Real(a.n), static_cast<int>(a.k) + 1);

  // Angle-only data, shared across rings.
  std::vector<std::vector<Cx>> vderivs;  // one-sided V jets per angle
  std::vector<std::vector<Real>> omr;    // Omega derivative rings, p = 0..k
  std::vector<Real> thetas(static_cast<std::size_t>(A));
  for (long t = 0; t < A; t++) thetas[static_cast<std::size_t>(t)] = theta0 + 2 * pi * Real(t) / Real(A);
  if (a.kind == ApproxKind::InsideFixed || a.kind == ApproxKind::JumpModel) {
    vderivs.resize(static_cast<std::size_t>(A));
    for (long t = 0; t < A; t++) {
      Jet jv = a.V.jet(thetas[static_cast<std::size_t>(t)], a.k);
      std::vector<Cx> d(a.k + 1);
      for (unsigned q = 0; q <= a.k; q++) d[q] = Cx(jv.deriv(q));
      vderivs[static_cast<std::size_t>(t)] = std::move(d);
    }
  } else if (a.kind == ApproxKind::InsideVarying) {
    omr.resize(a.k + 1);
    for (unsigned q = 0; q <= a.k; q++)
      omr[q] = a.sz.Omega_deriv_ring(q, static_cast<std::size_t>(A), theta0);
  }

  Real best(0);
  for (long i = 0; i < R; i++) {
    Real ri = region.r_lo + dr * (Real(i) + Real(1) / 2);
    std::vector<Cx> ring;
    if (a.kind != ApproxKind::InsideDeep)
      ring = inside ? a.sz.N_inside_ring(ri, static_cast<std::size_t>(A), theta0)
                    : a.sz.N_outside_ring(ri, static_cast<std::size_t>(A), theta0);
    Real bv(0);
    if (a.kind == ApproxKind::JumpModel) bv = bump(log(ri) / a.epsilon);

    for (long t = 0; t < A; t++) {
      const Real& theta = thetas[static_cast<std::size_t>(t)];
      Cx z = polar(ri, theta);
      Cx pv = horner(c, z);
      Real e(0);
      switch (a.kind) {
        case ApproxKind::OutsideFixed:
        case ApproxKind::CircleFixed:
        case ApproxKind::OutsideVarying:
        case ApproxKind::CircleVarying:
          e = abs(pv * pow_i(z, -a.n) * exp(-s * ring[static_cast<std::size_t>(t)]) - 1);
          break;
        case ApproxKind::InsideDeep:
          e = abs(pv);
          break;
        case ApproxKind::InsideFixed: {
          Cx ext = extend_em(vderivs[static_cast<std::size_t>(t)], a.k, ri, theta).value;
          Cx model = pow_i(z, a.n) * exp(Cx(-V0) - ring[static_cast<std::size_t>(t)]) * exp(ext);
          e = abs(pv - model);
          break;
        }
        case ApproxKind::JumpModel: {
          const Cx& nb = ring[static_cast<std::size_t>(t)];
          Cx power(0);
          if (bv != 0) {
            Cx ext = extend_em(vderivs[static_cast<std::size_t>(t)], a.k, ri, theta).value;
            power = nk1 * pow_i(z, a.n) * exp(Cx(-V0) - Real(2) * nb) * exp(ext) * bv;
          }
          e = abs(nk1 * exp(-nb) * pv - power - a.fn.eval(z));
          break;
        }
        case ApproxKind::InsideVarying: {
          std::vector<Cx> d(a.k + 1);
          for (unsigned q = 0; q <= a.k; q++) d[q] = Cx(omr[q][static_cast<std::size_t>(t)]);
          Cx ext = extend_em(d, a.k, ri, theta).value;
          e = abs(pv * exp(-Real(a.n) * ring[static_cast<std::size_t>(t)]) -
                  pow_i(z, a.n) * exp(Cx(0, 1) * Real(a.n) * ext));
          break;
        }
      }
      if (e > best) best = e;
    }
  }
  return ErrorEntry{a.n, best, R * A};
}

}  // namespace

ErrorEntry sup_error(const Approximant& a, const OpucFamily& fam, const RegionSpec& region,
                     const PrecisionContext& ctx, long p) {
  (void)ctx;
  if (a.n < 0 || static_cast<std::size_t>(a.n) >= fam.level.size())
    throw ValidationError("family lacks degree n = " + std::to_string(a.n));
  const bool vary = is_varying(a.kind);
  if (vary) {
    if (fam.weight.mode != WeightMode::Varying || fam.weight.n_weight != a.n)
      throw ValidationError("varying kinds need a family built with weight scale s = n");
  } else if (fam.weight.mode != WeightMode::Fixed) {
    throw ValidationError("fixed kinds need a fixed-weight family");
  }
  if (p != 0 && p != 1) throw ValidationError("sup_error supports p = 0 and p = 1 only");
  if (p == 1 && region.shape != RegionSpec::Shape::Circle)
    throw ValidationError("the p = 1 error form is stated on the circle");
  const OpucLevel& lv = fam.at(a.n);
  if (region.shape == RegionSpec::Shape::Circle) return sup_error_circle(a, lv, region, p);
  return sup_error_annulus(a, lv, region);
}

ErrorReport error_series(ApproxKind kind, const PotentialV& V, const std::vector<long>& n_list,
                         const RegionSpec& region, const PrecisionContext& ctx, long p) {
  if (n_list.empty()) throw ValidationError("error series needs at least one degree");
  FourierTable ft = build_fourier(V, ctx);
  SzegoEvaluator sz(ft);
  ErrorReport rep;
  rep.label = std::string(to_string(kind)) + "|" + region.describe();
  rep.p = p;
  if (!is_varying(kind)) {
    long nmax = *std::max_element(n_list.begin(), n_list.end());
    WeightSpec w{V, WeightMode::Fixed, 0};
    MomentTable mom = build_moments(w, nmax + 1, ctx);
    OpucFamily fam = levinson(mom, nmax, w, ctx);
    for (long n : n_list) {
      Approximant ap = make_approximant(kind, sz, V, n, ctx);
      rep.entries.push_back(sup_error(ap, fam, region, ctx, p));
    }
  } else {
    for (long n : n_list) {
      WeightSpec w{V, WeightMode::Varying, n};
      MomentTable mom = build_moments(w, n + 1, ctx);
      OpucFamily fam = levinson(mom, n, w, ctx);
      Approximant ap = make_approximant(kind, sz, V, n, ctx);
      rep.entries.push_back(sup_error(ap, fam, region, ctx, p));
    }
  }
  return rep;
}

ErrorReport gamma_error_series(const PotentialV& V, WeightMode mode,
                               const std::vector<long>& n_list, const PrecisionContext& ctx) {
  if (n_list.empty()) throw ValidationError("gamma error series needs at least one degree");
  ErrorReport rep;
  rep.p = 0;
  if (mode == WeightMode::Fixed) {
    rep.label = "gamma|fixed";
    long nmax = *std::max_element(n_list.begin(), n_list.end());
    WeightSpec w{V, WeightMode::Fixed, 0};
    MomentTable mom = build_moments(w, nmax + 1, ctx);
    OpucFamily fam = levinson(mom, nmax, w, ctx);
    for (long n : n_list)
      rep.entries.push_back(ErrorEntry{n, abs(fam.gamma_sq_scaled(n) - 1), 1});
  } else {
    rep.label = "gamma|varying";
    for (long n : n_list) {
      if (n < 1) throw ValidationError("varying gamma series needs n >= 1");
      WeightSpec w{V, WeightMode::Varying, n};
      MomentTable mom = build_moments(w, n + 1, ctx);
      OpucFamily fam = levinson(mom, n, w, ctx);
      rep.entries.push_back(ErrorEntry{n, abs(fam.gamma_sq_scaled(n - 1) - 1), 1});
    }
  }
  return rep;
}

RateFit fit_rate(const ErrorReport& report, bool with_loglog) {
  std::vector<Real> xs, ys;
  long filtered = 0;
  for (const ErrorEntry& e : report.entries) {
    if (!(e.sup_err > 0) || e.n < 2) {
      filtered++;
      continue;
    }
    xs.push_back(log(Real(e.n)));
    Real y = log(e.sup_err);
    if (with_loglog) y -= log(log(Real(e.n)));
    ys.push_back(y);
  }
  const long m = static_cast<long>(xs.size());
  if (m < 4)
    throw ValidationError("rate fit needs at least 4 usable points, got " + std::to_string(m));
  Real xm(0), ym(0);
  for (long i = 0; i < m; i++) {
    xm += xs[static_cast<std::size_t>(i)];
    ym += ys[static_cast<std::size_t>(i)];
  }
  xm /= m;
  ym /= m;
  Real sxx(0), sxy(0);
  for (long i = 0; i < m; i++) {
    Real dx = xs[static_cast<std::size_t>(i)] - xm;
    sxx += dx * dx;
    sxy += dx * (ys[static_cast<std::size_t>(i)] - ym);
  }
  RateFit f;
  f.exponent = sxy / sxx;
  f.log_prefactor = ym - f.exponent * xm;
  f.with_loglog = with_loglog;
  Real ss(0);
  for (long i = 0; i < m; i++) {
    Real res = ys[static_cast<std::size_t>(i)] - f.log_prefactor -
               f.exponent * xs[static_cast<std::size_t>(i)];
    ss += res * res;
  }
  f.residual_rms = sqrt(ss / Real(m));
  f.used = m;
  f.filtered = filtered;
  return f;
}

Real attract_radius(unsigned k, long n) {
  if (n < 2) throw ValidationError("attract radius needs n >= 2");
  return 1 - Real(static_cast<int>(k) + 1) * log(Real(n)) / Real(n);
}

Real forbidden_radius(unsigned k, long n) {
  if (n < 2) throw ValidationError("forbidden radius needs n >= 2");
  return 1 - Real(static_cast<int>(k)) * log(Real(n)) / Real(n);
}

void write_error_csv(const ErrorReport& report, std::ostream& os) {
  os << "n,sup_error\n";
  for (const ErrorEntry& e : report.entries) os << e.n << "," << real_str(e.sup_err) << "\n";
}

void write_rate_json(const RateFit& fit, std::ostream& os) {
  os << "{\n"
     << "  \"exponent\": " << dbl_str(fit.exponent) << ",\n"
     << "  \"prefactor\": " << dbl_str(exp(fit.log_prefactor)) << ",\n"
     << "  \"residual\": " << dbl_str(fit.residual_rms) << ",\n"
     << "  \"with_loglog\": " << (fit.with_loglog ? "true" : "false") << ",\n"
     << "  \"points_used\": " << fit.used << ",\n"
     << "  \"points_filtered\": " << fit.filtered << "\n"
     << "}\n";
}

}  // namespace opuclab
