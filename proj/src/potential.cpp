#include "opuclab/potential.hpp"

#include <algorithm>
#include <sstream>

namespace opuclab {

namespace {

std::string real_str(const Real& x) { return x.str(0, std::ios_base::scientific); }

// Jump-family segment: which anchor angle applies at theta, and the constant
// sign of sin(ell (theta - anchor)/2) on that open segment.
struct JumpSegment {
  long anchor;  // 1-based index into the angle list
  int sigma;
};

Real jump_angle(long ell, long j) {
  return (2 * pi_val() / ell) * (Real(j) - Real(1) / 2 - Real(ell) / 2);
}

// side = 0: right-continuous choice at kinks; otherwise forces the branch
// touching theta from that side.
JumpSegment jump_segment_of(long ell, const std::vector<Real>& angles, const Real& theta,
                            int side) {
  if (side < 0) {
    // Left limit: the segment whose right endpoint is theta.
    for (long j = 1; j <= ell; j++)
      if (theta == angles[j - 1]) return {j, -1};
    // Not a kink: same as the right-continuous case.
  }
  if (theta < angles[0]) return {1, -1};           // lower wrap branch
  for (long j = 2; j <= ell; j++)
    if (theta < angles[j - 1] || (side < 0 && theta == angles[j - 1])) return {j, -1};
  // Upper wrap branch, anchored at theta_1: sin(ell(theta-theta_1)/2) has
  // sign (-1)^{ell-1} there.
  return {1, (ell % 2 == 1) ? 1 : -1};
}

}  // namespace

PotentialV PotentialV::zero() {
  PotentialV v;
  v.form_ = std::monostate{};
  v.smoothness_k_ = 6;
  return v;
}

PotentialV PotentialV::cosine(Real A, long k0, int smoothness_k) {
  if (k0 < 1) throw ValidationError("cosine potential: k0 must be >= 1");
  PotentialV v;
  v.form_ = CosineForm{std::move(A), k0};
  v.smoothness_k_ = smoothness_k;
  return v;
}

PotentialV PotentialV::jump_family(long ell, long k, std::vector<Real> w) {
  if (ell < 1) throw ValidationError("jump family: ell must be >= 1");
  if (k < 1) throw ValidationError("jump family: k must be >= 1");
  if (static_cast<long>(w.size()) != ell)
    throw ValidationError("jump family: need exactly ell weights");
  PotentialV v;
  v.form_ = JumpFamilyForm{ell, k, std::move(w)};
  v.smoothness_k_ = static_cast<int>(k);
  for (long j = 1; j <= ell; j++) v.jump_angles_.push_back(jump_angle(ell, j));
  return v;
}

PotentialV PotentialV::piecewise_cubic(Real M, Real eps) {
  if (eps <= 0 || eps >= pi_val()) throw ValidationError("piecewise cubic: need 0 < eps < pi");
  PotentialV v;
  v.form_ = PiecewiseCubicForm{std::move(M), std::move(eps)};
  v.smoothness_k_ = 3;
  Real e = std::get<PiecewiseCubicForm>(v.form_).eps;
  v.jump_angles_ = {-e, Real(0), e};
  return v;
}

PotentialV PotentialV::fourier_list(Real V0, std::vector<Cx> coeff, int smoothness_k) {
  PotentialV v;
  v.form_ = FourierListForm{std::move(V0), std::move(coeff)};
  v.smoothness_k_ = smoothness_k;
  return v;
}

Real PotentialV::phi(const Real& theta) const {
  if (const auto* jf = std::get_if<JumpFamilyForm>(&form_)) {
    JumpSegment seg = jump_segment_of(jf->ell, jump_angles_, theta, 0);
    Real u = Real(jf->ell) * (theta - jump_angles_[seg.anchor - 1]) / 2;
    Real s = abs(sin(u));
    Real p(1);
    for (long i = 0; i < jf->k; i++) p *= s;
    return 1 + exp(jf->w[seg.anchor - 1]) * p;
  }
  return exp(-(*this)(theta));
}

Jet PotentialV::jet_sided(const Real& theta, unsigned order, int side) const {
  if (std::holds_alternative<std::monostate>(form_)) return Jet(order);

  if (const auto* c = std::get_if<CosineForm>(&form_)) {
    Jet t = Jet::variable(theta, order);
    return c->A * jcos(Real(c->k0) * t);
  }

  if (const auto* fl = std::get_if<FourierListForm>(&form_)) {
    Jet t = Jet::variable(theta, order);
    Jet acc(order, fl->V0);
    for (std::size_t j = 1; j <= fl->coeff.size(); j++) {
      const Cx& vj = fl->coeff[j - 1];
      Jet jt = Real(static_cast<long>(j)) * t;
      acc += 2 * vj.re * jcos(jt) - 2 * vj.im * jsin(jt);
    }
    return acc;
  }

  if (const auto* jf = std::get_if<JumpFamilyForm>(&form_)) {
    JumpSegment seg = jump_segment_of(jf->ell, jump_angles_, theta, side);
    Jet t = Jet::variable(theta, order);
    Jet u = (Real(jf->ell) / 2) * (t - jump_angles_[seg.anchor - 1]);
    Jet s = Real(seg.sigma) * jsin(u);  // |sin u| on this segment
    Jet phi_jet = Real(1) + exp(jf->w[seg.anchor - 1]) * jpow_int(s, static_cast<unsigned>(jf->k));
    return -jlog(phi_jet);
  }

  const auto& pc = std::get<PiecewiseCubicForm>(form_);
  // sigma theta = |theta| on the active branch; at a kink, side picks the
  // branch whose closure contains theta from that side.
  bool inner;
  int sigma;
  if (side < 0) {
    inner = theta > -pc.eps && theta <= pc.eps;
    sigma = theta <= 0 ? -1 : 1;
  } else {
    inner = theta >= -pc.eps && theta < pc.eps;
    sigma = theta < 0 ? -1 : 1;
  }
  Jet t = Jet::variable(theta, order);
  Jet x = Real(sigma) * t;  // |theta|
  const Real& M = pc.M;
  const Real& e = pc.eps;
  const Real pi = pi_val();
  if (inner) {
    return -(M / 6) * jpow_int(x, 3) + (M * e / 2 - M * e * e / (4 * pi)) * (x * x) +
           Real(M * e * e * e * e / (4 * pi) - M * e * e * e / 3);
  }
  return -(M * e * e / (4 * pi)) * (x * x) + (M * e * e / 2) * x +
         Real(M * e * e * e * e / (4 * pi) - M * e * e * e / 2);
}

Jet PotentialV::jet(const Real& theta, unsigned order) const {
  return jet_sided(theta, order, 0);
}

Real PotentialV::derivative_jump(const Real& a, unsigned p) const {
  return jet_sided(a, p, +1).deriv(p) - jet_sided(a, p, -1).deriv(p);
}

Real PotentialV::osc_bound() const {
  Real lo(0), hi(0);
  const long samples = 4096;
  const Real pi = pi_val();
  for (long i = 0; i < samples; i++) {
    Real v = (*this)(-pi + 2 * pi * (Real(i) + Real(1) / 2) / samples);
    lo = fmin(lo, v);
    hi = fmax(hi, v);
  }
  return hi - lo;
}

Real PotentialV::sup_deriv(unsigned p) const {
  Real sup(0);
  const long samples = 4096;
  const Real pi = pi_val();
  for (long i = 0; i < samples; i++) {
    Real theta = -pi + 2 * pi * (Real(i) + Real(1) / 2) / samples;
    sup = fmax(sup, abs(jet(theta, p).deriv(p)));
  }
  for (const Real& a : jump_angles_) {
    sup = fmax(sup, abs(jet_sided(a, p, +1).deriv(p)));
    sup = fmax(sup, abs(jet_sided(a, p, -1).deriv(p)));
  }
  return sup;
}

std::string PotentialV::describe() const {
  std::ostringstream os;
  if (std::holds_alternative<std::monostate>(form_)) {
    os << "unit";
  } else if (const auto* c = std::get_if<CosineForm>(&form_)) {
    os << "cosine(A=" << real_str(c->A) << ",k0=" << c->k0 << ")";
  } else if (const auto* jf = std::get_if<JumpFamilyForm>(&form_)) {
    os << "jump(ell=" << jf->ell << ",k=" << jf->k << ",w=";
    for (std::size_t i = 0; i < jf->w.size(); i++) os << (i ? "," : "") << real_str(jf->w[i]);
    os << ")";
  } else if (const auto* pc = std::get_if<PiecewiseCubicForm>(&form_)) {
    os << "cubic(M=" << real_str(pc->M) << ",eps=" << real_str(pc->eps) << ")";
  } else {
    const auto& fl = std::get<FourierListForm>(form_);
    os << "fourier(V0=" << real_str(fl.V0);
    for (std::size_t j = 0; j < fl.coeff.size(); j++)
      os << "," << real_str(fl.coeff[j].re) << "+" << real_str(fl.coeff[j].im) << "i";
    os << ")";
  }
  os << "[k=" << smoothness_k_ << "]";
  return os.str();
}

}  // namespace opuclab
