#pragma once

#include <string>
#include <variant>
#include <vector>

#include "opuclab/cx.hpp"
#include "opuclab/jet.hpp"

namespace opuclab {

// V = A cos(k0 theta).
struct CosineForm {
  Real A;
  long k0 = 1;
};

// phi = 1 + e^{w_j} |sin(ell (theta - theta_j)/2)|^k on the arc left of
// theta_j, with theta_j = (2 pi / ell)(j - 1/2 - ell/2), j = 1..ell, and the
// arc wrapping through pi anchored at theta_1. V = -log phi. The k-th
// derivative of V jumps at each theta_j.
struct JumpFamilyForm {
  long ell = 1;
  long k = 2;
  std::vector<Real> w;
};

// Even piecewise cubic with V''' jumps at {-eps, 0, eps}:
//   |theta| <= eps:  -(M/6)|theta|^3 + (M eps/2 - M eps^2/(4 pi)) theta^2
//                    + M eps^4/(4 pi) - M eps^3/3
//   else:            -(M eps^2/(4 pi)) theta^2 + (M eps^2/2)|theta|
//                    + M eps^4/(4 pi) - M eps^3/2
struct PiecewiseCubicForm {
  Real M;
  Real eps;
};

// Explicit finite Fourier series: V = V0 + sum_{j=1}^{J} 2 Re(V_j e^{ij theta}).
struct FourierListForm {
  Real V0;
  std::vector<Cx> coeff;  // coeff[j-1] = V_j
};

using ClosedForm =
    std::variant<std::monostate, CosineForm, JumpFamilyForm, PiecewiseCubicForm, FourierListForm>;

// A real 2pi-periodic external field V defining the weight phi = e^{-V}
// (fixed) or phi = e^{-nV} (varying). Closed forms carry exact derivative
// jets and kink bookkeeping.
class PotentialV {
 public:
  static PotentialV zero();
  static PotentialV cosine(Real A, long k0 = 1, int smoothness_k = 6);
  static PotentialV jump_family(long ell, long k, std::vector<Real> w);
  static PotentialV piecewise_cubic(Real M, Real eps);
  static PotentialV fourier_list(Real V0, std::vector<Cx> coeff, int smoothness_k = 6);

  // Smoothness class: V is C^{k-1,1} with the k-th derivative jumping at
  // jump_angles() (empty for smooth families, where k is the declared
  // surrogate order used by approximants and kernels).
  int smoothness_k() const { return smoothness_k_; }
  void set_smoothness_k(int k) { smoothness_k_ = k; }
  const std::vector<Real>& jump_angles() const { return jump_angles_; }
  const ClosedForm& form() const { return form_; }

  Real operator()(const Real& theta) const { return jet(theta, 0).coeff(0); }
  // e^{-V}; the jump family uses its closed product form directly.
  Real phi(const Real& theta) const;

  // Taylor jet of V at theta. At a kink the right-side branch is used.
  Jet jet(const Real& theta, unsigned order) const;
  // side > 0: limit from above; side < 0: limit from below.
  Jet jet_sided(const Real& theta, unsigned order, int side) const;
  Real deriv(const Real& theta, unsigned p) const { return jet(theta, p).deriv(p); }

  // Jump of the p-th derivative at angle a: V^{(p)}(a+) - V^{(p)}(a-).
  Real derivative_jump(const Real& a, unsigned p) const;

  // max V - min V over a dense sample (for precision gates).
  Real osc_bound() const;
  // sup |V^{(p)}| over a dense sample including one-sided kink values.
  Real sup_deriv(unsigned p) const;

  // Stable full-precision description for cache keys and reports.
  std::string describe() const;

 private:
  PotentialV() = default;
  ClosedForm form_;
  int smoothness_k_ = 6;
  std::vector<Real> jump_angles_;
};

}  // namespace opuclab
