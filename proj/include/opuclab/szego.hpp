#pragma once

#include "opuclab/fourier.hpp"

namespace opuclab {

// Szego-function apparatus over a truncated Fourier table:
//   N(z)    = sum_{j>=1} conj(V_j) z^{-j}   for |z| >= 1,
//   Nbar(z) = sum_{j>=1} V_j z^j            for |z| <= 1,
//   S(z)    = e^{N(z)} outside, e^{-V0 - Nbar(z)} inside,
//   Omega(theta) = 2 Im N(e^{i theta}) = -2 sum_j Im(V_j e^{ij theta}),
//   kappa(theta) = theta + Omega(theta).
// Truncation error of any value here is bounded by the table's tail_bound.
class SzegoEvaluator {
 public:
  explicit SzegoEvaluator(FourierTable table) : table_(std::move(table)) {}

  const FourierTable& table() const { return table_; }

  Cx N_outside(const Cx& z) const;
  Cx N_inside(const Cx& z) const;  // Nbar
  Cx S_outside(const Cx& z) const { return exp(N_outside(z)); }
  Cx S_inside(const Cx& z) const { return exp(Cx(-table_.V0) - N_inside(z)); }
  Real log_S_at_zero() const { return -table_.V0; }

  // dN/dtheta along |z| = 1: sum_{j>=1} conj(V_j) (-ij) e^{-ij theta}.
  Cx N_theta(const Real& theta) const;

  Real Omega(const Real& theta) const { return Omega_derivs(theta, 0)[0]; }
  // Omega^{(p)}(theta) for p = 0..pmax in one sweep over the table:
  // Omega^{(p)} = -2 sum_j Im((ij)^p V_j e^{ij theta}).
  std::vector<Real> Omega_derivs(const Real& theta, unsigned pmax) const;
  Real kappa(const Real& theta) const { return theta + Omega(theta); }
  Real kappa_prime(const Real& theta) const { return 1 + Omega_derivs(theta, 1)[1]; }

  // Lattice evaluations: values at theta_m = theta0 + 2 pi m / M_angles,
  // m = 0..M_angles-1 (power of two), in O(M_trunc + M_angles log M_angles)
  // total instead of O(M_trunc) per point.
  std::vector<Cx> N_inside_ring(const Real& r, std::size_t M_angles, const Real& theta0) const;
  std::vector<Cx> N_outside_ring(const Real& r, std::size_t M_angles, const Real& theta0) const;
  std::vector<Cx> N_theta_ring(std::size_t M_angles, const Real& theta0) const;
  std::vector<Real> Omega_deriv_ring(unsigned p, std::size_t M_angles, const Real& theta0) const;

 private:
  // s_m = sum_{j=1}^{M_trunc} a_j e^{i j theta_m} by folding modes into
  // residue classes mod M_angles and one inverse FFT.
  std::vector<Cx> ring_sum(const std::vector<Cx>& a, std::size_t M_angles,
                           const Real& theta0) const;

  FourierTable table_;
};

// Minimum of kappa' over a dense power-of-two lattice plus probes at
// kink_angles +- 1e-6. tau = 1 + inf Omega' = inf kappa' drives the
// varying-weight exponent bounds.
struct KappaPrimeMin {
  Real value;
  Real argmin;
};
KappaPrimeMin kappa_prime_min(const SzegoEvaluator& se, const std::vector<Real>& kink_angles);

// Degree-m extension of a boundary function off the circle from its angular
// derivatives at theta:
//   E_m f(r e^{i theta}) = sum_{p=0}^{m-1} f^{(p)}(theta) (-i log r)^p / p!,
// together with its two Wirtinger derivatives. dbar carries the single
// (m-1)-th power of log r that makes the extension nearly analytic.
struct ExtensionSample {
  Cx value;
  Cx dbar;
  Cx dz;
};
// derivs[p] = f^{(p)}(theta) for p = 0..m (one past the retained order).
ExtensionSample extend_em(const std::vector<Cx>& derivs, unsigned m, const Real& r,
                          const Real& theta);

}  // namespace opuclab
