#pragma once

#include <optional>

#include "opuclab/potential.hpp"
#include "opuclab/quadrature.hpp"

namespace opuclab {

// Weight on the unit circle: phi = e^{-V} (fixed) or phi = e^{-n V}
// (varying, one weight per degree n).
enum class WeightMode { Fixed, Varying };

struct WeightSpec {
  PotentialV potential;
  WeightMode mode = WeightMode::Fixed;
  long n_weight = 0;  // the n in e^{-nV}; ignored in fixed mode

  Real scale_s() const { return Real(mode == WeightMode::Varying ? n_weight : 1); }
  // e^{-s V(theta)}
  Real weight(const Real& theta) const {
    return exp(-scale_s() * potential(theta));
  }
  std::string describe() const;
};

// Trigonometric moments of the rescaled weight e^{s V0} phi:
//   mu~_t = (1/2pi) int e^{-i t theta} e^{-s(V(theta) - V0)} dtheta,
// t = -n_max..n_max. The rescaling keeps every entry O(1) regardless of n;
// monic recursion coefficients are invariant under it, and norms relate by
// ||pi||^2_phi = e^{-s V0} ||pi||^2_scaled.
class MomentTable {
 public:
  MomentTable(std::vector<Cx> m, long n_max, Real v0, Real s)
      : m_(std::move(m)), n_max_(n_max), v0_(std::move(v0)), s_(std::move(s)) {}

  long n_max() const { return n_max_; }
  const Real& V0() const { return v0_; }
  const Real& s() const { return s_; }
  // mu~_t, using Hermitian symmetry for t < 0.
  Cx mu(long t) const {
    long a = t >= 0 ? t : -t;
    if (a > n_max_) throw ValidationError("moment index beyond table");
    return t >= 0 ? m_[a] : conj(m_[a]);
  }

 private:
  std::vector<Cx> m_;  // t = 0..n_max
  long n_max_ = 0;
  Real v0_;
  Real s_;
};

// Builds moments to ctx.tol by doubling periodic quadrature (segmented at
// weight kinks), after checking the precision gate
//   mantissa_bits >= s * osc(V)/log 2 + 64
// (the scaled integrand spans e^{s osc(V)}; fewer bits cannot resolve the
// small moments against it). Throws PrecisionGateError when violated.
MomentTable build_moments(const WeightSpec& w, long n_max, const PrecisionContext& ctx);

// One orthogonal polynomial level: monic coefficients of pi_n plus the
// attached normalization data.
struct OpucLevel {
  long n = 0;
  std::vector<Cx> c;        // c[j] = coefficient of z^{n-j}, c[0] = 1
  Cx alpha;                 // alpha_n = pi_n(0) (undefined at n = 0: 1)
  Real norm_sq_scaled;      // ||pi_n||^2 w.r.t. the rescaled weight
  Real gamma_sq_scaled;     // 1/norm_sq_scaled = gamma_n^2 e^{-s V0}

  Cx eval(const Cx& z) const {  // Horner in the stored order
    Cx acc(0);
    for (const Cx& cj : c) acc = acc * z + cj;
    return acc;
  }
  Cx reversed_conj_eval(const Cx& z) const {  // pi_n^*(z) = z^n conj(pi_n(1/conj z))
    Cx acc(0);
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + conj(*it);
    return acc;
  }
};

struct OpucFamily {
  WeightSpec weight;
  std::vector<OpucLevel> level;  // 0..n_max
  Real V0;
  Real s;

  const OpucLevel& at(long n) const { return level.at(static_cast<std::size_t>(n)); }
  // gamma_n^2 e^{-s V0}, the scale-free normalization statistic.
  Real gamma_sq_scaled(long n) const { return at(n).gamma_sq_scaled; }
};

// Szego recursion driven by the moment table:
//   pi_{n+1}(z) = z pi_n(z) + alpha_{n+1} pi_n^*(z),
//   alpha_{n+1} = -<z pi_n, 1> / ||pi_n||^2,
// with every inner product an exact finite combination of table moments.
// The norm identity ||pi_{n+1}||^2 = (1 - |alpha_{n+1}|^2) ||pi_n||^2 is
// verified against the directly summed norm at every step (ConvergenceError
// on failure); norms themselves always come from the direct sums.
OpucFamily levinson(const MomentTable& moments, long n_max, const WeightSpec& w,
                    const PrecisionContext& ctx);

// Independent oracle: modified Gram-Schmidt on {1, z, .., z^n} in coefficient
// space, using the same moment table for inner products. O(n^3) moment
// combinations; intended for n <= ~32 cross-checks.
OpucFamily gram_schmidt_oracle(const MomentTable& moments, long n_max, const WeightSpec& w,
                               const PrecisionContext& ctx);

}  // namespace opuclab
