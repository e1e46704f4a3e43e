#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "opuclab/opuc.hpp"
#include "opuclab/potential.hpp"
#include "opuclab/szego.hpp"

namespace opuclab {

// Which strong-asymptotics formula an Approximant realizes. Each kind owns
// the region on which its error bound is stated; evaluating off-region is a
// ValidationError rather than a silent extrapolation.
enum class ApproxKind {
  OutsideFixed,    // |z| > 1:      pi_n ~ z^n e^{N(z)}
  CircleFixed,     // |z| >= 1:     same formula, bound holds up to the circle
  InsideFixed,     // 0 < |z| < 1:  pi_n ~ z^n e^{-V0 - Nbar(z)} e^{E_k V}
  InsideDeep,      // |z| < 1:      pi_n ~ 0
  JumpModel,       // log|z| < -(k - sigma) log(n)/n: bump-matched inside
                   // formula plus the rational correction e^{Nbar} f_n / n^{k+1}
  OutsideVarying,  // |z| > 1:      pi_n ~ z^n e^{n N(z)}
  CircleVarying,   // |z| >= 1
  InsideVarying,   // 0 < |z| < 1:  pi_n ~ z^n e^{n Nbar(z)} e^{i n E_k Omega}
};

const char* to_string(ApproxKind kind);
bool is_varying(ApproxKind kind);

// Rational model of the near-circle inside behavior when V^{(k)} jumps:
//   f_n(z) = prefactor * sum_j weights[j] e^{i(n+1) theta_j} / (e^{i theta_j} - z),
// prefactor = i^{k+1} / (2 pi), weights[j] = Delta_j^{(k)} e^{i Omega(theta_j)},
// Delta_j^{(k)} the jump of V^{(k)} across theta_j. ell poles on the circle,
// at most ell - 1 zeros.
struct RationalFn {
  long n = 0;
  unsigned k = 0;
  std::vector<Real> pole_angles;  // theta_j, ascending in (-pi, pi]
  std::vector<Cx> weights;        // Delta_j^{(k)} e^{i Omega(theta_j)}

  std::size_t ell() const { return pole_angles.size(); }
  Cx prefactor() const;  // i^{k+1} / (2 pi)
  Cx residue_num(std::size_t j) const;  // prefactor * weights[j] * e^{i(n+1) theta_j}
  Cx eval(const Cx& z) const;
  // Numerator over the common denominator prod_j (e^{i theta_j} - z), in
  // descending powers, size ell. Leading entries may vanish; the represented
  // degree is at most ell - 1.
  std::vector<Cx> numerator() const;
};

// Builds f_n from the analytic one-sided jets of the weight's potential.
// Requires jump data: ValidationError if V has no kink angles.
RationalFn make_fn(const PotentialV& V, const SzegoEvaluator& sz, long n);

// Jump of V^{(p)} across angle a by one-sided finite differences on stencils
// of order 6 (spacing h = 2^{-10}), as an independent route to the analytic
// jets used by make_fn.
Real fd_derivative_jump(const PotentialV& V, const Real& a, unsigned p);

// A single strong-asymptotics formula bound to one degree n. Owns copies of
// the Szego apparatus and the potential so it stays valid on its own.
struct Approximant {
  ApproxKind kind = ApproxKind::OutsideFixed;
  long n = 0;
  unsigned k = 0;  // extension order entering the inside formulas
  Real sigma;      // JumpModel region parameter
  Real epsilon;    // JumpModel bump scale
  SzegoEvaluator sz;
  PotentialV V;
  RationalFn fn;   // populated for JumpModel only

  bool in_region(const Cx& z) const;
  // Model value for pi_n(z). ValidationError when z is off the kind's region.
  Cx eval(const Cx& z) const;
};

// sigma = epsilon = 1/2 unless given. Gates: n >= 1; JumpModel needs kink
// angles and k >= 2; the varying kinds need k >= 2 and strictly increasing
// kappa (min kappa' > 0).
Approximant make_approximant(ApproxKind kind, const SzegoEvaluator& sz, const PotentialV& V,
                             long n, const PrecisionContext& ctx);
Approximant make_approximant(ApproxKind kind, const SzegoEvaluator& sz, const PotentialV& V,
                             long n, const Real& sigma, const Real& epsilon,
                             const PrecisionContext& ctx);

// |theorem left-hand side| at one point, in the exact normalized form the
// bound is stated in (e.g. |pi_n z^{-n} e^{-N} - 1| outside, n^{k+1}-scaled
// jump-model residual inside). pi must be the degree-(a.n) level.
Real normalized_error_at(const Approximant& a, const OpucLevel& pi, const Cx& z);

// Deterministic sample sets: the circle uses 8n equispaced angles offset by
// half a node (so kink angles are never sampled); annuli use a radial x
// angular polar lattice, half-offset in both directions, angular a power of
// two so ring evaluation applies.
struct RegionSpec {
  enum class Shape { Circle, Annulus };
  Shape shape = Shape::Circle;
  Real r_lo;
  Real r_hi;
  long radial = 64;
  long angular = 256;
  long circle_per_n = 8;

  static RegionSpec circle();
  static RegionSpec annulus(const Real& r_lo, const Real& r_hi);
  std::string describe() const;
};

struct ErrorEntry {
  long n = 0;
  Real sup_err;
  long samples = 0;
};

struct ErrorReport {
  std::string label;
  long p = 0;
  std::vector<ErrorEntry> entries;
};

// Sup of the normalized theorem error over the region's sample set. The
// family must contain degree a.n and, for varying kinds, be built with
// weight scale s = a.n. p = 1 (first angular derivative form) is supported
// on the circle kinds only.
ErrorEntry sup_error(const Approximant& a, const OpucFamily& fam, const RegionSpec& region,
                     const PrecisionContext& ctx, long p = 0);

// One sup_error entry per n. Fixed kinds reuse a single family built to
// max(n_list); varying kinds rebuild moments per n with scale s = n.
ErrorReport error_series(ApproxKind kind, const PotentialV& V, const std::vector<long>& n_list,
                         const RegionSpec& region, const PrecisionContext& ctx, long p = 0);

// Norming-constant error per n: |gamma_n^2 e^{-V0} - 1| for the fixed weight,
// |gamma_{n-1}^2 e^{-n V0} - 1| for the varying weight e^{-nV}.
ErrorReport gamma_error_series(const PotentialV& V, WeightMode mode,
                               const std::vector<long>& n_list, const PrecisionContext& ctx);

// Least-squares fit of log err = log_prefactor + exponent * log n, optionally
// with a fixed +log log n term (with_loglog). Non-positive errors are dropped
// and counted in `filtered`; at least four usable entries are required.
struct RateFit {
  Real exponent;
  Real log_prefactor;
  bool with_loglog = false;
  Real residual_rms;
  long used = 0;
  long filtered = 0;
};

RateFit fit_rate(const ErrorReport& report, bool with_loglog);

Real attract_radius(unsigned k, long n);    // 1 - (k+1) log(n)/n
Real forbidden_radius(unsigned k, long n);  // 1 - k log(n)/n

void write_error_csv(const ErrorReport& report, std::ostream& os);
void write_rate_json(const RateFit& fit, std::ostream& os);

}  // namespace opuclab
