#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "opuclab/asym.hpp"
#include "opuclab/szego.hpp"

namespace opuclab {

// One root cluster: nearby roots (within 10 ctx.tol of each other) are
// merged into a representative carrying the cluster size as multiplicity.
struct ZeroEntry {
  Cx z;
  Real residual;  // |p(z)| at the representative
  long multiplicity = 1;
  bool converged = true;
};

struct ZeroSet {
  long degree = 0;
  std::vector<ZeroEntry> roots;        // sum of multiplicities == degree
  std::vector<std::size_t> unconverged;  // indices into roots
  Real vieta1_err;  // |sum z_i + c[1]|
  Real vieta2_err;  // |sum_{i<j} z_i z_j - c[2]|, 0 when degree < 2

  long total_count() const;
  bool all_converged() const { return unconverged.empty(); }
};

// Simultaneous Aberth refinement of all roots of a monic polynomial given
// by descending coefficients (coeffs[0] = 1). Exact roots at the origin are
// peeled off the constant term first; the rest start on the circle of
// radius |c_n|^(1/m) (the geometric mean of the remaining roots) at
// slightly perturbed equal angles, and every root is updated once per
// sweep until the largest Newton step drops below ctx.tol. Roots still
// moving after the sweep cap are reported in `unconverged`, not thrown.
// Raises ValidationError for degree < 1 or a non-unit leading coefficient,
// ConvergenceError when the converged set fails its Vieta identities.
ZeroSet find_zeros(const std::vector<Cx>& coeffs, const PrecisionContext& ctx);

// Independent small-degree oracle: eigenvalues of the companion matrix by
// shifted Hessenberg QR in the caller's precision. Degree capped at 32.
std::vector<Cx> companion_zeros(const std::vector<Cx>& coeffs, const PrecisionContext& ctx);

// One zero sitting above the theoretical zero-free boundary.
struct ZeroViolation {
  std::size_t index;  // into zs.roots
  Real margin;        // log|z| - boundary (positive = violating)
};

// Zero-free verdict. Fixed weight: flags roots with
//   log|z| > -(k - delta) log(n)/n.
// Varying weight: flags roots with
//   log r > -((k - 1 - delta)/(1 + Omega'(theta))) log(n)/n,
// skipping angles where 1 + Omega' <= 0 (the bound is vacuous there).
// Requires 0 < delta < k (fixed) resp. 0 < delta < k - 1 (varying).
std::vector<ZeroViolation> zero_free_verdict(const ZeroSet& zs, unsigned k, const Real& delta,
                                             long n, WeightMode mode,
                                             const SzegoEvaluator& sz);

// Membership sign of log|f_n(z)| against the level M: +1, 0, -1.
struct NearCircleZero {
  std::size_t index;  // into zs.roots
  int f_class;        // +1 in F+, 0 in F0, -1 in F-
  Real mod_residual;  // |z| - [1 - (k+1)log n/n + log|f_n(z)|/n]  (F0/F+ only)
  Real arg_residual;  // theta - [-Omega + arg f_n + pi]/n, reduced mod 2pi/n
  Real gap_after;     // angular gap to the next near-circle zero (cyclic)
  Real pole_angle;    // nearest tick angle for F+ members
};

struct SpuriousMatch {
  Cx fn_zero;
  std::size_t pi_index;  // into zs.roots
  Real distance;
  bool ambiguous = false;  // another candidate also fit inside the radius
};

struct ZeroClassification {
  Real sigma, levelM;
  Real r_inner, r_outer;  // the near-circle annulus A_n(sigma)
  std::vector<NearCircleZero> near_circle;
  std::vector<SpuriousMatch> spurious;
  std::vector<std::size_t> other;       // everything else, by index
  std::vector<std::size_t> violations;  // log|z| above the outer rim of A_n
  bool f_plus_components_disjoint = true;
  // Largest n*| |z| - (1 - (k+1)log n/n) | over F0 members: the empirical
  // half-width of the zero band, reported rather than asserted.
  Real band_alpha;

  std::size_t classified_count() const;  // near_circle + spurious + other
};

// Partition of the zero set against the geometric predictions: matched
// spurious zeros first, then annulus members (with modulus/argument
// residuals and neighbor gaps), then the rest. Zeros above the outer rim
// of A_n(sigma) land in `other` and are additionally listed as violations.
ZeroClassification classify(const ZeroSet& zs, const RationalFn& fn, unsigned k, long n,
                            const Real& sigma, const Real& levelM, const SzegoEvaluator& sz,
                            const PrecisionContext& ctx);

// Greedy one-to-one matching of deep f_n zeros (|z| <= 1 - (k+1)log n/n - 5/n)
// to their nearest pi_n zeros; a pair is declared at distance
// < 0.5 log(n)/n, shortest distances claimed first, and a match is marked
// ambiguous when a competing candidate also fit inside the radius.
std::vector<SpuriousMatch> match_spurious(const ZeroSet& zs, const RationalFn& fn, unsigned k,
                                          long n, const PrecisionContext& ctx);

// Roots of the numerator of f_n (at most ell - 1 of them; empty for a
// single tick). Near-zero leading coefficients are stripped before the
// monic normalization so a degenerate top degree does not poison the solve.
std::vector<Cx> fn_zeros(const RationalFn& fn, const PrecisionContext& ctx);

// re,im,|z|,class,matched_pole_or_zero rows; classes are near_circle /
// spurious / other / violation.
void write_zero_csv(const ZeroSet& zs, const ZeroClassification& cls, std::ostream& os);
void write_zero_csv(const ZeroSet& zs, std::ostream& os);  // class column left empty

// Scatter plot of the zero set: unit circle, attract circle
// 1 - (k+1)log n/n in green, forbidden boundary 1 - k log n/n in red,
// tick marks at the pole angles, f_n zeros as large dots, pi_n zeros as
// small dots.
void write_zero_svg(const ZeroSet& zs, const std::vector<Cx>& fn_zeros, unsigned k, long n,
                    const std::vector<Real>& pole_angles, std::ostream& os);

}  // namespace opuclab
