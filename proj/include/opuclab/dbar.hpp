#pragma once

#include <iosfwd>
#include <vector>

#include "opuclab/rhp.hpp"
#include "opuclab/szego.hpp"

namespace opuclab {

// Cell-centered polar grid over the band 2^{-eps} <= r <= 2^{eps}. Radial
// edges are uniform in log r (so cell centers sit at the geometric mean of
// their edges), angular centers are half-offset so no center lies on a kink
// ray by default. radial_cells must be even (no center on the unit circle),
// angular_cells a power of two (the grid transport runs through FFTs).
struct AnnulusGrid {
  Real epsilon;
  long radial_cells = 0;
  long angular_cells = 0;
  std::vector<Real> log_edges;    // size radial_cells + 1, spanning +-eps*log 2
  std::vector<Real> edge_r;       // exp(log_edges)
  std::vector<Real> centers_logr; // midpoints in log r
  std::vector<Real> centers_r;
  std::vector<Real> centers_theta;

  AnnulusGrid(const Real& eps, long radial, long angular);
  // Default sizing max(64, 4n) x max(256, 8n rounded up to a power of two),
  // gated at n <= 64 to keep memory and runtime inside the envelope the
  // solver was tuned for.
  static AnnulusGrid standard(const Real& eps, long n);

  long cells() const { return radial_cells * angular_cells; }
  long index(long i, long j) const { return i * angular_cells + j; }
  Real dlog() const { return log_edges[1] - log_edges[0]; }
  Real dtheta() const;
  Real theta0() const { return centers_theta[0]; }
  bool inner_ring(long i) const { return centers_logr[i] < 0; }
  PolarPoint center(long i, long j) const { return {centers_r[i], centers_theta[j]}; }
  // Exact area of any cell in ring i: dtheta * (r_{i+1}^2 - r_i^2) / 2.
  Real cell_area(long i) const;
  Real total_area() const;
  // Containing cell of z; false when z lies outside the band.
  bool locate(const Cx& z, long& i, long& j) const;
};

enum class KernelKind { WFixed, XVarying };

// The conjugated dbar datum of the transported transform: a matrix density
// over the band, strictly upper triangular inside the circle and strictly
// lower triangular outside, vanishing where the radial cutoff has died.
// Only the single nonzero entry per cell is stored.
struct KernelField {
  KernelKind kind = KernelKind::WFixed;
  long n = 0;
  long m = 0;
  Real epsilon;
  AnnulusGrid grid;
  std::vector<Cx> entry;  // (1,2) entry on inner rings, (2,1) on outer rings

  MatrixM sample(long i, long j) const {
    MatrixM s;
    const Cx& e = entry[grid.index(i, j)];
    if (grid.inner_ring(i))
      s.m12 = e;
    else
      s.m21 = e;
    return s;
  }
  Real sup_entry() const;
};

// 2x2 matrix-valued samples over a grid, stored as four planes.
struct GridField {
  long radial = 0;
  long angular = 0;
  std::vector<Cx> e11, e12, e21, e22;

  static GridField zero(const AnnulusGrid& g);
  static GridField identity(const AnnulusGrid& g);
  long index(long i, long j) const { return i * angular + j; }
  MatrixM at(long i, long j) const {
    long t = index(i, j);
    return {e11[t], e12[t], e21[t], e22[t]};
  }
  GridField& operator+=(const GridField& o);
  Real sup_norm() const;  // max over cells of the max entry modulus
};

Real sup_det_deviation(const GridField& f);

// Samples the kernel density over the grid.
//   fixed (phi = e^{-V}):   w12 = z^n  S_in(z)^2   e^{E_m V} (dbar B + B dbar E_m V)    r < 1
//                           w21 = z^-n S_out(z)^-2 e^{E_m V} (dbar B + B dbar E_m V)    r > 1
//   varying (phi = e^{-nV}): x12 = z^n  e^{ i n E_m Omega} (dbar B + i n B dbar E_m Omega)
//                            x21 = z^-n e^{-i n E_m Omega} (dbar B - i n B dbar E_m Omega)
// with B = bump(log r / eps). Preconditions: n >= 1; fixed needs
// 1 <= m <= k, varying needs 2 <= m <= k, n equal to the weight's n, and a
// strictly positive minimum of kappa' (otherwise the deformation direction
// is wrong and the field is refused). The evaluator must be built from the
// same potential as the weight.
KernelField build_kernel_field(const WeightSpec& w, const SzegoEvaluator& sz, long n, long m,
                               const Real& epsilon, const AnnulusGrid& grid,
                               const PrecisionContext& ctx);

// One solid-Cauchy application at a single point:
//   -(1/pi) sum_cells F(c) K(c) / (z_c - z) * area_c,
// except that the cell containing z is integrated in local polar coordinates
// about z (the 1/(z'-z) singularity cancels against the area element) and
// cells within a couple of diameters are subdivided 4x4. Works for any z,
// on or off the band.
MatrixM cauchy_apply(const KernelField& field, const GridField& F, const Cx& z);

// The same operator applied at every cell center at once. Per ring the
// angular dependence is expanded by FFT and each mode is transported with
// the exact radial power integrals, so the cost is O(cells log cells)
// rather than O(cells^2).
GridField cauchy_apply_grid(const KernelField& field, const GridField& F);

// Neumann resolution of H = I + (cauchy H K): partial sums of
// I + K I + K^2 I + ... with the sup norm of each term recorded.
struct DbarSolution {
  KernelField field;
  GridField samples;
  std::vector<Real> neumann_terms;

  const AnnulusGrid& grid() const { return field.grid; }
  // One further operator application off the grid: I + (cauchy samples)(z).
  MatrixM offgrid(const Cx& z) const;
};

// Raises ConvergenceError when the first term reaches sup norm 1/2, when
// the ratio of the first two terms reaches 1, when the term norms fail to
// decrease three times in a row, or when max_terms partial sums do not
// bring the term below ctx.tol.
DbarSolution neumann_solve(const KernelField& field, const PrecisionContext& ctx,
                           long max_terms = 64);

// term_index,sup_norm rows for the recorded Neumann history.
void write_norm_history(const DbarSolution& sol, std::ostream& os);
// Full-precision JSON dump of the solution samples (every stride-th cell in
// each direction), decimal strings throughout.
void dump_grid_json(const DbarSolution& sol, std::ostream& os, long stride = 1);

// sup_z of the singular layer integral
//   int_band e^{-n |log r'|} |log r'|^{nu-1} / |z' - z| dA'
// over a deterministic radius sample, for each n. The angular integral is a
// complete elliptic integral evaluated by AGM; the radial integral uses
// panels graded toward the layer at r' = 1 and toward |z|. bound_fit is the
// fitted model K log n / n^e at that n.
struct KeyboundRow {
  long n;
  Real lhs;
  Real bound_fit;
};
struct KeyboundReport {
  Real nu;
  std::vector<KeyboundRow> rows;       // sup over radii near the band
  Real exponent;                       // fitted e in lhs ~ K log n n^e
  Real prefactor;                      // fitted K
  Real fit_rms;                        // rms residual of the log-log fit
  std::vector<KeyboundRow> away_rows;  // same integral evaluated at |z| = 4
};
KeyboundReport verify_keybound(const Real& nu, const Real& epsilon,
                               const std::vector<long>& n_list, const PrecisionContext& ctx);

// Largest mu such that |e^{-i E_m Omega}| <= r^{1-mu} outside and
// |e^{+i E_m Omega}| <= r^{mu-1} inside across a fixed lattice on the band,
// i.e. the infimum of 1 - Im(E_m Omega)/log r. holds iff mu > 0.
struct ExponentControl {
  Real mu;
  bool holds;
};
ExponentControl verify_exponent_control(const SzegoEvaluator& sz, long m, const Real& epsilon,
                                        const PrecisionContext& ctx);

}  // namespace opuclab
