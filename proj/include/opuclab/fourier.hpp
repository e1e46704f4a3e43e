#pragma once

#include <vector>

#include "opuclab/potential.hpp"
#include "opuclab/quadrature.hpp"

namespace opuclab {

// Truncated Fourier data of a potential: V_j for 1 <= j <= M_trunc plus the
// mean V0. Negative indices follow from V real: V_{-j} = conj(V_j).
struct FourierTable {
  Real V0;
  std::vector<Cx> coeff;  // coeff[j-1] = V_j
  long M_trunc = 0;
  // Certified bound on sum_{|j| > M_trunc} |V_j| from the smoothness model
  // |V_j| <= C / |j|^k with C = sup |V^{(k)}|; exactly 0 for closed-form
  // tables. When the cap is reached before the bound meets ctx.tol, the
  // achieved bound is recorded here and meets_tol stays false.
  Real tail_bound;
  bool meets_tol = false;
  int k = 6;

  Cx V(long j) const {
    if (j == 0) return Cx(V0);
    long a = j > 0 ? j : -j;
    if (a > M_trunc) return Cx(0);
    return j > 0 ? coeff[a - 1] : conj(coeff[a - 1]);
  }
};

// Computes the table at ctx precision. Closed-form families (unit, cosine,
// explicit list, piecewise cubic) produce exact coefficients; the jump
// family combines per-coefficient segmented Gauss for low indices with a
// dense FFT for the bulk. cap limits M_trunc.
FourierTable build_fourier(const PotentialV& V, const PrecisionContext& ctx, long cap = 1 << 16);

struct ConditionTReport {
  Real sum;        // 2 sum_{j>=1} j |V_j| over the table
  Real tail;       // certified bound on the truncated part
  Real margin;     // 1 - (sum + tail)
  bool holds;      // sum + tail < 1
};

// Checks sum_j |j| |V_j| < 1 (the contraction condition on the phase).
ConditionTReport check_condition_t(const PotentialV& V, const FourierTable& table,
                                   const PrecisionContext& ctx);

struct ConditionConvexReport {
  Real inf_vpp;    // infimum of V'' over samples and one-sided kink limits
  Real argmin;
  Real margin;     // inf_vpp + 1/2
  bool holds;      // inf V'' > -1/2
};

ConditionConvexReport check_condition_convex(const PotentialV& V, const PrecisionContext& ctx);

}  // namespace opuclab
