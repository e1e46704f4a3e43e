#pragma once

#include "opuclab/opuc.hpp"

namespace opuclab {

// The 2x2 matrix transform attached to degree n of an orthogonal family.
// Row 1 carries the monic polynomial, row 2 the normalized second kind data:
//   m11 = pi_n(z)
//   m12 = (1/2pi i) oint pi_n(s) s^{-n} phi(s) / (s - z) ds
//   m21 = -gamma_{n-1}^2 pi_{n-1}^*(z)
//   m22 = -gamma_{n-1}^2 (1/2pi i) oint pi_{n-1}^*(s) s^{-n} phi(s) / (s - z) ds
// with phi the true (unrescaled) weight. det M = 1 identically, and the
// boundary values from the two sides of the circle differ by the upper
// triangular jump [[1, phi e^{-i n theta}], [0, 1]].
struct MatrixM {
  Cx m11, m12, m21, m22;
};

inline Cx det(const MatrixM& m) { return m.m11 * m.m22 - m.m12 * m.m21; }

// Evaluate at a point off the unit circle (either side). Points with
// ||z| - 1| < 1e-12 are rejected; boundary values go through rhp_residual's
// extrapolation instead. Near-circle points (within 0.05) are handled by
// subtracting a local Taylor model of the density, so z may sit as close as
// ~1e-9 to the circle provided arg z stays away from weight kinks.
MatrixM assemble_M(const OpucFamily& fam, long n, const Cx& z, const PrecisionContext& ctx);

// Max-entry residual |M_+ - M_- J| at angle theta0, where both boundary
// values are Richardson-extrapolated to the circle from radii 1 -+ delta,
// 1 -+ 2 delta, 1 -+ 4 delta (third order, so the bias is O(delta^3)).
Real rhp_residual(const OpucFamily& fam, long n, const Real& theta0, const PrecisionContext& ctx,
                  const Real& delta = Real("1e-7"));

}  // namespace opuclab
