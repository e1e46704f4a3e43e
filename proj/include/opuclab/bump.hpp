#pragma once

#include "opuclab/precision.hpp"

namespace opuclab {

// Smooth radial cutoff B(l): identically 1 for |l| < log(2)/2, identically 0
// for |l| > log(2), with the standard exp(-1/t) glue in between:
//   t = (log 2 - |l|) / (log 2 / 2),  B = g(t) / (g(t) + g(1-t)),
//   g(t) = exp(-1/t) for t > 0, else 0.
// B(3 log 2 / 4) = 1/2 by symmetry of the glue.
Real bump(const Real& l);

// dB/dl (smooth, supported on log(2)/2 < |l| < log 2).
Real bump_deriv(const Real& l);

}  // namespace opuclab
