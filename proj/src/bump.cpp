#include "opuclab/bump.hpp"

namespace opuclab {

namespace {

Real glue(const Real& t) { return t > 0 ? exp(-1 / t) : Real(0); }
Real glue_deriv(const Real& t) { return t > 0 ? exp(-1 / t) / (t * t) : Real(0); }

}  // namespace

Real bump(const Real& l) {
  const Real l2 = log2_val();
  Real a = abs(l);
  if (a <= l2 / 2) return Real(1);
  if (a >= l2) return Real(0);
  Real t = (l2 - a) / (l2 / 2);
  Real g = glue(t), h = glue(1 - t);
  return g / (g + h);
}

Real bump_deriv(const Real& l) {
  const Real l2 = log2_val();
  Real a = abs(l);
  if (a <= l2 / 2 || a >= l2) return Real(0);
  Real t = (l2 - a) / (l2 / 2);
  Real g = glue(t), h = glue(1 - t);
  Real gp = glue_deriv(t), hp = glue_deriv(1 - t);
  // d/dt of g/(g+h); h(1-t) differentiates to -hp.
  Real ds = (gp * h + g * hp) / ((g + h) * (g + h));
  Real dt_dl = (l >= 0 ? Real(-1) : Real(1)) / (l2 / 2);
  return ds * dt_dl;
}

}  // namespace opuclab
