#include "opuclab/precision.hpp"

namespace opuclab {

Real PrecisionContext::tol() const {
  auto scope = activate();
  Real t = pow(Real(2), -static_cast<int>(mantissa_bits / 4));
  return t;
}

namespace {

struct CachedConst {
  unsigned digits = 0;
  Real value;
};

}  // namespace

const Real& pi_val() {
  thread_local CachedConst cache;
  unsigned d = Real::default_precision();
  if (cache.digits != d) {
    cache.value = 4 * atan(Real(1));
    cache.digits = d;
  }
  return cache.value;
}

const Real& log2_val() {
  thread_local CachedConst cache;
  unsigned d = Real::default_precision();
  if (cache.digits != d) {
    cache.value = log(Real(2));
    cache.digits = d;
  }
  return cache.value;
}

}  // namespace opuclab
