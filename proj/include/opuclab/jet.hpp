#pragma once

#include <vector>

#include "opuclab/precision.hpp"

namespace opuclab {

// Truncated Taylor series in one variable: forward-mode derivatives for the
// closed-form potentials. c[p] holds f^{(p)}(x0)/p!.
class Jet {
 public:
  explicit Jet(unsigned order) : c_(order + 1, Real(0)) {}
  Jet(unsigned order, const Real& constant) : c_(order + 1, Real(0)) { c_[0] = constant; }

  static Jet variable(const Real& value, unsigned order) {
    Jet j(order);
    j.c_[0] = value;
    if (order >= 1) j.c_[1] = 1;
    return j;
  }

  unsigned order() const { return static_cast<unsigned>(c_.size()) - 1; }
  const Real& coeff(unsigned p) const { return c_[p]; }
  Real& coeff(unsigned p) { return c_[p]; }
  Real deriv(unsigned p) const;  // p! * c[p]

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(const Real& s) { c_[0] += s; return *this; }
  Jet& operator-=(const Real& s) { c_[0] -= s; return *this; }
  Jet& operator*=(const Real& s);

 private:
  std::vector<Real> c_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator+(Jet a, const Real& s);
Jet operator-(Jet a, const Real& s);
Jet operator+(const Real& s, Jet a);
Jet operator-(const Real& s, const Jet& a);
Jet operator*(Jet a, const Real& s);
Jet operator*(const Real& s, Jet a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);

Jet jexp(const Jet& u);
Jet jlog(const Jet& u);  // requires u.coeff(0) > 0
Jet jsin(const Jet& u);
Jet jcos(const Jet& u);
Jet jpow_int(const Jet& u, unsigned k);

}  // namespace opuclab
