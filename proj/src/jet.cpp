#include "opuclab/jet.hpp"

#include <algorithm>

namespace opuclab {

Real Jet::deriv(unsigned p) const {
  Real f(1);
  for (unsigned i = 2; i <= p; i++) f *= static_cast<long>(i);
  return c_[p] * f;
}

Jet& Jet::operator+=(const Jet& o) {
  for (unsigned p = 0; p <= std::min(order(), o.order()); p++) c_[p] += o.c_[p];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  for (unsigned p = 0; p <= std::min(order(), o.order()); p++) c_[p] -= o.c_[p];
  return *this;
}

Jet& Jet::operator*=(const Real& s) {
  for (auto& x : c_) x *= s;
  return *this;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator-(const Jet& a) {
  Jet r(a.order());
  for (unsigned p = 0; p <= a.order(); p++) r.coeff(p) = -a.coeff(p);
  return r;
}
Jet operator+(Jet a, const Real& s) { return a += s; }
Jet operator-(Jet a, const Real& s) { return a -= s; }
Jet operator+(const Real& s, Jet a) { return a += s; }
Jet operator-(const Real& s, const Jet& a) {
  Jet r = -a;
  r += s;
  return r;
}
Jet operator*(Jet a, const Real& s) { return a *= s; }
Jet operator*(const Real& s, Jet a) { return a *= s; }

Jet operator*(const Jet& a, const Jet& b) {
  unsigned n = std::min(a.order(), b.order());
  Jet r(n);
  for (unsigned p = 0; p <= n; p++) {
    Real s(0);
    for (unsigned j = 0; j <= p; j++) s += a.coeff(j) * b.coeff(p - j);
    r.coeff(p) = s;
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  unsigned n = std::min(a.order(), b.order());
  Jet r(n);
  for (unsigned p = 0; p <= n; p++) {
    Real s = a.coeff(p);
    for (unsigned j = 0; j < p; j++) s -= r.coeff(j) * b.coeff(p - j);
    r.coeff(p) = s / b.coeff(0);
  }
  return r;
}

Jet jexp(const Jet& u) {
  unsigned n = u.order();
  Jet y(n);
  y.coeff(0) = exp(u.coeff(0));
  for (unsigned k = 1; k <= n; k++) {
    Real s(0);
    for (unsigned j = 1; j <= k; j++) s += static_cast<long>(j) * u.coeff(j) * y.coeff(k - j);
    y.coeff(k) = s / static_cast<long>(k);
  }
  return y;
}

Jet jlog(const Jet& u) {
  unsigned n = u.order();
  Jet y(n);
  y.coeff(0) = log(u.coeff(0));
  for (unsigned k = 1; k <= n; k++) {
    Real s = static_cast<long>(k) * u.coeff(k);
    for (unsigned j = 1; j < k; j++) s -= static_cast<long>(j) * y.coeff(j) * u.coeff(k - j);
    y.coeff(k) = s / (static_cast<long>(k) * u.coeff(0));
  }
  return y;
}

namespace {

void sincos_pair(const Jet& u, Jet& s, Jet& c) {
  unsigned n = u.order();
  s = Jet(n);
  c = Jet(n);
  s.coeff(0) = sin(u.coeff(0));
  c.coeff(0) = cos(u.coeff(0));
  for (unsigned k = 1; k <= n; k++) {
    Real as(0), ac(0);
    for (unsigned j = 1; j <= k; j++) {
      as += static_cast<long>(j) * u.coeff(j) * c.coeff(k - j);
      ac += static_cast<long>(j) * u.coeff(j) * s.coeff(k - j);
    }
    s.coeff(k) = as / static_cast<long>(k);
    c.coeff(k) = -ac / static_cast<long>(k);
  }
}

}  // namespace

Jet jsin(const Jet& u) {
  Jet s(u.order()), c(u.order());
  sincos_pair(u, s, c);
  return s;
}

Jet jcos(const Jet& u) {
  Jet s(u.order()), c(u.order());
  sincos_pair(u, s, c);
  return c;
}

Jet jpow_int(const Jet& u, unsigned k) {
  Jet r(u.order(), Real(1));
  Jet base = u;
  unsigned e = k;
  while (e > 0) {
    if (e & 1) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

}  // namespace opuclab
