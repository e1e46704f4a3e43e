#pragma once

#include "opuclab/precision.hpp"

namespace opuclab {

// Complex number over the multiprecision real. std::complex does not
// support non-builtin scalars, so the handful of operations we need live
// here.
struct Cx {
  Real re, im;

  Cx() : re(0), im(0) {}
  Cx(Real r) : re(std::move(r)), im(0) {}  // NOLINT: implicit by design
  Cx(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  Cx(int r) : re(r), im(0) {}              // NOLINT
  Cx(double r) : re(r), im(0) {}           // NOLINT

  Cx& operator+=(const Cx& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Cx& operator-=(const Cx& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Cx& operator*=(const Cx& o) {
    Real r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  Cx& operator*=(const Real& s) {
    re *= s;
    im *= s;
    return *this;
  }
  Cx& operator/=(const Real& s) {
    re /= s;
    im /= s;
    return *this;
  }
  Cx& operator/=(const Cx& o);
};

inline Cx operator+(Cx a, const Cx& b) { return a += b; }
inline Cx operator-(Cx a, const Cx& b) { return a -= b; }
inline Cx operator*(Cx a, const Cx& b) { return a *= b; }
inline Cx operator-(const Cx& a) { return Cx(-a.re, -a.im); }

inline Cx operator*(Cx a, const Real& s) { return a *= s; }
inline Cx operator*(const Real& s, Cx a) { return a *= s; }
inline Cx operator/(Cx a, const Real& s) { return a /= s; }

inline Cx conj(const Cx& a) { return Cx(a.re, -a.im); }
inline Real norm_sq(const Cx& a) { return a.re * a.re + a.im * a.im; }
inline Real abs(const Cx& a) { return hypot(a.re, a.im); }
inline Real arg(const Cx& a) { return atan2(a.im, a.re); }

inline Cx& Cx::operator/=(const Cx& o) {
  Real d = norm_sq(o);
  Real r = (re * o.re + im * o.im) / d;
  im = (im * o.re - re * o.im) / d;
  re = std::move(r);
  return *this;
}
inline Cx operator/(Cx a, const Cx& b) { return a /= b; }
inline Cx operator/(const Real& s, const Cx& b) { return Cx(s) /= b; }

inline bool operator==(const Cx& a, const Cx& b) { return a.re == b.re && a.im == b.im; }
inline bool operator!=(const Cx& a, const Cx& b) { return !(a == b); }

// e^{i theta}
inline Cx unit(const Real& theta) { return Cx(cos(theta), sin(theta)); }

inline Cx polar(const Real& r, const Real& theta) {
  return Cx(r * cos(theta), r * sin(theta));
}

inline Cx exp(const Cx& a) {
  Real m = exp(a.re);
  return Cx(m * cos(a.im), m * sin(a.im));
}

// Principal branch.
inline Cx log(const Cx& a) { return Cx(log(abs(a)), arg(a)); }

// Principal square root.
inline Cx sqrt(const Cx& a) {
  Real m = abs(a);
  if (m == 0) return Cx(0, 0);
  if (a.re >= 0) {
    Real r = sqrt((m + a.re) / 2);
    return Cx(r, a.im / (2 * r));
  }
  Real i = sqrt((m - a.re) / 2);
  if (a.im < 0) i = -i;
  if (a.im == 0) i = abs(i);  // sqrt(-x) = +i sqrt(x)
  return Cx(a.im == 0 ? Real(0) : a.im / (2 * i), i);
}

// Integer power by squaring; p may be negative.
inline Cx pow_i(Cx base, long p) {
  if (p < 0) {
    base = Cx(1) / base;
    p = -p;
  }
  Cx acc(1);
  while (p > 0) {
    if (p & 1) acc *= base;
    base *= base;
    p >>= 1;
  }
  return acc;
}

inline bool is_finite(const Cx& a) { return is_finite(a.re) && is_finite(a.im); }

// Point on the punctured plane in polar coordinates.
struct PolarPoint {
  Real r;
  Real theta;
  Cx z() const { return polar(r, theta); }
};

}  // namespace opuclab
