#include <doctest.h>

#include "opuclab/bump.hpp"
#include "opuclab/cx.hpp"
#include "opuclab/fft.hpp"
#include "opuclab/jet.hpp"
#include "opuclab/quadrature.hpp"
#include "test_util.hpp"

using namespace opuclab;
using testutil::check_close;

TEST_CASE("precision context basics") {
  PrecisionContext ctx(256);
  auto scope = ctx.activate();
  CHECK(ctx.tol() == pow(Real(2), -64));
  CHECK_THROWS_AS(PrecisionContext(32), ValidationError);

  // Requested mantissa is a floor on the actual working precision.
  Real one(1);
  CHECK(mpfr_get_prec(one.backend().data()) >= 256);

  PrecisionContext wide(320);
  CHECK(wide.tol() == pow(Real(2), -80));
}

TEST_CASE("complex arithmetic identities") {
  PrecisionContext ctx(256);
  auto scope = ctx.activate();
  Real eps = pow(Real(2), -240);

  Cx a(Real("1.25"), Real("-0.75"));
  Cx b(Real("0.3"), Real("2.125"));
  check_close(a * b / b, a, eps, "mul/div roundtrip");
  check_close(exp(log(a)), a, eps, "exp(log)");
  check_close(sqrt(a) * sqrt(a), a, eps, "sqrt squared");
  check_close(sqrt(Cx(-4, 0)), Cx(0, 2), eps, "sqrt(-4)");
  check_close(pow_i(a, 7), a * a * a * a * a * a * a, eps, "pow_i");
  check_close(pow_i(a, -3) * pow_i(a, 3), Cx(1), eps, "pow_i negative");
  CHECK(abs(unit(Real("1.1")) - Cx(cos(Real("1.1")), sin(Real("1.1")))) == 0);
  check_close(norm_sq(b), abs(b) * abs(b), eps, "norm vs abs");

  PolarPoint p{Real("0.5"), pi_val() / 3};
  check_close(abs(p.z()), Real("0.5"), eps, "polar modulus");
}

TEST_CASE("fft matches a hand-computed DFT and inverts") {
  PrecisionContext ctx(256);
  auto scope = ctx.activate();
  Real eps = pow(Real(2), -240);

  std::vector<Cx> a = {Cx(1), Cx(2), Cx(3), Cx(4)};
  auto saved = a;
  fft_pow2(a, false);
  check_close(a[0], Cx(10), eps, "X0");
  check_close(a[1], Cx(-2, 2), eps, "X1");
  check_close(a[2], Cx(-2), eps, "X2");
  check_close(a[3], Cx(-2, -2), eps, "X3");
  fft_pow2(a, true);
  for (int i = 0; i < 4; i++) check_close(a[i], saved[i], eps, "roundtrip");

  // Samples of e^{i m theta} land in exactly one bin.
  const unsigned n = 64;
  std::vector<Cx> s(n);
  for (unsigned j = 0; j < n; j++) s[j] = unit(2 * pi_val() * 5 * static_cast<long>(j) / n);
  fft_pow2(s, false);
  check_close(s[5], Cx(Real(n)), Real(n) * eps, "pure mode bin");
  Real off(0);
  for (unsigned k = 0; k < n; k++)
    if (k != 5) off = fmax(off, abs(s[k]));
  CHECK(off <= Real(n) * eps);
}

TEST_CASE("periodic trapezoid: trig-polynomial exactness and error paths") {
  PrecisionContext ctx(256);
  auto scope = ctx.activate();
  Real eps = pow(Real(2), -240);

  // Degree 7 < M/2 = 8: the rule integrates it exactly.
  auto f = [](const Real& t) {
    return Cx(3) + unit(7 * t) * Real("0.5") + conj(unit(5 * t)) * Real("1.25");
  };
  check_close(periodic_trapezoid_mean(f, 16, ctx), Cx(3), eps, "deg<M/2 exact");

  // Degree M aliases down to the constant: mean of e^{i16\theta} over 16
  // nodes is 1, not 0, so exactness genuinely requires low degree.
  auto g = [](const Real& t) { return unit(16 * t); };
  check_close(periodic_trapezoid_mean(g, 16, ctx), Cx(1), eps, "deg=M aliases");

  auto auto_res = periodic_trapezoid_auto(
      [](const Real& t) { return Cx(exp(cos(t))); }, ctx, 32);
  CHECK(auto_res.converged);
  // Modified Bessel I_0(1), 41 digits.
  check_close(auto_res.value, Cx(Real("1.2660658777520083355982446252147175376077")),
              Real("1e-38"), "mean of exp(cos)");

  unsigned calls = 0;
  auto bad = [&calls](const Real&) {
    calls++;
    return calls == 8 ? Cx(Real(0) / Real(0)) : Cx(1);
  };
  CHECK_THROWS_WITH_AS(periodic_trapezoid_mean(bad, 16, ctx),
                       doctest::Contains("node index 7"), ValidationError);
}

TEST_CASE("segmented gauss handles kinks and delegates when empty") {
  PrecisionContext ctx(256);
  auto scope = ctx.activate();

  // Mean of |sin| over the circle is 2/pi; breakpoints at both kinks.
  auto f = [](const Real& t) { return Cx(abs(sin(t))); };
  std::vector<Real> bks = {-pi_val(), Real(0)};
  auto res = segmented_gauss_auto(f, bks, ctx);
  CHECK(res.converged);
  check_close(res.value, Cx(2 / pi_val()), Real("1e-70"), "mean |sin|");

  // Empty breakpoints fall back to the periodic rule.
  auto smooth = [](const Real& t) { return Cx(cos(t) * cos(t)); };
  auto res2 = segmented_gauss_auto(smooth, {}, ctx);
  CHECK(res2.converged);
  check_close(res2.value, Cx(Real("0.5")), Real("1e-70"), "mean cos^2");

  // Plain Gauss helper: integral of x^6 over [-1, 2] = (2^7 + 1)/7.
  auto mono = [](const Real& x) { return Cx(pow_i(Cx(x), 6)); };
  check_close(integrate_gauss(mono, Real(-1), Real(2), 16), Cx(Real(129) / 7), Real("1e-70"),
              "gauss cubic exactness");
}

TEST_CASE("bump plateau, midpoint, and derivative consistency") {
  PrecisionContext ctx(256);
  auto scope = ctx.activate();
  const Real l2 = log2_val();

  CHECK(bump(Real(0)) == 1);
  CHECK(bump(l2 / 2) == 1);
  CHECK(bump(l2 * Real("0.49")) == 1);
  CHECK(bump(l2) == 0);
  CHECK(bump(l2 * Real("1.7")) == 0);
  CHECK(bump(-l2 * 2) == 0);
  check_close(bump(3 * l2 / 4), Real("0.5"), Real("1e-70"), "glue midpoint");
  check_close(bump(-3 * l2 / 4), Real("0.5"), Real("1e-70"), "even symmetry");

  // Monotone decreasing across the transition band.
  Real prev(2);
  for (int i = 1; i < 20; i++) {
    Real l = l2 / 2 + (l2 / 2) * i / 20;
    Real b = bump(l);
    CHECK(b < prev);
    prev = b;
  }

  // Central finite difference validates the closed-form derivative.
  Real h = pow(Real(2), -80);
  for (double p : {0.6, 0.75, 0.9}) {
    Real l = l2 * p;
    Real fd = (bump(l + h) - bump(l - h)) / (2 * h);
    check_close(bump_deriv(l), fd, Real("1e-44"), "derivative vs FD");
    check_close(bump_deriv(-l), -fd, Real("1e-44"), "odd derivative");
  }
  CHECK(bump_deriv(l2 / 4) == 0);
  CHECK(bump_deriv(l2 * 2) == 0);
}

TEST_CASE("jet arithmetic reproduces analytic derivatives") {
  PrecisionContext ctx(256);
  auto scope = ctx.activate();
  Real eps = pow(Real(2), -230);

  Real t0("0.7");
  Jet t = Jet::variable(t0, 4);

  // f = exp(sin t): f' = cos t f, f'' = (cos^2 - sin) f,
  // f''' = (cos^3 - 3 sin cos - cos) f.
  Jet f = jexp(jsin(t));
  Real s = sin(t0), c = cos(t0), e = exp(s);
  check_close(f.deriv(0), e, eps, "f");
  check_close(f.deriv(1), c * e, eps, "f'");
  check_close(f.deriv(2), (c * c - s) * e, eps, "f''");
  check_close(f.deriv(3), (c * c * c - 3 * s * c - c) * e, eps, "f3");

  // g = log(2 + cos t): g' = -sin/(2+cos), g'' = (-cos(2+cos) - sin^2)/(2+cos)^2.
  Jet g = jlog(jcos(t) + Real(2));
  Real d = 2 + c;
  check_close(g.deriv(0), log(d), eps, "g");
  check_close(g.deriv(1), -s / d, eps, "g'");
  check_close(g.deriv(2), (-c * d - s * s) / (d * d), eps, "g''");

  // Quotient and integer power against closed forms.
  Jet q = jpow_int(t, 3) / (Real(1) + t * t);
  Real v = t0 * t0 * t0 / (1 + t0 * t0);
  check_close(q.deriv(0), v, eps, "q");
  Real qp = (3 * t0 * t0 * (1 + t0 * t0) - t0 * t0 * t0 * 2 * t0) / ((1 + t0 * t0) * (1 + t0 * t0));
  check_close(q.deriv(1), qp, eps, "q'");
}
