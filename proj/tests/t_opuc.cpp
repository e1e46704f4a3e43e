#include <doctest.h>

#include "opuclab/fourier.hpp"
#include "opuclab/opuc.hpp"
#include "opuclab/rhp.hpp"
#include "test_util.hpp"

using namespace opuclab;
using namespace opuclab::testutil;

namespace {

// Modified Bessel I_t(x) by its power series, summed to 80 digits. Gives an
// independent oracle for cosine-weight moments: mu~_t = (-1)^t I_t(A).
Real bessel_i(long t, const Real& x) {
  Real half = x / 2;
  Real term(1);
  for (long i = 1; i <= t; i++) term *= half / i;  // half^t / t!
  Real sum = term;
  Real h2 = half * half;
  for (long m = 1; m < 200; m++) {
    term *= h2 / (Real(m) * Real(t + m));
    sum += term;
    if (abs(term) < Real("1e-85") * abs(sum)) break;
  }
  return sum;
}

WeightSpec fixed_weight(PotentialV V) {
  return WeightSpec{std::move(V), WeightMode::Fixed, 1};
}

WeightSpec varying_weight(PotentialV V, long n) {
  return WeightSpec{std::move(V), WeightMode::Varying, n};
}

void compare_families(const OpucFamily& a, const OpucFamily& b, long n_max, const Real& tol) {
  for (long n = 0; n <= n_max; n++) {
    const OpucLevel& la = a.at(n);
    const OpucLevel& lb = b.at(n);
    Real csup(0);
    for (long j = 0; j <= n; j++) csup = fmax(csup, abs(la.c[j] - lb.c[j]));
    CHECK(csup <= tol);
    if (n >= 1) CHECK(abs(la.alpha - lb.alpha) <= tol);
    CHECK(abs(la.norm_sq_scaled - lb.norm_sq_scaled) <= tol * la.norm_sq_scaled);
  }
}

void check_gamma_alpha(const OpucFamily& fam, long n_max, const Real& tol) {
  for (long n = 1; n <= n_max; n++) {
    Real ratio = fam.at(n).norm_sq_scaled / fam.at(n - 1).norm_sq_scaled;
    Real rhs = 1 - norm_sq(fam.at(n).alpha);
    CHECK(abs(ratio - rhs) <= tol);
  }
}

void check_orthogonality(const OpucFamily& fam, const MomentTable& mom, long n_max,
                         const Real& tol) {
  for (long n = 1; n <= n_max; n++) {
    const std::vector<Cx>& c = fam.at(n).c;
    for (long m = 0; m < n; m++) {
      Cx ip(0);  // <pi_n, z^m> = sum_j c_j mu(m - n + j)
      for (long j = 0; j <= n; j++) ip += c[j] * mom.mu(m - n + j);
      CHECK(abs(ip) <= tol);
    }
  }
}

struct Mat2 {
  Cx a, b, c, d;
};

Mat2 to_mat(const MatrixM& m) { return {m.m11, m.m12, m.m21, m.m22}; }

Mat2 mul(const Mat2& x, const Mat2& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
          x.c * y.b + x.d * y.d};
}

Mat2 conj(const Mat2& m) { return {conj(m.a), conj(m.b), conj(m.c), conj(m.d)}; }

Mat2 inverse(const Mat2& m) {
  Cx dt = m.a * m.d - m.b * m.c;
  return {m.d / dt, -m.b / dt, -m.c / dt, m.a / dt};
}

Real max_entry_diff(const Mat2& x, const Mat2& y) {
  return fmax(fmax(abs(x.a - y.a), abs(x.b - y.b)), fmax(abs(x.c - y.c), abs(x.d - y.d)));
}

}  // namespace

TEST_CASE("trivial weight: moments, polynomials, normalization are exact") {
  PrecisionContext ctx;
  auto scope = ctx.activate();
  WeightSpec w = fixed_weight(PotentialV::zero());
  MomentTable mom = build_moments(w, 12, ctx);
  check_close(mom.V0(), Real(0), Real("1e-70"), "V0 of unit weight");
  check_close(mom.mu(0), Cx(1), Real("1e-70"), "mu_0");
  for (long t = 1; t <= 12; t++) {
    check_close(mom.mu(t), Cx(0), Real("1e-70"), "mu_t");
    check_close(mom.mu(-t), Cx(0), Real("1e-70"), "mu_-t");
  }
  CHECK_THROWS_AS((void)mom.mu(13), ValidationError);

  OpucFamily fam = levinson(mom, 12, w, ctx);
  for (long n = 0; n <= 12; n++) {
    const OpucLevel& lvl = fam.at(n);
    check_close(lvl.c[0], Cx(1), Real("1e-70"), "leading coefficient");
    for (long j = 1; j <= n; j++) check_close(lvl.c[j], Cx(0), Real("1e-70"), "lower coefficient");
    if (n >= 1) check_close(lvl.alpha, Cx(0), Real("1e-70"), "alpha");
    check_close(lvl.norm_sq_scaled, Real(1), Real("1e-70"), "norm");
    check_close(lvl.gamma_sq_scaled, Real(1), Real("1e-70"), "gamma^2");
  }

  OpucFamily gs = gram_schmidt_oracle(mom, 12, w, ctx);
  compare_families(fam, gs, 12, Real("1e-70"));
}

TEST_CASE("cosine weight moments match the Bessel series oracle") {
  PrecisionContext ctx;
  auto scope = ctx.activate();
  Real A("0.3");
  WeightSpec w = fixed_weight(PotentialV::cosine(A));
  MomentTable mom = build_moments(w, 10, ctx);
  check_close(mom.V0(), Real(0), Real("1e-60"), "cosine mean");
  for (long t = 0; t <= 10; t++) {
    Real want = bessel_i(t, A);
    if (t % 2 == 1) want = -want;
    check_close(mom.mu(t), Cx(want), Real("1e-60"), "mu_t vs Bessel");
    check_close(mom.mu(-t), Cx(want), Real("1e-60"), "mu_-t vs Bessel");
  }
}

TEST_CASE("levinson agrees with gram-schmidt across weight classes") {
  PrecisionContext ctx;
  auto scope = ctx.activate();
  Real tol("1e-20");

  SUBCASE("fixed cosine") {
    WeightSpec w = fixed_weight(PotentialV::cosine(Real("0.3")));
    MomentTable mom = build_moments(w, 24, ctx);
    OpucFamily lev = levinson(mom, 24, w, ctx);
    OpucFamily gs = gram_schmidt_oracle(mom, 24, w, ctx);
    compare_families(lev, gs, 24, tol);
    check_gamma_alpha(lev, 24, 10 * ctx.tol());
    check_orthogonality(lev, mom, 12, Real("1e-25"));
  }

  SUBCASE("fixed jump family") {
    WeightSpec w = fixed_weight(
        PotentialV::jump_family(3, 2, {Real(-4), Real(-2), Real(-3)}));
    MomentTable mom = build_moments(w, 24, ctx);
    // independent closed form for the mean of V when k = 2
    Real v0(0);
    for (const Real& wj : std::vector<Real>{Real(-4), Real(-2), Real(-3)})
      v0 -= Real(2) / 3 * log((sqrt(1 + exp(wj)) + 1) / 2);
    check_close(mom.V0(), v0, Real("1e-18"), "jump V0 closed form");

    OpucFamily lev = levinson(mom, 24, w, ctx);
    OpucFamily gs = gram_schmidt_oracle(mom, 24, w, ctx);
    compare_families(lev, gs, 24, tol);
    check_gamma_alpha(lev, 24, 10 * ctx.tol());
    check_orthogonality(lev, mom, 10, Real("1e-25"));
  }

  SUBCASE("varying cosine") {
    WeightSpec w = varying_weight(PotentialV::cosine(Real("0.2")), 16);
    MomentTable mom = build_moments(w, 16, ctx);
    OpucFamily lev = levinson(mom, 16, w, ctx);
    OpucFamily gs = gram_schmidt_oracle(mom, 16, w, ctx);
    compare_families(lev, gs, 16, tol);
    check_gamma_alpha(lev, 16, 10 * ctx.tol());
    for (long n = 0; n <= 16; n++) CHECK(gs.at(n).norm_sq_scaled > 0);
  }
}

TEST_CASE("precision gate rejects weights the mantissa cannot resolve") {
  PrecisionContext ctx;
  auto scope = ctx.activate();
  WeightSpec w = varying_weight(PotentialV::cosine(Real("0.2")), 3000);
  CHECK_THROWS_AS((void)build_moments(w, 4, ctx), PrecisionGateError);
  WeightSpec bad = varying_weight(PotentialV::cosine(Real("0.2")), 0);
  CHECK_THROWS_AS((void)build_moments(bad, 4, ctx), ValidationError);
  CHECK_THROWS_AS((void)build_moments(fixed_weight(PotentialV::zero()), -1, ctx),
                  ValidationError);
}

TEST_CASE("weight spec describes itself unambiguously") {
  WeightSpec f = fixed_weight(PotentialV::cosine(Real("0.3")));
  WeightSpec v = varying_weight(PotentialV::cosine(Real("0.3")), 8);
  CHECK(f.describe().rfind("fixed:", 0) == 0);
  CHECK(v.describe().rfind("varying[n=8]:", 0) == 0);
  CHECK(f.describe() != v.describe());
}

TEST_CASE("transform closed forms for the trivial weight") {
  PrecisionContext ctx;
  auto scope = ctx.activate();
  WeightSpec w = fixed_weight(PotentialV::zero());
  MomentTable mom = build_moments(w, 8, ctx);
  OpucFamily fam = levinson(mom, 8, w, ctx);
  Real tol("1e-18");

  // pinned point: n = 1, z = 2 gives [[2, 0], [-1, 1/2]]
  MatrixM m = assemble_M(fam, 1, Cx(2), ctx);
  check_close(m.m11, Cx(2), tol, "m11 at z=2");
  check_close(m.m12, Cx(0), tol, "m12 at z=2");
  check_close(m.m21, Cx(-1), tol, "m21 at z=2");
  check_close(m.m22, Cx(Real(1) / 2), tol, "m22 at z=2");

  // inside: [[z^n, 1], [-1, 0]]
  Cx zi(Real("0.4"), Real("0.2"));
  MatrixM mi = assemble_M(fam, 3, zi, ctx);
  check_close(mi.m11, zi * zi * zi, tol, "m11 inside");
  check_close(mi.m12, Cx(1), tol, "m12 inside");
  check_close(mi.m21, Cx(-1), tol, "m21 inside");
  check_close(mi.m22, Cx(0), tol, "m22 inside");

  // outside: [[z^n, 0], [-1, z^{-n}]]
  Cx zo(Real("1.7"), Real("-0.3"));
  MatrixM mo = assemble_M(fam, 3, zo, ctx);
  Cx zo3 = zo * zo * zo;
  check_close(mo.m11, zo3, tol, "m11 outside");
  check_close(mo.m12, Cx(0), tol, "m12 outside");
  check_close(mo.m21, Cx(-1), tol, "m21 outside");
  check_close(mo.m22, Cx(1) / zo3, tol, "m22 outside");

  CHECK_THROWS_AS((void)assemble_M(fam, 0, Cx(2), ctx), ValidationError);
  CHECK_THROWS_AS((void)assemble_M(fam, 1, unit(Real(1)), ctx), ValidationError);
}

TEST_CASE("transform determinant is one on both sides of the circle") {
  PrecisionContext ctx;
  auto scope = ctx.activate();
  WeightSpec w = fixed_weight(PotentialV::cosine(Real("0.3")));
  MomentTable mom = build_moments(w, 8, ctx);
  OpucFamily fam = levinson(mom, 8, w, ctx);
  Real tol = Real(1000) * ctx.tol();

  std::vector<Cx> pts = {polar(Real("0.3"), Real("0.7")), polar(Real("0.8"), Real("-2.1")),
                         polar(Real("1.9"), Real("2.0")), polar(Real("1.2"), Real("0.1")),
                         Cx(0), Cx(Real("0.05"), Real("-0.02"))};
  for (const Cx& z : pts) {
    MatrixM m = assemble_M(fam, 6, z, ctx);
    check_close(det(m), Cx(1), tol, "det M far");
  }
  // near-circle evaluation path (Taylor-subtracted transform)
  for (int side = -1; side <= 1; side += 2) {
    Cx z = polar(1 + Real(side) * Real("1e-7"), Real("0.9"));
    MatrixM m = assemble_M(fam, 6, z, ctx);
    check_close(det(m), Cx(1), Real("1e-17"), "det M near");
  }
}

TEST_CASE("reflection symmetry ties values inside and outside") {
  PrecisionContext ctx;
  auto scope = ctx.activate();
  WeightSpec w = fixed_weight(PotentialV::cosine(Real("0.3")));
  MomentTable mom = build_moments(w, 6, ctx);
  OpucFamily fam = levinson(mom, 6, w, ctx);

  Mat2 m0 = to_mat(assemble_M(fam, 5, Cx(0), ctx));
  Mat2 left = {Cx(0, 1), Cx(0), Cx(0), Cx(0, -1)};
  Mat2 pref = mul(left, inverse(conj(m0)));

  std::vector<Cx> pts;
  for (int i = 0; i < 8; i++) {
    Real theta = Real(2 * i + 1) * pi_val() / 8 - pi_val();
    pts.push_back(polar(Real("0.55") + Real("0.04") * i, theta));
    pts.push_back(polar(Real("1.45") + Real("0.05") * i, theta + Real("0.2")));
  }
  for (const Cx& z : pts) {
    Mat2 lhs = to_mat(assemble_M(fam, 5, z, ctx));
    Cx zr = Cx(1) / conj(z);
    Mat2 mr = conj(to_mat(assemble_M(fam, 5, zr, ctx)));
    // right factor diag(-i z^n, (-i z^n)^{-1}); the whole power of z rides
    // inside, which the n = 1 special case does not reveal
    Cx mizn = Cx(0, -1) * pow_i(z, 5);
    Mat2 right = {mizn, Cx(0), Cx(0), Cx(1) / mizn};
    Mat2 rhs = mul(mul(pref, mr), right);
    CHECK(max_entry_diff(lhs, rhs) <= Real(1000) * ctx.tol());
  }
}

TEST_CASE("boundary values satisfy the multiplicative jump") {
  PrecisionContext ctx;
  auto scope = ctx.activate();

  SUBCASE("trivial weight") {
    WeightSpec w = fixed_weight(PotentialV::zero());
    MomentTable mom = build_moments(w, 4, ctx);
    OpucFamily fam = levinson(mom, 4, w, ctx);
    CHECK(rhp_residual(fam, 4, Real("0.3"), ctx) <= Real("1e-17"));
  }

  SUBCASE("cosine weight") {
    WeightSpec w = fixed_weight(PotentialV::cosine(Real("0.3")));
    MomentTable mom = build_moments(w, 16, ctx);
    OpucFamily fam = levinson(mom, 16, w, ctx);
    for (long n : {1L, 4L, 16L}) {
      CHECK(rhp_residual(fam, n, Real("0.3"), ctx) <= Real("1e-15"));
      CHECK(rhp_residual(fam, n, Real("-2.1"), ctx) <= Real("1e-15"));
    }
  }

  SUBCASE("jump weight, probe between kinks") {
    WeightSpec w = fixed_weight(
        PotentialV::jump_family(3, 2, {Real(-4), Real(-2), Real(-3)}));
    MomentTable mom = build_moments(w, 8, ctx);
    OpucFamily fam = levinson(mom, 8, w, ctx);
    CHECK(rhp_residual(fam, 8, Real("1.0"), ctx) <= Real("1e-15"));
    // probing on a kink is refused
    Cx z = polar(1 - Real("1e-7"), Real("1e-5"));
    CHECK_THROWS_AS((void)assemble_M(fam, 8, z, ctx), ValidationError);
  }

  SUBCASE("varying weight") {
    WeightSpec w = varying_weight(PotentialV::cosine(Real("0.2")), 8);
    MomentTable mom = build_moments(w, 8, ctx);
    OpucFamily fam = levinson(mom, 8, w, ctx);
    CHECK(rhp_residual(fam, 8, Real("0.7"), ctx) <= Real("1e-15"));
  }
}
