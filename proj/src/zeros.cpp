#include "opuclab/zeros.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>

namespace opuclab {

namespace {

std::string real_str(const Real& x) {
  return x.str(Real::default_precision(), std::ios_base::scientific);
}

Cx horner(const std::vector<Cx>& c, const Cx& z) {
  Cx acc(0);
  for (const Cx& cj : c) acc = acc * z + cj;
  return acc;
}

// Synchronous Aberth sweeps on a monic polynomial with nonzero constant
// term. Returns per-root final Newton step sizes alongside the roots.
struct AberthResult {
  std::vector<Cx> roots;
  std::vector<Real> steps;
  bool converged;
};

AberthResult aberth(const std::vector<Cx>& c, const Real& tol) {
  const long m = static_cast<long>(c.size()) - 1;
  std::vector<Cx> d(m);
  for (long j = 0; j < m; j++) d[j] = c[j] * Real(m - j);

  // Geometric-mean radius with perturbed equal angles; the aperiodic
  // offset keeps conjugate-symmetric inputs from locking the sweep.
  Real R = pow(abs(c[m]), Real(1) / m);
  const Real pi = pi_val();
  AberthResult res;
  res.roots.resize(m);
  for (long i = 0; i < m; i++)
    res.roots[i] = polar(R, 2 * pi * Real(i) / m + pi / (2 * m) + Real(1) / (m + 3));
  res.steps.assign(m, Real(0));
  res.converged = false;

  const int cap = 500;
  std::vector<Cx> newton(m), next(m);
  // After the tol criterion is met, keep sweeping until the steps stagnate
  // at the precision floor, so downstream consumers see full-precision roots
  // rather than roots accurate only to tol.
  int polish_left = 6;
  Real prev_worst(0);
  bool has_prev = false;
  for (int sweep = 0; sweep < cap; sweep++) {
    Real worst(0);
    for (long i = 0; i < m; i++) {
      Cx p = horner(c, res.roots[i]);
      Cx dp = horner(d, res.roots[i]);
      newton[i] = (norm_sq(p) == 0) ? Cx(0) : (norm_sq(dp) == 0 ? p : p / dp);
      res.steps[i] = abs(newton[i]);
      if (res.steps[i] > worst) worst = res.steps[i];
    }
    if (worst < tol) {
      res.converged = true;
      if (worst == 0 || polish_left == 0 || (has_prev && worst >= prev_worst)) return res;
      polish_left--;
    }
    prev_worst = worst;
    has_prev = true;
    for (long i = 0; i < m; i++) {
      Cx S(0);
      for (long j = 0; j < m; j++) {
        if (j == i) continue;
        Cx diff = res.roots[i] - res.roots[j];
        if (norm_sq(diff) == 0) diff = Cx(tol * (i + 1), tol);  // collision nudge
        S += Cx(1) / diff;
      }
      Cx denom = Cx(1) - newton[i] * S;
      next[i] = res.roots[i] - (abs(denom) < tol * tol ? newton[i] : newton[i] / denom);
    }
    res.roots.swap(next);
  }
  return res;
}

// Single-linkage clusters at the given distance threshold.
std::vector<std::vector<std::size_t>> cluster(const std::vector<Cx>& pts, const Real& thresh) {
  const std::size_t m = pts.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < m; i++)
    for (std::size_t j = i + 1; j < m; j++)
      if (abs(pts[i] - pts[j]) < thresh) parent[find(i)] = find(j);
  std::vector<std::vector<std::size_t>> groups(m);
  for (std::size_t i = 0; i < m; i++) groups[find(i)].push_back(i);
  groups.erase(std::remove_if(groups.begin(), groups.end(),
                              [](const std::vector<std::size_t>& g) { return g.empty(); }),
               groups.end());
  return groups;
}

struct Givens {
  Real c;
  Cx s;
};

// G = [[c, s], [-conj(s), c]] with c real chosen so G (f, g)^T = (r, 0)^T.
Givens make_givens(const Cx& f, const Cx& g) {
  Real af = abs(f), ag = abs(g);
  if (ag == 0) return {Real(1), Cx(0)};
  if (af == 0) return {Real(0), conj(g) / ag};
  Real h = hypot(af, ag);
  return {af / h, (f / af) * conj(g) / h};
}

Cx wilkinson_shift(const Cx& a, const Cx& b, const Cx& c, const Cx& d) {
  Cx t = (a + d) / Real(2);
  Cx disc = sqrt(t * t - (a * d - b * c));
  Cx e1 = t + disc, e2 = t - disc;
  return abs(e1 - d) < abs(e2 - d) ? e1 : e2;
}

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5f", v);
  return buf;
}

void svg_circle(std::ostream& os, double r, const char* color, double width) {
  os << "  <circle cx=\"0\" cy=\"0\" r=\"" << svg_num(r) << "\" fill=\"none\" stroke=\"" << color
     << "\" stroke-width=\"" << svg_num(width) << "\"/>\n";
}

}  // namespace

long ZeroSet::total_count() const {
  long t = 0;
  for (const ZeroEntry& e : roots) t += e.multiplicity;
  return t;
}

ZeroSet find_zeros(const std::vector<Cx>& coeffs, const PrecisionContext& ctx) {
  const long n = static_cast<long>(coeffs.size()) - 1;
  if (n < 1) throw ValidationError("find_zeros: degree must be at least 1");
  if (abs(coeffs[0] - Cx(1)) > ctx.tol())
    throw ValidationError("find_zeros: leading coefficient must be 1");
  const Real tol = ctx.tol();

  // Exact roots at the origin come straight off the trailing zeros.
  long origin = 0;
  while (origin < n && coeffs[n - origin] == Cx(0)) origin++;
  const long m = n - origin;

  std::vector<Cx> flat;  // all roots, multiplicity expanded
  std::vector<Real> steps;
  bool converged = true;
  flat.assign(static_cast<std::size_t>(origin), Cx(0));
  steps.assign(static_cast<std::size_t>(origin), Real(0));
  if (m > 0) {
    std::vector<Cx> work(coeffs.begin(), coeffs.begin() + m + 1);
    AberthResult ab = aberth(work, tol);
    converged = ab.converged;
    flat.insert(flat.end(), ab.roots.begin(), ab.roots.end());
    steps.insert(steps.end(), ab.steps.begin(), ab.steps.end());
  }

  ZeroSet zs;
  zs.degree = n;
  for (const std::vector<std::size_t>& group : cluster(flat, 10 * tol)) {
    ZeroEntry e;
    Cx sum(0);
    for (std::size_t i : group) sum += flat[i];
    e.z = sum / Real(static_cast<long>(group.size()));
    e.multiplicity = static_cast<long>(group.size());
    e.residual = abs(horner(coeffs, e.z));
    e.converged = std::all_of(group.begin(), group.end(),
                              [&](std::size_t i) { return steps[i] < tol; });
    zs.roots.push_back(std::move(e));
  }
  std::sort(zs.roots.begin(), zs.roots.end(), [](const ZeroEntry& a, const ZeroEntry& b) {
    Real aa = arg(a.z), ab_ = arg(b.z);
    return aa != ab_ ? aa < ab_ : abs(a.z) < abs(b.z);
  });
  for (std::size_t i = 0; i < zs.roots.size(); i++)
    if (!zs.roots[i].converged) zs.unconverged.push_back(i);
  (void)converged;

  Cx e1(0), sum_sq(0);
  for (const ZeroEntry& e : zs.roots) {
    e1 += Real(e.multiplicity) * e.z;
    sum_sq += Real(e.multiplicity) * e.z * e.z;
  }
  zs.vieta1_err = abs(e1 + coeffs[1]);
  zs.vieta2_err = n >= 2 ? abs((e1 * e1 - sum_sq) / Real(2) - coeffs[2]) : Real(0);
  if (zs.all_converged()) {
    Real scale(1);
    for (const Cx& cj : coeffs)
      if (abs(cj) > scale) scale = abs(cj);
    if (zs.vieta1_err > 1000 * tol * scale || zs.vieta2_err > 1000 * tol * scale)
      throw ConvergenceError("find_zeros: Vieta identities violated, sum error " +
                             real_str(zs.vieta1_err) + ", pair error " +
                             real_str(zs.vieta2_err));
  }
  return zs;
}

std::vector<Cx> companion_zeros(const std::vector<Cx>& coeffs, const PrecisionContext& ctx) {
  const long m = static_cast<long>(coeffs.size()) - 1;
  if (m < 1) throw ValidationError("companion_zeros: degree must be at least 1");
  if (m > 32) throw ValidationError("companion_zeros: oracle capped at degree 32");
  if (abs(coeffs[0] - Cx(1)) > ctx.tol())
    throw ValidationError("companion_zeros: leading coefficient must be 1");

  std::vector<std::vector<Cx>> H(m, std::vector<Cx>(m, Cx(0)));
  for (long i = 0; i < m; i++) H[i][m - 1] = -coeffs[m - i];
  for (long i = 1; i < m; i++) H[i][i - 1] = Cx(1);

  // Deflate at the unit-roundoff scale of the working precision, not at the
  // coarser algorithmic tolerance, so eigenvalues carry full accuracy.
  const Real u = ldexp(Real(1), 8 - static_cast<long>(ctx.mantissa_bits));
  std::vector<Cx> eigs;
  long q = m;
  int sweeps = 0, since_deflate = 0;
  const int cap = 60 * static_cast<int>(m);
  while (q > 0) {
    if (q == 1) {
      eigs.push_back(H[0][0]);
      q = 0;
      continue;
    }
    if (abs(H[q - 1][q - 2]) <= u * (abs(H[q - 2][q - 2]) + abs(H[q - 1][q - 1]))) {
      eigs.push_back(H[q - 1][q - 1]);
      q--;
      since_deflate = 0;
      continue;
    }
    if (++sweeps > cap)
      throw ConvergenceError("companion_zeros: QR iteration stalled at block size " +
                             std::to_string(q));
    // Active window [p, q): split where a subdiagonal is negligible.
    long p = q - 1;
    while (p > 0 && abs(H[p][p - 1]) > u * (abs(H[p - 1][p - 1]) + abs(H[p][p]))) p--;
    Cx mu = wilkinson_shift(H[q - 2][q - 2], H[q - 2][q - 1], H[q - 1][q - 2], H[q - 1][q - 1]);
    if (++since_deflate % 20 == 0) mu = H[q - 1][q - 1] + Cx(abs(H[q - 1][q - 2]) * 3 / 2);

    for (long i = p; i < q; i++) H[i][i] -= mu;
    std::vector<Givens> rots;
    for (long i = p; i < q - 1; i++) {
      Givens g = make_givens(H[i][i], H[i + 1][i]);
      rots.push_back(g);
      for (long j = i; j < q; j++) {
        Cx a = H[i][j], b = H[i + 1][j];
        H[i][j] = g.c * a + g.s * b;
        H[i + 1][j] = g.c * b - conj(g.s) * a;
      }
    }
    for (long i = p; i < q - 1; i++) {
      const Givens& g = rots[static_cast<std::size_t>(i - p)];
      for (long r = p; r < q; r++) {
        Cx a = H[r][i], b = H[r][i + 1];
        H[r][i] = g.c * a + conj(g.s) * b;
        H[r][i + 1] = g.c * b - g.s * a;
      }
    }
    for (long i = p; i < q; i++) H[i][i] += mu;
  }
  return eigs;
}

std::vector<ZeroViolation> zero_free_verdict(const ZeroSet& zs, unsigned k, const Real& delta,
                                             long n, WeightMode mode,
                                             const SzegoEvaluator& sz) {
  if (n < 2) throw ValidationError("zero_free_verdict: n must be at least 2");
  Real limit = mode == WeightMode::Fixed ? Real(k) : Real(k) - 1;
  if (delta <= 0 || delta >= limit)
    throw ValidationError("zero_free_verdict: delta must lie in (0, " + real_str(limit) + ")");
  const Real L = log(Real(n)) / n;

  std::vector<ZeroViolation> out;
  for (std::size_t i = 0; i < zs.roots.size(); i++) {
    Real r = abs(zs.roots[i].z);
    if (r == 0) continue;
    Real bound;
    if (mode == WeightMode::Fixed) {
      bound = -(Real(k) - delta) * L;
    } else {
      Real kp = sz.kappa_prime(arg(zs.roots[i].z));
      if (kp <= 0) continue;  // corollary inapplicable at this angle
      bound = -((Real(k) - 1 - delta) / kp) * L;
    }
    Real margin = log(r) - bound;
    if (margin > 0) out.push_back(ZeroViolation{i, margin});
  }
  std::sort(out.begin(), out.end(),
            [](const ZeroViolation& a, const ZeroViolation& b) { return a.margin > b.margin; });
  return out;
}

std::vector<Cx> fn_zeros(const RationalFn& fn, const PrecisionContext& ctx) {
  std::vector<Cx> num = fn.numerator();
  Real scale(0);
  for (const Cx& c : num)
    if (abs(c) > scale) scale = abs(c);
  if (scale == 0) return {};
  std::size_t lead = 0;
  while (lead < num.size() && abs(num[lead]) <= ctx.tol() * scale) lead++;
  if (num.size() - lead < 2) return {};
  std::vector<Cx> monic(num.begin() + static_cast<long>(lead), num.end());
  Cx top = monic[0];
  for (Cx& c : monic) c /= top;
  monic[0] = Cx(1);
  ZeroSet zs = find_zeros(monic, ctx);
  std::vector<Cx> out;
  for (const ZeroEntry& e : zs.roots)
    for (long t = 0; t < e.multiplicity; t++) out.push_back(e.z);
  return out;
}

std::vector<SpuriousMatch> match_spurious(const ZeroSet& zs, const RationalFn& fn, unsigned k,
                                          long n, const PrecisionContext& ctx) {
  if (n < 2) throw ValidationError("match_spurious: n must be at least 2");
  const Real L = log(Real(n)) / n;
  const Real cutoff = 1 - (Real(k) + 1) * L - Real(5) / n;
  const Real radius = L / 2;

  std::vector<Cx> deep;
  for (const Cx& z : fn_zeros(fn, ctx))
    if (abs(z) <= cutoff) deep.push_back(z);

  struct Cand {
    std::size_t fi, pi;
    Real dist;
  };
  std::vector<Cand> cands;
  for (std::size_t fi = 0; fi < deep.size(); fi++)
    for (std::size_t pi = 0; pi < zs.roots.size(); pi++) {
      Real d = abs(deep[fi] - zs.roots[pi].z);
      if (d < radius) cands.push_back(Cand{fi, pi, d});
    }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return a.dist != b.dist ? a.dist < b.dist : (a.fi != b.fi ? a.fi < b.fi : a.pi < b.pi);
  });

  std::vector<bool> f_used(deep.size(), false), p_used(zs.roots.size(), false);
  std::vector<SpuriousMatch> out;
  for (const Cand& c : cands) {
    if (f_used[c.fi] || p_used[c.pi]) continue;
    f_used[c.fi] = true;
    p_used[c.pi] = true;
    out.push_back(SpuriousMatch{deep[c.fi], c.pi, c.dist, false});
  }
  // A match is ambiguous when any other in-radius candidate shared either
  // endpoint; rejected-by-conflict pairs are flagged, not silently dropped.
  for (SpuriousMatch& m : out) {
    long shared = 0;
    for (const Cand& c : cands)
      if (deep[c.fi] == m.fn_zero || c.pi == m.pi_index) shared++;
    m.ambiguous = shared > 1;
  }
  return out;
}

std::size_t ZeroClassification::classified_count() const {
  return near_circle.size() + spurious.size() + other.size();
}

ZeroClassification classify(const ZeroSet& zs, const RationalFn& fn, unsigned k, long n,
                            const Real& sigma, const Real& levelM, const SzegoEvaluator& sz,
                            const PrecisionContext& ctx) {
  if (n < 2) throw ValidationError("classify: n must be at least 2");
  if (sigma <= 0 || levelM <= 0) throw ValidationError("classify: sigma and M must be positive");
  const Real L = log(Real(n)) / n;
  const Real pi = pi_val();

  ZeroClassification cls;
  cls.sigma = sigma;
  cls.levelM = levelM;
  Real lo = -(Real(k) + 1) * L - sigma / n;
  Real hi = -(Real(k) - sigma) * L;
  cls.r_inner = exp(lo);
  cls.r_outer = exp(hi);
  cls.band_alpha = Real(0);
  cls.spurious = match_spurious(zs, fn, k, n, ctx);

  std::vector<bool> taken(zs.roots.size(), false);
  for (const SpuriousMatch& m : cls.spurious) taken[m.pi_index] = true;

  Real pole_gap(0);
  if (fn.ell() > 1) {
    pole_gap = Real(8);  // > any chord
    for (std::size_t a = 0; a < fn.pole_angles.size(); a++)
      for (std::size_t b = a + 1; b < fn.pole_angles.size(); b++) {
        Real d = abs(unit(fn.pole_angles[a]) - unit(fn.pole_angles[b]));
        if (d < pole_gap) pole_gap = d;
      }
  }

  for (std::size_t i = 0; i < zs.roots.size(); i++) {
    if (taken[i]) continue;
    const Cx& z = zs.roots[i].z;
    Real r = abs(z);
    bool in_annulus = false;
    if (r > 0) {
      Real logr = log(r);
      if (logr > hi) cls.violations.push_back(i);
      in_annulus = logr > lo && logr < hi;
    }
    if (!in_annulus) {
      cls.other.push_back(i);
      continue;
    }

    NearCircleZero nc;
    nc.index = i;
    nc.pole_angle = Real(0);
    Cx f = fn.eval(z);
    Real af = abs(f);
    Real theta = arg(z);
    if (af == 0 || log(af) < -levelM) {
      nc.f_class = -1;
      nc.mod_residual = Real(0);
      nc.arg_residual = Real(0);
    } else {
      Real lf = log(af);
      nc.f_class = lf > levelM ? 1 : 0;
      nc.mod_residual = r - (1 - (Real(k) + 1) * L + lf / n);
      Real pred = (-sz.Omega(theta) + arg(f) + pi) / n;
      Real d = theta - pred;
      Real period = 2 * pi / n;
      d -= period * floor(d / period + Real(1) / 2);
      nc.arg_residual = d;
      if (nc.f_class == 0) {
        Real band = abs(r - (1 - (Real(k) + 1) * L)) * n;
        if (band > cls.band_alpha) cls.band_alpha = band;
      }
      if (nc.f_class == 1) {
        Real nearest(8);
        for (const Real& a : fn.pole_angles) {
          Real d2 = abs(z - unit(a));
          if (d2 < nearest) {
            nearest = d2;
            nc.pole_angle = a;
          }
        }
        if (fn.ell() > 1 && nearest >= pole_gap / 2) cls.f_plus_components_disjoint = false;
      }
    }
    nc.gap_after = 2 * pi;  // filled in after the angular sort
    cls.near_circle.push_back(nc);
  }

  std::sort(cls.near_circle.begin(), cls.near_circle.end(),
            [&](const NearCircleZero& a, const NearCircleZero& b) {
              return arg(zs.roots[a.index].z) < arg(zs.roots[b.index].z);
            });
  const std::size_t c = cls.near_circle.size();
  for (std::size_t i = 0; c > 1 && i < c; i++) {
    Real a0 = arg(zs.roots[cls.near_circle[i].index].z);
    Real a1 = arg(zs.roots[cls.near_circle[(i + 1) % c].index].z);
    Real gap = a1 - a0;
    if (gap <= 0) gap += 2 * pi;
    cls.near_circle[i].gap_after = gap;
  }
  return cls;
}

void write_zero_csv(const ZeroSet& zs, const ZeroClassification& cls, std::ostream& os) {
  std::vector<std::string> label(zs.roots.size(), "other");
  std::vector<std::string> matched(zs.roots.size());
  for (const NearCircleZero& nc : cls.near_circle) {
    label[nc.index] = "near_circle";
    if (nc.f_class == 1) matched[nc.index] = real_str(nc.pole_angle);
  }
  for (const SpuriousMatch& m : cls.spurious) {
    label[m.pi_index] = "spurious";
    matched[m.pi_index] = real_str(m.fn_zero.re) + (m.fn_zero.im < 0 ? "-" : "+") +
                          real_str(abs(m.fn_zero.im)) + "i";
  }
  for (std::size_t i : cls.violations) label[i] = "violation";
  os << "re,im,abs,class,matched_pole_or_zero\n";
  for (std::size_t i = 0; i < zs.roots.size(); i++)
    os << real_str(zs.roots[i].z.re) << "," << real_str(zs.roots[i].z.im) << ","
       << real_str(abs(zs.roots[i].z)) << "," << label[i] << "," << matched[i] << "\n";
}

void write_zero_csv(const ZeroSet& zs, std::ostream& os) {
  os << "re,im,abs,class,matched_pole_or_zero\n";
  for (const ZeroEntry& e : zs.roots)
    os << real_str(e.z.re) << "," << real_str(e.z.im) << "," << real_str(abs(e.z)) << ",,\n";
}

void write_zero_svg(const ZeroSet& zs, const std::vector<Cx>& fn_zeros, unsigned k, long n,
                    const std::vector<Real>& pole_angles, std::ostream& os) {
  if (n < 2) throw ValidationError("write_zero_svg: n must be at least 2");
  const double L = static_cast<double>(log(Real(n)) / n);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.35 -1.35 2.7 2.7\" "
        "width=\"720\" height=\"720\">\n"
        "  <rect x=\"-1.35\" y=\"-1.35\" width=\"2.7\" height=\"2.7\" fill=\"#ffffff\"/>\n";
  svg_circle(os, 1.0, "#444444", 0.006);
  double r_attract = 1.0 - (k + 1) * L;
  double r_forbid = 1.0 - k * L;
  if (r_attract > 0) svg_circle(os, r_attract, "#1a8f1a", 0.005);
  if (r_forbid > 0) svg_circle(os, r_forbid, "#cc2222", 0.005);
  for (const Real& a : pole_angles) {
    double x = static_cast<double>(cos(a)), y = static_cast<double>(sin(a));
    os << "  <line x1=\"" << svg_num(0.97 * x) << "\" y1=\"" << svg_num(-0.97 * y) << "\" x2=\""
       << svg_num(1.03 * x) << "\" y2=\"" << svg_num(-1.03 * y)
       << "\" stroke=\"#444444\" stroke-width=\"0.006\"/>\n";
  }
  for (const Cx& z : fn_zeros)
    os << "  <circle cx=\"" << svg_num(static_cast<double>(z.re)) << "\" cy=\""
       << svg_num(-static_cast<double>(z.im)) << "\" r=\"0.022\" fill=\"#d2691e\"/>\n";
  for (const ZeroEntry& e : zs.roots)
    os << "  <circle cx=\"" << svg_num(static_cast<double>(e.z.re)) << "\" cy=\""
       << svg_num(-static_cast<double>(e.z.im)) << "\" r=\"0.009\" fill=\"#111111\"/>\n";
  os << "</svg>\n";
}

}  // namespace opuclab
