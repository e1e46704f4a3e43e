#include "opuclab/dbar.hpp"

#include <algorithm>
#include <ostream>
#include <string>
#include <utility>

#include "opuclab/bump.hpp"
#include "opuclab/fft.hpp"

namespace opuclab {

namespace {

Real real_pow_i(const Real& base, long e) {
  if (e == 0) return Real(1);
  long a = e < 0 ? -e : e;
  Real acc(1), b = base;
  while (a > 0) {
    if (a & 1) acc *= b;
    b *= b;
    a >>= 1;
  }
  if (e < 0) return Real(1) / acc;
  return acc;
}

std::string real_str(const Real& x) {
  return x.str(Real::default_precision(), std::ios_base::scientific);
}

long round_up_pow2(long v) {
  long p = 1;
  while (p < v) p <<= 1;
  return p;
}

}  // namespace

AnnulusGrid::AnnulusGrid(const Real& eps, long radial, long angular) : epsilon(eps) {
  if (!(eps > 0)) throw ValidationError("annulus grid needs epsilon > 0");
  if (radial < 2 || radial % 2 != 0)
    throw ValidationError("radial_cells must be even and >= 2, got " + std::to_string(radial));
  if (angular < 4 || !is_pow2(static_cast<std::size_t>(angular)))
    throw ValidationError("angular_cells must be a power of two >= 4, got " +
                          std::to_string(angular));
  radial_cells = radial;
  angular_cells = angular;
  Real L = eps * log2_val();
  log_edges.resize(radial + 1);
  edge_r.resize(radial + 1);
  centers_logr.resize(radial);
  centers_r.resize(radial);
  for (long i = 0; i <= radial; ++i) {
    log_edges[i] = L * Real(2 * i - radial) / Real(radial);
    edge_r[i] = exp(log_edges[i]);
  }
  for (long i = 0; i < radial; ++i) {
    centers_logr[i] = L * Real(2 * i + 1 - radial) / Real(radial);
    centers_r[i] = exp(centers_logr[i]);
  }
  centers_theta.resize(angular);
  for (long j = 0; j < angular; ++j)
    centers_theta[j] = pi_val() * Real(2 * j + 1 - angular) / Real(angular);
}

AnnulusGrid AnnulusGrid::standard(const Real& eps, long n) {
  if (n < 1) throw ValidationError("grid sizing needs n >= 1");
  if (n > 64)
    throw ValidationError("grid sizing gate: default sizing is tuned for n <= 64, got n = " +
                          std::to_string(n) + "; construct an explicit grid to go further");
  long radial = std::max<long>(64, 4 * n);
  long angular = std::max<long>(256, round_up_pow2(8 * n));
  return AnnulusGrid(eps, radial, angular);
}

Real AnnulusGrid::dtheta() const { return centers_theta[1] - centers_theta[0]; }

Real AnnulusGrid::cell_area(long i) const {
  return dtheta() * (edge_r[i + 1] * edge_r[i + 1] - edge_r[i] * edge_r[i]) / 2;
}

Real AnnulusGrid::total_area() const {
  Real rmax = edge_r[radial_cells], rmin = edge_r[0];
  return pi_val() * (rmax * rmax - rmin * rmin);
}

bool AnnulusGrid::locate(const Cx& z, long& i, long& j) const {
  Real r2 = norm_sq(z);
  if (!(r2 > 0)) return false;
  Real l = log(r2) / 2;
  Real L = log_edges[radial_cells];
  if (!(l > -L) || !(l < L)) return false;
  Real fi = (l + L) / dlog();
  i = static_cast<long>(fi.convert_to<double>());
  i = std::min(std::max<long>(i, 0), radial_cells - 1);
  Real theta = arg(z);
  Real fj = (theta + pi_val()) / dtheta();
  j = static_cast<long>(fj.convert_to<double>());
  j = std::min(std::max<long>(j, 0), angular_cells - 1);
  return true;
}

Real KernelField::sup_entry() const {
  Real best(0);
  for (const Cx& e : entry) {
    Real v = norm_sq(e);
    if (v > best) best = v;
  }
  return sqrt(best);
}

GridField GridField::zero(const AnnulusGrid& g) {
  GridField f;
  f.radial = g.radial_cells;
  f.angular = g.angular_cells;
  f.e11.assign(g.cells(), Cx(0));
  f.e12.assign(g.cells(), Cx(0));
  f.e21.assign(g.cells(), Cx(0));
  f.e22.assign(g.cells(), Cx(0));
  return f;
}

GridField GridField::identity(const AnnulusGrid& g) {
  GridField f = zero(g);
  std::fill(f.e11.begin(), f.e11.end(), Cx(1));
  std::fill(f.e22.begin(), f.e22.end(), Cx(1));
  return f;
}

GridField& GridField::operator+=(const GridField& o) {
  if (radial != o.radial || angular != o.angular)
    throw ValidationError("grid field shapes differ");
  for (std::size_t t = 0; t < e11.size(); ++t) {
    e11[t] += o.e11[t];
    e12[t] += o.e12[t];
    e21[t] += o.e21[t];
    e22[t] += o.e22[t];
  }
  return *this;
}

Real GridField::sup_norm() const {
  Real best(0);
  for (const auto* plane : {&e11, &e12, &e21, &e22})
    for (const Cx& v : *plane) {
      Real m = norm_sq(v);
      if (m > best) best = m;
    }
  return sqrt(best);
}

Real sup_det_deviation(const GridField& f) {
  Real best(0);
  for (std::size_t t = 0; t < f.e11.size(); ++t) {
    Cx d = f.e11[t] * f.e22[t] - f.e12[t] * f.e21[t] - Cx(1);
    Real m = norm_sq(d);
    if (m > best) best = m;
  }
  return sqrt(best);
}

KernelField build_kernel_field(const WeightSpec& w, const SzegoEvaluator& sz, long n, long m,
                               const Real& epsilon, const AnnulusGrid& grid,
                               const PrecisionContext& ctx) {
  if (n < 1) throw ValidationError("kernel field needs n >= 1");
  if (grid.epsilon != epsilon)
    throw ValidationError("grid was built for a different epsilon than the kernel field");
  int k = w.potential.smoothness_k();
  bool fixed = (w.mode == WeightMode::Fixed);
  if (fixed) {
    if (m < 1 || m > k)
      throw ValidationError("fixed-weight kernel needs 1 <= m <= k = " + std::to_string(k) +
                            ", got m = " + std::to_string(m));
  } else {
    if (m < 2 || m > k)
      throw ValidationError("varying-weight kernel needs 2 <= m <= k = " + std::to_string(k) +
                            ", got m = " + std::to_string(m));
    if (w.n_weight != n)
      throw ValidationError("varying-weight kernel degree n must equal the weight's n");
    KappaPrimeMin kp = kappa_prime_min(sz, w.potential.jump_angles());
    if (!(kp.value > 0))
      throw ValidationError("varying-weight transport refused: min kappa' = " +
                            real_str(kp.value) + " at theta = " + real_str(kp.argmin) +
                            " is not positive");
  }
  auto scope = ctx.activate();

  const long R = grid.radial_cells, A = grid.angular_cells;
  KernelField field{fixed ? KernelKind::WFixed : KernelKind::XVarying, n, m, epsilon, grid, {}};
  field.entry.assign(grid.cells(), Cx(0));

  Real theta0 = grid.theta0(), dth = grid.dtheta();

  // Angle-only data, shared by every ring.
  std::vector<Cx> unit_theta(A), phase_n(A);
  {
    Cx u = unit(theta0), du = unit(dth);
    Cx p = unit(Real(n) * theta0), dp = unit(Real(n) * dth);
    for (long j = 0; j < A; ++j) {
      unit_theta[j] = u;
      phase_n[j] = p;
      u *= du;
      p *= dp;
    }
  }
  std::vector<std::vector<Cx>> derivs(A, std::vector<Cx>(m + 1));
  if (fixed) {
    for (long j = 0; j < A; ++j) {
      Jet jv = w.potential.jet(grid.centers_theta[j], static_cast<unsigned>(m));
      for (long p = 0; p <= m; ++p) derivs[j][p] = Cx(jv.deriv(static_cast<unsigned>(p)));
    }
  } else {
    for (long p = 0; p <= m; ++p) {
      std::vector<Real> om =
          sz.Omega_deriv_ring(static_cast<unsigned>(p), static_cast<std::size_t>(A), theta0);
      for (long j = 0; j < A; ++j) derivs[j][p] = Cx(om[j]);
    }
  }

  Real V0 = sz.table().V0;
  for (long i = 0; i < R; ++i) {
    const Real& r = grid.centers_r[i];
    const Real& l = grid.centers_logr[i];
    bool inner = grid.inner_ring(i);
    Real B = bump(l / epsilon);
    Real Bp = bump_deriv(l / epsilon);
    if (B == 0 && Bp == 0) continue;
    Real dbfac = Bp / (2 * r * epsilon);
    Real rn = real_pow_i(r, n);

    std::vector<Cx> sfac;
    if (fixed) {
      if (inner) {
        std::vector<Cx> nb = sz.N_inside_ring(r, static_cast<std::size_t>(A), theta0);
        sfac.resize(A);
        for (long j = 0; j < A; ++j) sfac[j] = exp(Cx(Real(-2) * V0) - Real(2) * nb[j]);
      } else {
        std::vector<Cx> no = sz.N_outside_ring(r, static_cast<std::size_t>(A), theta0);
        sfac.resize(A);
        for (long j = 0; j < A; ++j) sfac[j] = exp(Real(-2) * no[j]);
      }
    }

    for (long j = 0; j < A; ++j) {
      ExtensionSample ext =
          extend_em(derivs[j], static_cast<unsigned>(m), r, grid.centers_theta[j]);
      Cx dbarB = dbfac * unit_theta[j];
      Cx val;
      if (fixed) {
        Cx paren = dbarB + B * ext.dbar;
        Cx zn = inner ? rn * phase_n[j] : conj(phase_n[j]) / rn;
        val = zn * sfac[j] * exp(ext.value) * paren;
      } else {
        Cx inE = Cx(0, Real(n)) * ext.value;
        Cx indbar = Cx(0, Real(n)) * (B * ext.dbar);
        if (inner)
          val = (rn * phase_n[j]) * exp(inE) * (dbarB + indbar);
        else
          val = (conj(phase_n[j]) / rn) * exp(-inE) * (dbarB - indbar);
      }
      field.entry[grid.index(i, j)] = val;
    }
  }
  return field;
}

namespace {

// integral over the cell (rectangle model) of dA' / (z' - z) for z inside,
// in local polar coordinates about z: int e^{-i phi} s_exit(phi) dphi,
// split at the four corner directions.
Cx singular_cell_integral(const AnnulusGrid& g, long i, long j, const Cx& z) {
  Real rc = g.centers_r[i], tc = g.centers_theta[j];
  Real a = (g.edge_r[i + 1] - g.edge_r[i]) / 2;
  Real b = rc * g.dtheta() / 2;
  Cx u = unit(tc);
  Cx d = conj(u) * (z - polar(rc, tc));
  Real xi = d.re, eta = d.im;
  // curvature can push z marginally outside the rectangle model; clamp.
  Real amax = a * Real("0.999999"), bmax = b * Real("0.999999");
  if (xi > amax) xi = amax;
  if (xi < -amax) xi = -amax;
  if (eta > bmax) eta = bmax;
  if (eta < -bmax) eta = -bmax;

  Real corners[4];
  corners[0] = atan2(b - eta, a - xi);
  corners[1] = atan2(b - eta, -a - xi);
  corners[2] = atan2(-b - eta, -a - xi);
  corners[3] = atan2(-b - eta, a - xi);
  std::sort(corners, corners + 4);

  const GaussRule& rule = gauss_legendre(16);
  Cx acc(0);
  for (int arc = 0; arc < 4; ++arc) {
    Real p1 = corners[arc];
    Real p2 = arc == 3 ? corners[0] + 2 * pi_val() : corners[arc + 1];
    if (!(p2 > p1)) continue;
    Real half = (p2 - p1) / 2, mid = (p2 + p1) / 2;
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      Real psi = mid + half * rule.x[q];
      Real c = cos(psi), s = sin(psi);
      Real t(0);
      bool set = false;
      auto consider = [&](const Real& cand) {
        if (!set || cand < t) {
          t = cand;
          set = true;
        }
      };
      if (c > 0) consider((a - xi) / c);
      if (c < 0) consider((-a - xi) / c);
      if (s > 0) consider((b - eta) / s);
      if (s < 0) consider((-b - eta) / s);
      if (!set) continue;
      // e^{-i(psi + tc)} s_exit
      acc += (half * rule.w[q] * t) * conj(unit(psi + tc));
    }
  }
  return acc;
}

// 4x4 subdivision of one cell (exact sub-areas), kernel sampled at the
// sub-centers.
Cx refined_cell_integral(const AnnulusGrid& g, long i, long j, const Cx& z) {
  Real l_lo = g.log_edges[i], l_hi = g.log_edges[i + 1];
  Real th_lo = g.centers_theta[j] - g.dtheta() / 2;
  Real dsub = g.dtheta() / 4;
  Cx acc(0);
  for (int a = 0; a < 4; ++a) {
    Real la = l_lo + (l_hi - l_lo) * Real(a) / 4;
    Real lb = l_lo + (l_hi - l_lo) * Real(a + 1) / 4;
    Real ra = exp(la), rb = exp(lb);
    Real rmid = exp((la + lb) / 2);
    Real subarea = dsub * (rb * rb - ra * ra) / 2;
    for (int c = 0; c < 4; ++c) {
      Real th = th_lo + dsub * (Real(c) + Real(1) / 2);
      acc += subarea / (polar(rmid, th) - z);
    }
  }
  return acc;
}

}  // namespace

MatrixM cauchy_apply(const KernelField& field, const GridField& F, const Cx& z) {
  const AnnulusGrid& g = field.grid;
  if (F.radial != g.radial_cells || F.angular != g.angular_cells)
    throw ValidationError("grid field shape does not match the kernel field's grid");
  const long R = g.radial_cells, A = g.angular_cells;

  long si = -1, sj = -1;
  g.locate(z, si, sj);

  std::vector<Cx> unit_theta(A);
  {
    Cx u = unit(g.theta0()), du = unit(g.dtheta());
    for (long j = 0; j < A; ++j) {
      unit_theta[j] = u;
      u *= du;
    }
  }

  Cx a11(0), a12(0), a21(0), a22(0);
  for (long i = 0; i < R; ++i) {
    const Real& r = g.centers_r[i];
    bool inner = g.inner_ring(i);
    Real area = g.cell_area(i);
    Real scale = g.edge_r[i + 1] - g.edge_r[i];
    Real ang_scale = r * g.dtheta();
    if (ang_scale > scale) scale = ang_scale;
    Real refine2 = 9 * scale * scale;
    for (long j = 0; j < A; ++j) {
      const Cx& w = field.entry[g.index(i, j)];
      if (w.re == 0 && w.im == 0) continue;
      Cx center = r * unit_theta[j];
      Cx kfac;
      if (i == si && j == sj)
        kfac = singular_cell_integral(g, i, j, z);
      else if (norm_sq(center - z) < refine2)
        kfac = refined_cell_integral(g, i, j, z);
      else
        kfac = area / (center - z);
      Cx gw = w * kfac;
      long t = F.index(i, j);
      if (inner) {
        a12 += F.e11[t] * gw;
        a22 += F.e21[t] * gw;
      } else {
        a11 += F.e12[t] * gw;
        a21 += F.e22[t] * gw;
      }
    }
  }
  Real s = Real(-1) / pi_val();
  return {s * a11, s * a12, s * a21, s * a22};
}

namespace {

// One scalar solid-Cauchy transport over the grid: source plane g (cell
// samples), result at every cell center. Per ring the angular dependence
// becomes Fourier modes; each mode moves radially with the exact power
// integrals of the piecewise-constant density:
//   q >= 1 pulls from rings outside the target, q <= 0 from rings inside,
// and the target's own ring splits at its center radius. Used with the
// field's triangular structure there are at most two active planes per
// application.
struct SpectralScratch {
  const AnnulusGrid* g = nullptr;
  std::vector<Cx> fwd_phase, out_phase;  // e^{-i q theta0}, e^{i (q-1) theta0}
  std::vector<Real> inv_edge, inv_center;

  void init(const AnnulusGrid& grid) {
    g = &grid;
    const long R = grid.radial_cells, A = grid.angular_cells;
    fwd_phase.resize(A);
    out_phase.resize(A);
    Cx step = unit(grid.theta0());
    Cx pf = unit(Real(A / 2) * grid.theta0());        // q = -A/2 -> e^{-i q theta0}
    Cx po = unit(Real(-A / 2 - 1) * grid.theta0());   // p = q-1 at q = -A/2
    for (long t = 0; t < A; ++t) {
      fwd_phase[t] = pf;
      out_phase[t] = po;
      pf = pf * conj(step);
      po = po * step;
    }
    inv_edge.resize(R + 1);
    inv_center.resize(R);
    for (long e = 0; e <= R; ++e) inv_edge[e] = Real(1) / grid.edge_r[e];
    for (long t = 0; t < R; ++t) inv_center[t] = Real(1) / grid.centers_r[t];
  }
};

struct ScalarSource {
  bool active = false;
  std::vector<std::vector<Cx>> modes;  // per ring, empty when unsupported
};

// forward FFT of the supported rings of one scalar plane
ScalarSource make_source(const AnnulusGrid& g, const SpectralScratch& sc,
                         const std::vector<Cx>& plane, bool want_inner) {
  const long R = g.radial_cells, A = g.angular_cells;
  ScalarSource src;
  src.modes.resize(R);
  for (long i = 0; i < R; ++i) {
    if (g.inner_ring(i) != want_inner) continue;
    bool nonzero = false;
    for (long j = 0; j < A; ++j) {
      const Cx& v = plane[i * A + j];
      if (v.re != 0 || v.im != 0) {
        nonzero = true;
        break;
      }
    }
    if (!nonzero) continue;
    src.active = true;
    std::vector<Cx> row(plane.begin() + i * A, plane.begin() + (i + 1) * A);
    fft_pow2(row, false);
    // b_q = (1/A) c_{q mod A} e^{-i q theta0}, stored at index q + A/2
    std::vector<Cx> b(A);
    for (long t = 0; t < A; ++t) {
      long q = t - A / 2;
      long k = ((q % A) + A) % A;
      b[t] = row[k] * sc.fwd_phase[t] / Real(A);
    }
    src.modes[i] = std::move(b);
  }
  return src;
}

void spectral_transport(const AnnulusGrid& g, const SpectralScratch& sc,
                        const std::vector<ScalarSource*>& srcs,
                        const std::vector<std::vector<Cx>*>& outs) {
  const long R = g.radial_cells, A = g.angular_cells;
  const Real dl = g.dlog();
  Real two_pi = 2 * pi_val();

  std::size_t nf = srcs.size();
  std::vector<std::vector<Cx>> spec(nf);
  for (std::size_t f = 0; f < nf; ++f)
    if (srcs[f]->active) spec[f].assign(static_cast<std::size_t>(R) * A, Cx(0));

  // radial power tables, updated incrementally in q
  std::vector<Real> pe(R + 1), pc(R), powfac(R);
  for (long e = 0; e <= R; ++e) pe[e] = real_pow_i(g.edge_r[e], 2 + A / 2);
  for (long t = 0; t < R; ++t) {
    pc[t] = real_pow_i(g.centers_r[t], 2 + A / 2);
    powfac[t] = real_pow_i(g.centers_r[t], -A / 2 - 1);
  }

  std::vector<Real> afull(R), ain(R), aout(R);
  for (long qi = 0; qi < A; ++qi) {
    long q = qi - A / 2;
    if (q == 2) {
      for (long t = 0; t < R; ++t) {
        afull[t] = dl;
        ain[t] = dl / 2;
        aout[t] = dl / 2;
      }
    } else {
      Real den = Real(2 - q);
      for (long t = 0; t < R; ++t) {
        afull[t] = (pe[t + 1] - pe[t]) / den;
        ain[t] = (pc[t] - pe[t]) / den;
        aout[t] = (pe[t + 1] - pc[t]) / den;
      }
    }

    for (std::size_t f = 0; f < nf; ++f) {
      if (!srcs[f]->active) continue;
      const auto& modes = srcs[f]->modes;
      Cx* sp = spec[f].data();
      if (q <= 0) {
        Cx run(0);
        for (long t = 0; t < R; ++t) {
          Cx val = run;
          if (!modes[t].empty()) val += modes[t][qi] * ain[t];
          sp[t * A + qi] = (-two_pi * powfac[t]) * val;
          if (!modes[t].empty()) run += modes[t][qi] * afull[t];
        }
      } else {
        Cx run(0);
        for (long t = R - 1; t >= 0; --t) {
          Cx val = run;
          if (!modes[t].empty()) val += modes[t][qi] * aout[t];
          sp[t * A + qi] = (two_pi * powfac[t]) * val;
          if (!modes[t].empty()) run += modes[t][qi] * afull[t];
        }
      }
    }

    if (qi + 1 < A) {
      for (long e = 0; e <= R; ++e) pe[e] *= sc.inv_edge[e];
      for (long t = 0; t < R; ++t) {
        pc[t] *= sc.inv_center[t];
        powfac[t] *= g.centers_r[t];
      }
    }
  }

  // assemble output angles ring by ring: v(theta_j) = sum_q spec_q e^{i(q-1)theta_j}
  Real scale = Real(-A) / pi_val();  // A * ifft, then -(1/pi)
  std::vector<Cx> w(A);
  for (std::size_t f = 0; f < nf; ++f) {
    if (!srcs[f]->active) {
      std::fill(outs[f]->begin(), outs[f]->end(), Cx(0));
      continue;
    }
    for (long t = 0; t < R; ++t) {
      std::fill(w.begin(), w.end(), Cx(0));
      for (long qi = 0; qi < A; ++qi) {
        long p = qi - A / 2 - 1;  // output mode q - 1
        long k = ((p % A) + A) % A;
        w[k] += spec[f][t * A + qi] * sc.out_phase[qi];
      }
      fft_pow2(w, true);
      for (long j = 0; j < A; ++j) (*outs[f])[t * A + j] = scale * w[j];
    }
  }
}

}  // namespace

GridField cauchy_apply_grid(const KernelField& field, const GridField& F) {
  const AnnulusGrid& g = field.grid;
  if (F.radial != g.radial_cells || F.angular != g.angular_cells)
    throw ValidationError("grid field shape does not match the kernel field's grid");
  const long R = g.radial_cells, A = g.angular_cells;

  // integrand planes G = F * K: inner rings populate columns (12, 22),
  // outer rings columns (11, 21)
  GridField G = GridField::zero(g);
  for (long i = 0; i < R; ++i) {
    bool inner = g.inner_ring(i);
    for (long j = 0; j < A; ++j) {
      long t = i * A + j;
      const Cx& w = field.entry[t];
      if (w.re == 0 && w.im == 0) continue;
      if (inner) {
        G.e12[t] = F.e11[t] * w;
        G.e22[t] = F.e21[t] * w;
      } else {
        G.e11[t] = F.e12[t] * w;
        G.e21[t] = F.e22[t] * w;
      }
    }
  }

  SpectralScratch sc;
  sc.init(g);
  ScalarSource s11 = make_source(g, sc, G.e11, false);
  ScalarSource s12 = make_source(g, sc, G.e12, true);
  ScalarSource s21 = make_source(g, sc, G.e21, false);
  ScalarSource s22 = make_source(g, sc, G.e22, true);

  GridField out = GridField::zero(g);
  spectral_transport(g, sc, {&s11, &s12, &s21, &s22},
                     {&out.e11, &out.e12, &out.e21, &out.e22});
  return out;
}

DbarSolution neumann_solve(const KernelField& field, const PrecisionContext& ctx,
                           long max_terms) {
  if (max_terms < 2) throw ValidationError("neumann_solve needs max_terms >= 2");
  auto scope = ctx.activate();
  DbarSolution sol{field, GridField::identity(field.grid), {}};
  GridField term = GridField::identity(field.grid);
  Real tol = ctx.tol();
  long nondecreasing = 0;
  Real prev(0);
  for (long k = 1; k <= max_terms; ++k) {
    term = cauchy_apply_grid(field, term);
    Real s = term.sup_norm();
    sol.neumann_terms.push_back(s);
    if (k == 1) {
      if (s == 0) return sol;
      if (s >= Real(1) / 2)
        throw ConvergenceError("first Neumann term has sup norm " + real_str(s) +
                               " >= 1/2; contraction not established");
    }
    if (k == 2 && s >= prev)
      throw ConvergenceError("operator norm estimate from the first two terms is " +
                             real_str(s / prev) + " >= 1; series diverges");
    sol.samples += term;
    if (k >= 2) {
      if (s >= prev) {
        if (++nondecreasing >= 3) {
          std::string hist;
          for (const Real& h : sol.neumann_terms) hist += " " + real_str(h);
          throw ConvergenceError(
              "Neumann term sup norms failed to decrease three times in a row:" + hist);
        }
      } else {
        nondecreasing = 0;
      }
    }
    prev = s;
    if (s <= tol) return sol;
  }
  throw ConvergenceError("Neumann series did not reach tolerance " + real_str(tol) +
                         " within " + std::to_string(max_terms) + " terms; last term " +
                         real_str(prev));
}

MatrixM DbarSolution::offgrid(const Cx& z) const {
  MatrixM r = cauchy_apply(field, samples, z);
  r.m11 += Cx(1);
  r.m22 += Cx(1);
  return r;
}

void write_norm_history(const DbarSolution& sol, std::ostream& os) {
  os << "term_index,sup_norm\n";
  for (std::size_t k = 0; k < sol.neumann_terms.size(); ++k)
    os << (k + 1) << "," << real_str(sol.neumann_terms[k]) << "\n";
}

void dump_grid_json(const DbarSolution& sol, std::ostream& os, long stride) {
  if (stride < 1) throw ValidationError("grid dump stride must be >= 1");
  const AnnulusGrid& g = sol.grid();
  os << "{\n";
  os << "  \"kind\": \"" << (sol.field.kind == KernelKind::WFixed ? "w_fixed" : "x_varying")
     << "\",\n";
  os << "  \"n\": " << sol.field.n << ",\n";
  os << "  \"m\": " << sol.field.m << ",\n";
  os << "  \"epsilon\": \"" << real_str(sol.field.epsilon) << "\",\n";
  os << "  \"radial_cells\": " << g.radial_cells << ",\n";
  os << "  \"angular_cells\": " << g.angular_cells << ",\n";
  os << "  \"stride\": " << stride << ",\n";
  os << "  \"neumann_terms\": [";
  for (std::size_t k = 0; k < sol.neumann_terms.size(); ++k)
    os << (k == 0 ? "" : ", ") << "\"" << real_str(sol.neumann_terms[k]) << "\"";
  os << "],\n";
  os << "  \"cells\": [\n";
  bool first = true;
  for (long i = 0; i < g.radial_cells; i += stride)
    for (long j = 0; j < g.angular_cells; j += stride) {
      if (!first) os << ",\n";
      first = false;
      MatrixM h = sol.samples.at(i, j);
      auto pair = [](const Cx& v) {
        return "[\"" + real_str(v.re) + "\", \"" + real_str(v.im) + "\"]";
      };
      os << "    {\"i\": " << i << ", \"j\": " << j << ", \"r\": \"" << real_str(g.centers_r[i])
         << "\", \"theta\": \"" << real_str(g.centers_theta[j]) << "\", \"h11\": "
         << pair(h.m11) << ", \"h12\": " << pair(h.m12) << ", \"h21\": " << pair(h.m21)
         << ", \"h22\": " << pair(h.m22) << "}";
    }
  os << "\n  ]\n}\n";
}

namespace {

// complete elliptic integral of the first kind via the arithmetic-geometric
// mean, parameterized by the complementary modulus k'.
Real elliptic_K_from_kprime(const Real& kprime) {
  Real a(1), b = kprime;
  for (int it = 0; it < 64; ++it) {
    Real an = (a + b) / 2;
    Real bn = sqrt(a * b);
    if (abs(a - b) <= a * Real("1e-75")) break;
    a = an;
    b = bn;
  }
  return pi_val() / (2 * a);
}

// int_0^{2 pi} dpsi / |r' e^{i psi} - r e^{i t}| = 4 K(k) / (r + r'),
// k'^2 = (r - r')^2 / (r + r')^2.
Real angular_distance_integral(const Real& rp, const Real& rz) {
  Real kprime = abs(rz - rp) / (rz + rp);
  return 4 * elliptic_K_from_kprime(kprime) / (rz + rp);
}

// panels graded geometrically toward both endpoints of [a, b]
void graded_panels(const Real& a, const Real& b, int depth, std::vector<Real>& edges) {
  Real gap = b - a;
  if (!(gap > 0)) return;
  edges.push_back(a);
  Real f = ldexp(Real(1), -depth);
  for (int t = depth; t >= 1; --t) {
    edges.push_back(a + gap * f);
    f *= 2;
  }
  f = ldexp(Real(1), -depth);
  std::vector<Real> upper;
  for (int t = depth; t >= 2; --t) {
    upper.push_back(b - gap * f);
    f *= 2;
  }
  for (auto it = upper.rbegin(); it != upper.rend(); ++it) edges.push_back(*it);
  edges.push_back(b);
}

Real layer_integral(const Real& rz, long n, const Real& nu, const Real& L) {
  Real lz = log(rz);
  std::vector<Real> pts = {-L, Real(0), L};
  if (lz > -L && lz < L && lz != 0) pts.push_back(lz);
  std::sort(pts.begin(), pts.end());

  const GaussRule& rule = gauss_legendre(24);
  Real total(0);
  for (std::size_t seg = 0; seg + 1 < pts.size(); ++seg) {
    std::vector<Real> edges;
    graded_panels(pts[seg], pts[seg + 1], 24, edges);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      Real half = (edges[p + 1] - edges[p]) / 2;
      Real mid = (edges[p + 1] + edges[p]) / 2;
      if (!(half > 0)) continue;
      Real acc(0);
      for (std::size_t q = 0; q < rule.x.size(); ++q) {
        Real l = mid + half * rule.x[q];
        Real al = abs(l);
        Real weight = exp(-Real(n) * al + 2 * l);
        if (nu != 1) weight *= pow(al, nu - 1);
        acc += rule.w[q] * weight * angular_distance_integral(exp(l), rz);
      }
      total += half * acc;
    }
  }
  return total;
}

}  // namespace

KeyboundReport verify_keybound(const Real& nu, const Real& epsilon,
                               const std::vector<long>& n_list, const PrecisionContext& ctx) {
  if (!(nu >= 1)) throw ValidationError("keybound check needs nu >= 1");
  if (!(epsilon > 0)) throw ValidationError("keybound check needs epsilon > 0");
  if (n_list.size() < 2) throw ValidationError("keybound check needs at least two n values");
  for (long n : n_list)
    if (n < 2) throw ValidationError("keybound check needs n >= 2");
  auto scope = ctx.activate();

  Real L = epsilon * log2_val();
  std::vector<Real> radii = {exp(-L), exp(-L / 2), Real(1), exp(L / 2), exp(L)};

  KeyboundReport rep;
  rep.nu = nu;
  for (long n : n_list) {
    Real lhs(0);
    for (const Real& rz : radii) {
      Real v = layer_integral(rz, n, nu, L);
      if (v > lhs) lhs = v;
    }
    rep.rows.push_back({n, lhs, Real(0)});
    Real afar = layer_integral(Real(4), n, nu, L);
    rep.away_rows.push_back({n, afar, Real(0)});
  }

  // least squares on log lhs - log log n = log K + e log n
  std::size_t cnt = rep.rows.size();
  Real sx(0), sy(0), sxx(0), sxy(0);
  for (const KeyboundRow& row : rep.rows) {
    Real x = log(Real(row.n));
    Real y = log(row.lhs) - log(log(Real(row.n)));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  Real cN(cnt);
  Real slope = (cN * sxy - sx * sy) / (cN * sxx - sx * sx);
  Real inter = (sy - slope * sx) / cN;
  rep.exponent = slope;
  rep.prefactor = exp(inter);
  Real rss(0);
  for (const KeyboundRow& row : rep.rows) {
    Real x = log(Real(row.n));
    Real y = log(row.lhs) - log(log(Real(row.n)));
    Real resid = y - (inter + slope * x);
    rss += resid * resid;
  }
  rep.fit_rms = sqrt(rss / cN);
  for (KeyboundRow& row : rep.rows)
    row.bound_fit = rep.prefactor * log(Real(row.n)) * exp(slope * log(Real(row.n)));
  // away rows report the integral scaled by n^nu (bounded iff the away decay
  // beats the near-band rate by the missing log)
  for (KeyboundRow& row : rep.away_rows)
    row.bound_fit = row.lhs * exp(nu * log(Real(row.n)));
  return rep;
}

ExponentControl verify_exponent_control(const SzegoEvaluator& sz, long m, const Real& epsilon,
                                        const PrecisionContext& ctx) {
  if (m < 1) throw ValidationError("exponent control needs m >= 1");
  if (!(epsilon > 0)) throw ValidationError("exponent control needs epsilon > 0");
  auto scope = ctx.activate();

  AnnulusGrid g(epsilon, 64, 256);
  const long R = g.radial_cells, A = g.angular_cells;
  std::vector<std::vector<Cx>> derivs(A, std::vector<Cx>(m + 1));
  for (long p = 0; p <= m; ++p) {
    std::vector<Real> om =
        sz.Omega_deriv_ring(static_cast<unsigned>(p), static_cast<std::size_t>(A), g.theta0());
    for (long j = 0; j < A; ++j) derivs[j][p] = Cx(om[j]);
  }

  bool have = false;
  Real mu(0);
  for (long i = 0; i < R; ++i) {
    const Real& l = g.centers_logr[i];
    const Real& r = g.centers_r[i];
    for (long j = 0; j < A; ++j) {
      ExtensionSample ext =
          extend_em(derivs[j], static_cast<unsigned>(m), r, g.centers_theta[j]);
      Real cand = 1 - ext.value.im / l;
      if (!have || cand < mu) {
        mu = cand;
        have = true;
      }
    }
  }
  return {mu, mu > 0};
}

}  // namespace opuclab
