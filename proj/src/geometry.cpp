#include "ricci/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ricci/interpolation.hpp"
#include "ricci/weighted.hpp"

namespace ricci {

namespace {

// parity limit of lambda2 at the center: w/(f^2 r^2) -> w_rr(0)/(2 f0^2)
double lambda2_center(const MetricProfile& p, const StencilSet& st) {
  const double w0 = p.f[0] * p.f[0] - 1.0;
  const double w1 = p.f[1] * p.f[1] - 1.0;
  const double wrr0 = st.d2[0][0] * w0 + st.d2[0][1] * w1;
  return 0.5 * wrr0 / (p.f[0] * p.f[0]);
}

}  // namespace

CurvatureField curvature_field(const MetricProfile& profile, const StencilSet& st,
                               int n) {
  profile.validate();
  const auto& f = profile.f;
  const auto& r = profile.grid->nodes;
  const std::size_t m = f.size();

  CurvatureField cf;
  cf.time = profile.time;
  cf.lambda1.resize(m);
  cf.lambda2.resize(m);
  cf.scalar.resize(m);
  cf.rm_norm.resize(m);
  cf.mean_curv.resize(m);
  cf.ric_rr.resize(m);
  cf.ric_orb.resize(m);

  const std::vector<double> d1 = st.first(f);
  for (std::size_t i = 1; i < m; ++i) {
    const double fi = f[i], fr = d1[i];
    const double fi2 = fi * fi;
    cf.lambda1[i] = fr / (r[i] * fi2 * fi);
    cf.lambda2[i] = (1.0 - 1.0 / fi2) / (r[i] * r[i]);
    cf.mean_curv[i] = 1.0 / (r[i] * fi);
    cf.ric_rr[i] = (n - 1) * fr / (r[i] * fi);
    cf.ric_orb[i] = (n - 2) * (1.0 - 1.0 / fi2) + r[i] * fr / (fi2 * fi);
    cf.scalar[i] = cf.ric_rr[i] / fi2 + (n - 1) * cf.ric_orb[i] / (r[i] * r[i]);
  }

  // center closures by parity: f_r/r -> f_rr(0), lambda2 by the w limit
  const double f0 = f[0];
  const double frr0 = st.second(f, 0);
  cf.lambda1[0] = frr0 / (f0 * f0 * f0);
  cf.lambda2[0] = lambda2_center(profile, st);
  cf.mean_curv[0] = std::numeric_limits<double>::infinity();
  cf.ric_rr[0] = (n - 1) * frr0 / f0;
  cf.ric_orb[0] = 0.0;
  cf.scalar[0] = 2.0 * (n - 1) * cf.lambda1[0] + (n - 1) * (n - 2) * cf.lambda2[0];

  for (std::size_t i = 0; i < m; ++i)
    cf.rm_norm[i] = std::sqrt(2.0 * (n - 1) * cf.lambda1[i] * cf.lambda1[i] +
                              (n - 1) * (n - 2) * cf.lambda2[i] * cf.lambda2[i]);
  return cf;
}

double quasilocal_mass(const MetricProfile& profile, double b, int n) {
  if (!(b > 0.0) || b > profile.grid->r_max)
    throw std::invalid_argument("quasilocal_mass: b must lie in (0, r_max]");
  const MonotoneCubic interp(profile.grid->nodes, profile.f);
  const double fb = interp(b);
  return std::pow(b, n - 2) * (1.0 - 1.0 / fb) * sphere_volume(n);
}

std::string SphereFamily::name() const {
  switch (kind) {
    case Kind::fixed_area: return "fixed_area";
    case Kind::fixed_volume: return "fixed_volume";
    case Kind::fixed_proper_radius: return "fixed_proper_radius";
  }
  return "?";
}

namespace {

// cumulative integral of `density` from 0 to b: per-cell Simpson with the
// interpolant supplying midpoints, clipped at b
template <typename Density>
double integral_to(const RadialGrid& grid, const Density& density, double b) {
  auto simpson = [&](double a, double c) {
    return (c - a) / 6.0 *
           (density(a) + 4.0 * density(0.5 * (a + c)) + density(c));
  };
  double acc = 0.0;
  std::size_t k = 1;
  for (; k < grid.size() && grid.nodes[k] <= b; ++k)
    acc += simpson(grid.nodes[k - 1], grid.nodes[k]);
  const double a = grid.nodes[k - 1];
  if (b > a) acc += simpson(a, b);
  return acc;
}

}  // namespace

double sphere_family_radius(const MetricProfile& profile, const SphereFamily& family,
                            int n) {
  profile.validate();
  if (family.kind == SphereFamily::Kind::fixed_area) {
    if (!(family.target > 0.0) || family.target > profile.grid->r_max)
      throw std::invalid_argument("sphere_family_radius: b0 outside the grid");
    return family.target;
  }

  const auto& grid = *profile.grid;
  // interpolate f itself; the known r^{n-1} factor stays exact, so flat data
  // integrates to the flat ball volume to round-off
  const MonotoneCubic ffun(grid.nodes, profile.f);
  const bool by_volume = family.kind == SphereFamily::Kind::fixed_volume;
  const double vol = sphere_volume(n);
  auto rho = [&](double r) {
    return by_volume ? vol * ffun(r) * std::pow(r, n - 1) : ffun(r);
  };

  const double total = integral_to(grid, rho, grid.r_max);
  if (!(family.target > 0.0) || family.target > total)
    throw std::invalid_argument(
        "sphere_family_radius: target exceeds the integral over the grid");

  double lo = 0.0, hi = grid.r_max;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * grid.r_max; ++it) {
    const double mid = 0.5 * (lo + hi);
    (integral_to(grid, rho, mid) < family.target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RadiusBracket sphere_radius_bracket(const SphereFamily& family, double c_f2_min,
                                    double c_f2_max, int n) {
  RadiusBracket br;
  const double f_lo = std::sqrt(c_f2_min), f_hi = std::sqrt(c_f2_max);
  switch (family.kind) {
    case SphereFamily::Kind::fixed_area:
      br.lo = br.hi = family.target;
      break;
    case SphereFamily::Kind::fixed_volume: {
      const double vol = sphere_volume(n);
      br.lo = std::pow(n * family.target / (vol * f_hi), 1.0 / n);
      br.hi = std::pow(n * family.target / (vol * f_lo), 1.0 / n);
      break;
    }
    case SphereFamily::Kind::fixed_proper_radius:
      br.lo = family.target / f_hi;
      br.hi = family.target / f_lo;
      break;
  }
  return br;
}

MassSeries mass_series(const Trajectory& traj, const SphereFamily& family, int n) {
  MassSeries ms;
  ms.family = family;
  for (const auto& snap : traj.snapshots) {
    const double b = sphere_family_radius(snap, family, n);
    ms.times.push_back(snap.time);
    ms.radii.push_back(b);
    ms.mu.push_back(quasilocal_mass(snap, b, n));
    const AdmReport adm = adm_mass(snap, n);
    ms.adm.push_back(adm.mass);
  }
  return ms;
}

AdmReport adm_mass(const MetricProfile& profile, int n) {
  profile.validate();
  AdmReport rep;
  const auto& r = profile.grid->nodes;
  const std::size_t m = profile.size();
  const std::size_t start = m - m / 4;

  std::vector<double> seq;  // r^{n-2} (f^2 - 1) over the outer quarter
  std::vector<double> radii;
  double wmax = 0.0;
  for (std::size_t i = start; i < m; ++i) {
    const double w = profile.f[i] * profile.f[i] - 1.0;
    wmax = std::max(wmax, std::abs(w));
    seq.push_back(std::pow(r[i], n - 2) * w);
    radii.push_back(r[i]);
  }

  if (wmax < 1e-13) {
    rep.mass = 0.0;
    rep.converged = true;
    rep.tail_ok = true;
    rep.tail_exponent = -std::numeric_limits<double>::infinity();
    rep.note = "flat tail";
    return rep;
  }

  // tail exponent of |w| decides whether the limit exists
  const auto af = check_af_class(profile, 0, 2.0 - n, 0.25);
  rep.tail_exponent = af.tail_exponent;
  rep.tail_ok = af.degenerate_tail || af.tail_exponent <= (2.0 - n) + 0.25;
  if (!rep.tail_ok) {
    rep.note = "tail decays too slowly, mass undefined";
    rep.mass = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }

  // oscillation guard: a non-monotone sequence with significant amplitude
  double amp = 0.0;
  int sign_changes = 0;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    const double d = seq[i] - seq[i - 1];
    amp = std::max(amp, std::abs(d));
    if (i >= 2) {
      const double dprev = seq[i - 1] - seq[i - 2];
      if (d * dprev < 0.0) ++sign_changes;
    }
  }
  double seq_scale = 0.0;
  for (double v : seq) seq_scale = std::max(seq_scale, std::abs(v));
  if (sign_changes >= 3 && amp > 1e-6 * std::max(seq_scale, 1e-30)) {
    rep.converged = false;
    rep.mass = std::numeric_limits<double>::quiet_NaN();
    rep.note = "oscillating tail sequence, value withheld";
    return rep;
  }

  // two-term Richardson in 1/r: fit seq ~ M + c/r by least squares
  double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const double x = 1.0 / radii[i];
    s1 += 1.0; sx += x; sxx += x * x; sy += seq[i]; sxy += x * seq[i];
  }
  const double det = s1 * sxx - sx * sx;
  const double limit = (sxx * sy - sx * sxy) / det;
  const double slope = (s1 * sxy - sx * sy) / det;

  double fit_resid = 0.0;
  for (std::size_t i = 0; i < seq.size(); ++i)
    fit_resid = std::max(fit_resid,
                         std::abs(seq[i] - (limit + slope / radii[i])));

  const double prefactor = (n - 1) * sphere_volume(n);
  rep.mass = prefactor * limit;
  rep.error_bar = prefactor * (fit_resid + std::abs(slope) / radii.back()) +
                  1e-12 * (1.0 + std::abs(rep.mass));
  rep.converged = true;
  return rep;
}

BarrierTriple barrier_functions(const MetricProfile& profile, const StencilSet& st,
                                double t, double m) {
  if (!(m > 0.0 && m <= 2.0))
    throw std::invalid_argument("barrier_functions: m must lie in (0, 2]");
  if (std::abs(t - profile.time) > 1e-12 * (1.0 + std::abs(t)))
    throw std::invalid_argument("barrier_functions: t must match the profile stamp");
  profile.validate();

  const auto& f = profile.f;
  const auto& r = profile.grid->nodes;
  const std::size_t count = f.size();
  BarrierTriple bt;
  bt.m = m;
  bt.u.resize(count);
  bt.v.resize(count);
  bt.y.resize(count);

  for (std::size_t i = 1; i < count; ++i) {
    const double denom = std::pow(r[i], m) + r[i] * r[i];
    const double w = f[i] * f[i] - 1.0;
    bt.u[i] = (1.0 + t) / denom * (-w / (f[i] * f[i]));
    bt.v[i] = (1.0 + t) / denom * w;
  }

  // psi = r^{-m} (1/f - 1); even and smooth for m = 2, -> 0 for m < 2
  std::vector<double> psi(count);
  for (std::size_t i = 1; i < count; ++i)
    psi[i] = std::pow(r[i], -m) * (1.0 / f[i] - 1.0);
  if (m == 2.0) {
    // lim r^{-2}(1/f - 1) = (1/f)_rr(0)/2 = -f_rr(0)/(2 f0^2) with f_r(0) = 0
    const double frr0 = st.second(f, 0);
    psi[0] = -0.5 * frr0 / (f[0] * f[0]);
  } else {
    psi[0] = 0.0;
  }
  for (std::size_t i = 1; i < count; ++i) {
    const double dpsi = st.first(psi, i);
    bt.y[i] = (1.0 + t) / (1.0 + std::pow(r[i], 2.0 - m)) * r[i] * dpsi;
  }
  bt.y[0] = 0.0;  // defining limit for every m in (0, 2]

  const double l2c = lambda2_center(profile, st);
  if (m == 2.0) {
    bt.u[0] = -(1.0 + t) * 0.5 * l2c;
    bt.v[0] = (1.0 + t) * 0.5 * l2c * f[0] * f[0];
  } else {
    bt.u[0] = 0.0;
    bt.v[0] = 0.0;
  }
  return bt;
}

BoundLedger bound_ledger(const MetricProfile& initial, int n) {
  initial.validate();
  if (initial.time != 0.0)
    throw std::invalid_argument("bound_ledger: wants the t = 0 profile");

  const StencilSet st = derivative_stencils(*initial.grid);
  BoundLedger lg;
  lg.dimension = n;

  lg.c_f2_min = std::numeric_limits<double>::infinity();
  lg.c_f2_max = -std::numeric_limits<double>::infinity();
  for (double fv : initial.f) {
    lg.c_f2_min = std::min(lg.c_f2_min, fv * fv);
    lg.c_f2_max = std::max(lg.c_f2_max, fv * fv);
  }
  lg.c_w_min = lg.c_f2_min - 1.0;
  lg.c_w_max = lg.c_f2_max - 1.0;

  const BarrierTriple b2 = barrier_functions(initial, st, 0.0, 2.0);
  const double sup_u2 = *std::max_element(b2.u.begin(), b2.u.end());
  const double sup_v2 = *std::max_element(b2.v.begin(), b2.v.end());
  const double inf_y2 = *std::min_element(b2.y.begin(), b2.y.end());

  lg.c_u_plus = std::max(1.0 / (2.0 * (n - 1)), sup_u2);
  lg.c_v_plus = std::max(lg.c_f2_max * lg.c_f2_max / 6.0, sup_v2);
  lg.c_u_minus = -lg.c_v_plus / lg.c_f2_min;
  lg.c_u_abs = std::max(std::abs(lg.c_u_plus), std::abs(lg.c_u_minus));

  const CurvatureField cf = curvature_field(initial, st, n);
  const double inf_r = *std::min_element(cf.scalar.begin(), cf.scalar.end());
  lg.c_r_min = std::min(-0.5 * n, inf_r);

  const double c_f_min = std::sqrt(lg.c_f2_min);
  const double c_f_max = std::sqrt(lg.c_f2_max);
  lg.k1 = lg.c_u_abs * lg.c_u_abs * (1.0 / c_f_min + 2.0 * (n - 2));
  lg.k2 = 8.0 * lg.c_u_abs;
  lg.c_y_cap = std::min(
      (1.0 - 2.0 * n) / (4.0 * n - 7.0) * lg.c_u_abs,
      -c_f_max / 6.0 * (lg.k2 + std::sqrt(lg.k2 * lg.k2 + 12.0 * lg.k1 / c_f_min)));
  lg.c_y_min = std::min(lg.c_y_cap, inf_y2);

  lg.c_lambda2_min = -2.0 * lg.c_u_plus;
  lg.c_lambda2_max = 2.0 * lg.c_v_plus / lg.c_f2_min;
  lg.c_lambda1_min = lg.c_r_min / (2.0 * (n - 1)) - (n - 2) * lg.c_v_plus / lg.c_f2_min;
  lg.c_lambda1_max = 4.0 * lg.c_v_plus / lg.c_f2_min - 2.0 * lg.c_y_min / c_f_min;

  const double l1 = std::max(std::abs(lg.c_lambda1_min), std::abs(lg.c_lambda1_max));
  const double l2 = std::max(std::abs(lg.c_lambda2_min), std::abs(lg.c_lambda2_max));
  lg.c_rm = std::sqrt(2.0 * (n - 1) * l1 * l1 + (n - 1) * (n - 2) * l2 * l2);
  return lg;
}

bool DecayReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

DecayReport verify_decay(const Trajectory& traj, const BoundLedger& ledger, int n,
                         double eps) {
  DecayReport rep;
  rep.eps = eps;

  BoundCheck l2_lo{"lambda2_lower"}, l2_hi{"lambda2_upper"};
  BoundCheck l1_lo{"lambda1_lower"}, l1_hi{"lambda1_upper"};
  BoundCheck r_lo{"scalar_lower"}, rm_hi{"rm_decay"};
  for (auto* c : {&l2_lo, &l2_hi, &l1_lo, &l1_hi, &r_lo, &rm_hi})
    c->margin = std::numeric_limits<double>::infinity();

  const StencilSet st = derivative_stencils(*traj.snapshots.front().grid);
  for (const auto& snap : traj.snapshots) {
    const CurvatureField cf = curvature_field(snap, st, n);
    const double decay = 1.0 / (1.0 + snap.time);
    double sup_rm = 0.0;
    for (std::size_t i = 0; i < snap.size(); ++i) {
      const double r = snap.r(i);
      auto update = [&](BoundCheck& c, double slack) {
        if (slack < c.margin) {
          c.margin = slack;
          c.worst_time = snap.time;
          c.worst_radius = r;
        }
      };
      update(l2_lo, cf.lambda2[i] - (ledger.c_lambda2_min * decay - eps));
      update(l2_hi, (ledger.c_lambda2_max * decay + eps) - cf.lambda2[i]);
      update(l1_lo, cf.lambda1[i] - (ledger.c_lambda1_min * decay - eps));
      update(l1_hi, (ledger.c_lambda1_max * decay + eps) - cf.lambda1[i]);
      update(r_lo, cf.scalar[i] - (ledger.c_r_min * decay - eps));
      sup_rm = std::max(sup_rm, cf.rm_norm[i]);
    }
    rep.measured_rm_decay = std::max(rep.measured_rm_decay, sup_rm * (1.0 + snap.time));
    const double rm_slack = (ledger.c_rm + eps) - sup_rm * (1.0 + snap.time);
    if (rm_slack < rm_hi.margin) {
      rm_hi.margin = rm_slack;
      rm_hi.worst_time = snap.time;
    }
  }

  for (auto* c : {&l2_lo, &l2_hi, &l1_lo, &l1_hi, &r_lo, &rm_hi}) {
    c->pass = c->margin >= 0.0;
    rep.checks.push_back(*c);
  }
  return rep;
}

namespace {

struct BarrierJet {
  std::vector<double> val, d1, d2;
};

BarrierJet barrier_jet(const MetricProfile& p, const StencilSet& st, double m,
                       AuxiliaryPde which) {
  const BarrierTriple bt = barrier_functions(p, st, p.time, m);
  const std::vector<double>& b = which == AuxiliaryPde::u_equation ? bt.u
                                 : which == AuxiliaryPde::v_equation ? bt.v
                                                                     : bt.y;
  BarrierJet jet;
  jet.val = b;
  jet.d1 = st.first(b);
  jet.d2 = st.second(b);
  return jet;
}

// spatial operator of the u_m evolution equation at node i
double rhs_u_equation(double u, double u1, double u2, double f, double r, double t,
                      double m, int n) {
  const double rm = std::pow(r, m);
  const double r2m = std::pow(r, 2.0 - m);
  const double f2 = f * f;
  const double denom = rm + r * r;
  const double dd = 2.0 * r + m * rm / r;  // 2r + m r^{m-1}
  return u2 / f2 - denom / (2.0 * (1.0 + t)) * u1 * u1 -
         dd / (1.0 + t) * u * u1 +
         (2.0 * dd / (denom * f2) - 1.0 / (r * f2) + (n - 2) / r) * u1 -
         (2.0 - m) * (m + n - 2) / (r * r * (1.0 + r2m)) * u +
         1.0 / (1.0 + t) *
             ((1.0 / (1.0 + r2m)) *
                  (u - ((4.0 - m) * (m + n - 2) + m * (n - 2)) * u * u) +
              (r2m / (1.0 + r2m)) * (u - 2.0 * (n - 1) * u * u) +
              (1.0 / (r2m * (1.0 + r2m))) *
                  ((m - 2.0) * (m + n - 2) - m * (0.5 * m + n - 2)) * u * u);
}

// spatial operator of the v_m equation; the transport bracket carries the
// v factor (the printed equation omits it, which breaks the identity)
double rhs_v_equation(double v, double v1, double v2, double f, double r, double t,
                      double m, int n) {
  const double rm = std::pow(r, m);
  const double f2 = f * f;
  const double f4 = f2 * f2;
  const double denom = rm + r * r;
  const double dd = m * rm / r + 2.0 * r;  // m r^{m-1} + 2r
  return v2 / f2 - 3.0 * denom / (2.0 * f4 * (1.0 + t)) * v1 * v1 +
         (2.0 * dd / (denom * f2) - 3.0 * dd * v / ((1.0 + t) * f4) +
          (n - 2) / r - 1.0 / (r * f2)) *
             v1 +
         (1.0 - 3.0 * dd * dd / (2.0 * denom * f4) * v) * v / (1.0 + t) +
         (m - 2.0) / (r * r) * (rm / denom) * (n - 2 + m / f2) * v;
}

// spatial operator of the y_m equation; the braces term reads
// [(2/f)(2(m-1)r^m + m r^2) y + r^2] y/(1+t) (the printed "+1" breaks the
// identity, the residual of the printed form being (r^2-1) y/(r^2(1+t)))
double rhs_y_equation(double y, double y1, double y2, double f, double r, double t,
                      double m, int n) {
  const double rm = std::pow(r, m);
  const double r2m = std::pow(r, 2.0 - m);
  const double f2 = f * f;
  const double alpha = 2.0 * (rm + r * r) / f * y / (1.0 + t) +
                       (4.0 * m - 3.0) / f2 - 2.0 * m / f + n - 2 -
                       2.0 * (m - 2.0) * r2m / (f2 * (1.0 + r2m));
  const double beta = (7.0 * m * m - 14.0 * m + 4.0) / f2 - m * (6.0 * m - 8.0) / f +
                      (n - 2) * (m - 1.0 - 3.0 / f2) +
                      (m - 2.0) * r2m / (1.0 + r2m) *
                          (-(3.0 * m - 2.0) / f2 + 2.0 * m / f - (n - 2));
  const double gamma = 1.0 / (rm + r * r) * (1.0 / f - 1.0) *
                       (2.0 * m * (m - 1.0) * (m - 2.0) / f2 +
                        2.0 * m * m * (2.0 - m) / f +
                        (n - 2) * (-m + (m + 2.0) / f + 2.0 * (1.0 - m) / f2));
  return y2 / f2 + alpha / r * y1 +
         1.0 / (r * r) *
             ((2.0 / f * (2.0 * (m - 1.0) * rm + m * r * r) * y + r * r) * y /
                  (1.0 + t) +
              beta * y + (1.0 + t) * gamma);
}

}  // namespace

ResidualSeries residual_auxiliary_pdes(const Trajectory& traj, const StencilSet& st,
                                       int n, AuxiliaryPde which, double m,
                                       double min_radius) {
  if (traj.snapshots.size() < 3)
    throw std::invalid_argument("residual_auxiliary_pdes: need at least 3 snapshots");
  if (!(m > 0.0 && m < 2.0))
    throw std::invalid_argument("residual_auxiliary_pdes: m must lie in (0, 2)");
  if (which == AuxiliaryPde::y_equation && !(m > 1.0))
    throw std::invalid_argument("residual_auxiliary_pdes: y equation needs m > 1");

  ResidualSeries series;
  const auto& grid = *traj.snapshots.front().grid;
  const double r_min = min_radius > 0.0 ? min_radius : 4.0 * grid.nodes[1];

  for (std::size_t k = 1; k + 1 < traj.snapshots.size(); ++k) {
    const auto& prev = traj.snapshots[k - 1];
    const auto& cur = traj.snapshots[k];
    const auto& next = traj.snapshots[k + 1];
    const BarrierJet jp = barrier_jet(prev, st, m, which);
    const BarrierJet jc = barrier_jet(cur, st, m, which);
    const BarrierJet jn = barrier_jet(next, st, m, which);
    const double dt2 = next.time - prev.time;

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < cur.size(); ++i) {
      if (grid.nodes[i] < r_min) continue;
      const double bdot = (jn.val[i] - jp.val[i]) / dt2;
      double rhs = 0.0;
      switch (which) {
        case AuxiliaryPde::u_equation:
          rhs = rhs_u_equation(jc.val[i], jc.d1[i], jc.d2[i], cur.f[i],
                               grid.nodes[i], cur.time, m, n);
          break;
        case AuxiliaryPde::v_equation:
          rhs = rhs_v_equation(jc.val[i], jc.d1[i], jc.d2[i], cur.f[i],
                               grid.nodes[i], cur.time, m, n);
          break;
        case AuxiliaryPde::y_equation:
          rhs = rhs_y_equation(jc.val[i], jc.d1[i], jc.d2[i], cur.f[i],
                               grid.nodes[i], cur.time, m, n);
          break;
      }
      worst = std::max(worst, std::abs(bdot - rhs));
    }
    series.times.push_back(cur.time);
    series.residuals.push_back(worst);
  }
  return series;
}

ResidualSeries residual_scalar_evolution(const Trajectory& traj, const StencilSet& st,
                                         int n, double min_radius) {
  if (traj.snapshots.size() < 3)
    throw std::invalid_argument("residual_scalar_evolution: need at least 3 snapshots");

  ResidualSeries series;
  const auto& grid = *traj.snapshots.front().grid;
  const double r_min = min_radius > 0.0 ? min_radius : 4.0 * grid.nodes[1];

  for (std::size_t k = 1; k + 1 < traj.snapshots.size(); ++k) {
    const auto& prev = traj.snapshots[k - 1];
    const auto& cur = traj.snapshots[k];
    const auto& next = traj.snapshots[k + 1];
    const CurvatureField cp = curvature_field(prev, st, n);
    const CurvatureField cc = curvature_field(cur, st, n);
    const CurvatureField cn = curvature_field(next, st, n);
    const std::vector<double> xi = deturck_vector(cur, st, n);
    // the center value switches to the even-quadratic extrapolation through
    // nodes 1 and 2: the parity-stencil value carries a discretization error
    // from a different stencil family, and second differences at node 1
    // would amplify that kink to O(1)
    std::vector<double> scalar = cc.scalar;
    {
      const double ra = grid.nodes[1], rb = grid.nodes[2];
      scalar[0] = (scalar[1] * rb * rb - scalar[2] * ra * ra) / (rb * rb - ra * ra);
    }
    const std::vector<double> r1 = st.first(scalar);
    const std::vector<double> r2 = st.second(scalar);
    const std::vector<double> f1 = st.first(cur.f);
    const double dt2 = next.time - prev.time;

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < cur.size(); ++i) {
      if (grid.nodes[i] < r_min) continue;
      const double rdot = (cn.scalar[i] - cp.scalar[i]) / dt2;
      const double f = cur.f[i];
      const double f2 = f * f;
      const double lap = r2[i] / f2 - r1[i] * f1[i] / (f2 * f) +
                         (n - 1) * r1[i] / (grid.nodes[i] * f2);
      const double transport = xi[i] * r1[i] / f2;
      const double ric2 = (n - 1) * (n - 1) * cc.lambda1[i] * cc.lambda1[i] +
                          (n - 1) * std::pow(cc.lambda1[i] + (n - 2) * cc.lambda2[i], 2);
      worst = std::max(worst, std::abs(rdot - (lap + transport + 2.0 * ric2)));
    }
    series.times.push_back(cur.time);
    series.residuals.push_back(worst);
  }
  return series;
}

}  // namespace ricci
