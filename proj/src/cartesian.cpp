#include "ricci/cartesian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ricci/geometry.hpp"
#include "ricci/interpolation.hpp"

namespace ricci {

namespace {

constexpr int kSym[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 to_matrix(const std::array<double, 6>& c) {
  Mat3 g;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) g[a][b] = (a == b ? 1.0 : 0.0) + c[kSym[a][b]];
  return g;
}

double det3(const Mat3& g) {
  return g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
         g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
         g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
}

bool positive_definite(const Mat3& g) {
  if (!(g[0][0] > 0.0)) return false;
  if (!(g[0][0] * g[1][1] - g[0][1] * g[1][0] > 0.0)) return false;
  return det3(g) > 0.0;
}

Mat3 invert(const Mat3& g) {
  const double d = det3(g);
  Mat3 inv;
  inv[0][0] = (g[1][1] * g[2][2] - g[1][2] * g[2][1]) / d;
  inv[0][1] = (g[0][2] * g[2][1] - g[0][1] * g[2][2]) / d;
  inv[0][2] = (g[0][1] * g[1][2] - g[0][2] * g[1][1]) / d;
  inv[1][0] = inv[0][1];
  inv[1][1] = (g[0][0] * g[2][2] - g[0][2] * g[2][0]) / d;
  inv[1][2] = (g[0][2] * g[1][0] - g[0][0] * g[1][2]) / d;
  inv[2][0] = inv[0][2];
  inv[2][1] = inv[1][2];
  inv[2][2] = (g[0][0] * g[1][1] - g[0][1] * g[1][0]) / d;
  return inv;
}

// differences of all six components at a node; order 2 for the flow rhs,
// order 4 for curvature diagnostics (needs two rings of neighbors)
struct LocalJet {
  Mat3 g, ginv;
  double dg[3][3][3];      // dg[a][i][j] = d_a g_ij
  double ddg[3][3][3][3];  // ddg[a][b][i][j] = d_a d_b g_ij
  double gamma[3][3][3];   // gamma[k][i][j]
  double dgamma[3][3][3][3];  // dgamma[a][k][i][j] = d_a Gamma^k_ij
};

LocalJet local_jet(const CartesianState& s, int i, int j, int k, int order = 2) {
  LocalJet jet;
  const std::size_t c = s.index(i, j, k);
  jet.g = to_matrix(s.comp[c]);
  if (!positive_definite(jet.g))
    throw std::domain_error("cartesian: blow_up, metric not positive definite");
  jet.ginv = invert(jet.g);

  const long step[3] = {static_cast<long>(s.m) * s.m, s.m, 1};
  auto at = [&](long off, int su) { return s.comp[c + off][su]; };

  if (order == 2) {
    const double inv2h = 0.5 / s.h;
    const double invh2 = 1.0 / (s.h * s.h);
    for (int a = 0; a < 3; ++a)
      for (int u = 0; u < 3; ++u)
        for (int v = u; v < 3; ++v) {
          const int su = kSym[u][v];
          jet.dg[a][u][v] = jet.dg[a][v][u] =
              (at(step[a], su) - at(-step[a], su)) * inv2h;
          jet.ddg[a][a][u][v] = jet.ddg[a][a][v][u] =
              (at(step[a], su) - 2.0 * at(0, su) + at(-step[a], su)) * invh2;
        }
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        for (int u = 0; u < 3; ++u)
          for (int v = u; v < 3; ++v) {
            const int su = kSym[u][v];
            const double d = (at(step[a] + step[b], su) - at(step[a] - step[b], su) -
                              at(-step[a] + step[b], su) + at(-step[a] - step[b], su)) *
                             0.25 / (s.h * s.h);
            jet.ddg[a][b][u][v] = jet.ddg[a][b][v][u] = d;
            jet.ddg[b][a][u][v] = jet.ddg[b][a][v][u] = d;
          }
  } else {
    // fourth order: d1 = (-f2 + 8f1 - 8f-1 + f-2)/(12h),
    // d2 = (-f2 + 16f1 - 30f0 + 16f-1 - f-2)/(12h^2), mixed via nested d1
    const double w1[2] = {8.0 / (12.0 * s.h), -1.0 / (12.0 * s.h)};
    for (int a = 0; a < 3; ++a)
      for (int u = 0; u < 3; ++u)
        for (int v = u; v < 3; ++v) {
          const int su = kSym[u][v];
          const double d1 = w1[0] * (at(step[a], su) - at(-step[a], su)) +
                            w1[1] * (at(2 * step[a], su) - at(-2 * step[a], su));
          const double d2 =
              (-at(2 * step[a], su) + 16.0 * at(step[a], su) - 30.0 * at(0, su) +
               16.0 * at(-step[a], su) - at(-2 * step[a], su)) /
              (12.0 * s.h * s.h);
          jet.dg[a][u][v] = jet.dg[a][v][u] = d1;
          jet.ddg[a][a][u][v] = jet.ddg[a][a][v][u] = d2;
        }
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        for (int u = 0; u < 3; ++u)
          for (int v = u; v < 3; ++v) {
            const int su = kSym[u][v];
            double d = 0.0;
            const double cw[2] = {8.0 / 12.0, -1.0 / 12.0};
            const int off[2] = {1, 2};
            for (int p = 0; p < 2; ++p)
              for (int q = 0; q < 2; ++q) {
                const double wpq = cw[p] * cw[q] / (s.h * s.h);
                d += wpq * (at(off[p] * step[a] + off[q] * step[b], su) -
                            at(off[p] * step[a] - off[q] * step[b], su) -
                            at(-off[p] * step[a] + off[q] * step[b], su) +
                            at(-off[p] * step[a] - off[q] * step[b], su));
              }
            jet.ddg[a][b][u][v] = jet.ddg[a][b][v][u] = d;
            jet.ddg[b][a][u][v] = jet.ddg[b][a][v][u] = d;
          }
  }

  for (int kk = 0; kk < 3; ++kk)
    for (int u = 0; u < 3; ++u)
      for (int v = 0; v < 3; ++v) {
        double acc = 0.0;
        for (int l = 0; l < 3; ++l)
          acc += jet.ginv[kk][l] *
                 (jet.dg[u][l][v] + jet.dg[v][l][u] - jet.dg[l][u][v]);
        jet.gamma[kk][u][v] = 0.5 * acc;
      }

  // d_a g^{kl} = -g^{kp} g^{lq} d_a g_pq
  double dginv[3][3][3];
  for (int a = 0; a < 3; ++a)
    for (int kk = 0; kk < 3; ++kk)
      for (int l = 0; l < 3; ++l) {
        double acc = 0.0;
        for (int p = 0; p < 3; ++p)
          for (int q = 0; q < 3; ++q)
            acc += jet.ginv[kk][p] * jet.ginv[l][q] * jet.dg[a][p][q];
        dginv[a][kk][l] = -acc;
      }

  for (int a = 0; a < 3; ++a)
    for (int kk = 0; kk < 3; ++kk)
      for (int u = 0; u < 3; ++u)
        for (int v = 0; v < 3; ++v) {
          double acc = 0.0;
          for (int l = 0; l < 3; ++l) {
            acc += dginv[a][kk][l] *
                   (jet.dg[u][l][v] + jet.dg[v][l][u] - jet.dg[l][u][v]);
            acc += jet.ginv[kk][l] * (jet.ddg[a][u][l][v] + jet.ddg[a][v][l][u] -
                                      jet.ddg[a][l][u][v]);
          }
          jet.dgamma[a][kk][u][v] = 0.5 * acc;
        }
  return jet;
}

Mat3 ricci_of(const LocalJet& jet) {
  Mat3 ric;
  for (int u = 0; u < 3; ++u)
    for (int v = 0; v < 3; ++v) {
      double acc = 0.0;
      for (int a = 0; a < 3; ++a) {
        acc += jet.dgamma[a][a][u][v] - jet.dgamma[u][a][a][v];
        for (int b = 0; b < 3; ++b)
          acc += jet.gamma[a][a][b] * jet.gamma[b][u][v] -
                 jet.gamma[a][u][b] * jet.gamma[b][a][v];
      }
      ric[u][v] = acc;
    }
  return ric;
}

}  // namespace

std::array<double, 9> CartesianState::metric_at(std::size_t idx) const {
  const Mat3 g = to_matrix(comp[idx]);
  return {g[0][0], g[0][1], g[0][2], g[1][0], g[1][1], g[1][2],
          g[2][0], g[2][1], g[2][2]};
}

CartesianState init_from_profile(const MetricProfile& profile,
                                 const CartesianSpec& spec) {
  profile.validate();
  if (spec.nodes_per_axis < 5)
    throw std::invalid_argument("init_from_profile: need at least 5 nodes per axis");
  const double needed = std::sqrt(3.0) * spec.half_width;
  if (profile.grid->r_max < needed * (1.0 - 1e-12))
    throw std::invalid_argument(
        "init_from_profile: profile must cover radius sqrt(3) L");

  CartesianState s;
  s.m = spec.nodes_per_axis;
  s.half_width = spec.half_width;
  s.h = 2.0 * spec.half_width / (spec.nodes_per_axis - 1);
  s.comp.resize(static_cast<std::size_t>(s.m) * s.m * s.m);

  const MonotoneCubic wfun(profile.grid->nodes, profile.w());
  for (int i = 0; i < s.m; ++i)
    for (int j = 0; j < s.m; ++j)
      for (int k = 0; k < s.m; ++k) {
        const double x[3] = {s.coord(i), s.coord(j), s.coord(k)};
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        auto& c = s.comp[s.index(i, j, k)];
        if (r2 < 1e-28) {
          c = {0, 0, 0, 0, 0, 0};
          continue;
        }
        const double w = wfun(std::min(std::sqrt(r2), profile.grid->r_max));
        c[0] = w * x[0] * x[0] / r2;
        c[1] = w * x[0] * x[1] / r2;
        c[2] = w * x[0] * x[2] / r2;
        c[3] = w * x[1] * x[1] / r2;
        c[4] = w * x[1] * x[2] / r2;
        c[5] = w * x[2] * x[2] / r2;
      }
  return s;
}

std::vector<std::array<double, 6>> rhs_deturck(const CartesianState& s) {
  std::vector<std::array<double, 6>> out(s.comp.size(), {0, 0, 0, 0, 0, 0});
  for (int i = 1; i + 1 < s.m; ++i)
    for (int j = 1; j + 1 < s.m; ++j)
      for (int k = 1; k + 1 < s.m; ++k) {
        const LocalJet jet = local_jet(s, i, j, k);
        const Mat3 ric = ricci_of(jet);

        double w_up[3], w_dn[3];
        for (int kk = 0; kk < 3; ++kk) {
          double acc = 0.0;
          for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) acc += jet.ginv[p][q] * jet.gamma[kk][p][q];
          w_up[kk] = acc;
        }
        for (int jj = 0; jj < 3; ++jj) {
          double acc = 0.0;
          for (int kk = 0; kk < 3; ++kk) acc += jet.g[jj][kk] * w_up[kk];
          w_dn[jj] = acc;
        }
        // d_i W_j = d_i g_jk W^k + g_jk (d_i g^{pq} Gamma^k_pq + g^{pq} d_i Gamma^k_pq)
        double dW[3][3];
        for (int a = 0; a < 3; ++a) {
          double dw_up[3];
          for (int kk = 0; kk < 3; ++kk) {
            double acc = 0.0;
            for (int p = 0; p < 3; ++p)
              for (int q = 0; q < 3; ++q) {
                // d_a g^{pq} = -g^{pu} g^{qv} d_a g_uv
                double dginv_pq = 0.0;
                for (int u = 0; u < 3; ++u)
                  for (int v = 0; v < 3; ++v)
                    dginv_pq -= jet.ginv[p][u] * jet.ginv[q][v] * jet.dg[a][u][v];
                acc += dginv_pq * jet.gamma[kk][p][q] +
                       jet.ginv[p][q] * jet.dgamma[a][kk][p][q];
              }
            dw_up[kk] = acc;
          }
          for (int jj = 0; jj < 3; ++jj) {
            double acc = 0.0;
            for (int kk = 0; kk < 3; ++kk)
              acc += jet.dg[a][jj][kk] * w_up[kk] + jet.g[jj][kk] * dw_up[kk];
            dW[a][jj] = acc;
          }
        }

        auto& rhs = out[s.index(i, j, k)];
        for (int u = 0; u < 3; ++u)
          for (int v = u; v < 3; ++v) {
            double cov_uv = dW[u][v], cov_vu = dW[v][u];
            for (int kk = 0; kk < 3; ++kk) {
              cov_uv -= jet.gamma[kk][u][v] * w_dn[kk];
              cov_vu -= jet.gamma[kk][v][u] * w_dn[kk];
            }
            rhs[kSym[u][v]] = -2.0 * ric[u][v] + cov_uv + cov_vu;
          }
      }
  return out;
}

std::vector<std::array<double, 3>> deturck_W(const CartesianState& s) {
  std::vector<std::array<double, 3>> out(s.comp.size(), {0, 0, 0});
  for (int i = 1; i + 1 < s.m; ++i)
    for (int j = 1; j + 1 < s.m; ++j)
      for (int k = 1; k + 1 < s.m; ++k) {
        const LocalJet jet = local_jet(s, i, j, k);
        auto& w = out[s.index(i, j, k)];
        for (int kk = 0; kk < 3; ++kk) {
          double acc = 0.0;
          for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) acc += jet.ginv[p][q] * jet.gamma[kk][p][q];
          w[kk] = acc;
        }
      }
  return out;
}

CartesianInvariants curvature_invariants_at(const CartesianState& s, int i, int j,
                                            int k) {
  if (!s.interior(i) || !s.interior(j) || !s.interior(k))
    throw std::invalid_argument("curvature_invariants_at: node must be interior");
  auto deep = [&](int q) { return q >= 2 && q + 2 < s.m; };
  const int order = deep(i) && deep(j) && deep(k) ? 4 : 2;
  const LocalJet jet = local_jet(s, i, j, k, order);

  // R^i_{jkl} = d_k Gamma^i_lj - d_l Gamma^i_kj + Gamma^i_kp Gamma^p_lj
  //             - Gamma^i_lp Gamma^p_kj
  double riem_up[3][3][3][3];
  for (int a = 0; a < 3; ++a)
    for (int bb = 0; bb < 3; ++bb)
      for (int cc = 0; cc < 3; ++cc)
        for (int d = 0; d < 3; ++d) {
          double acc = jet.dgamma[cc][a][d][bb] - jet.dgamma[d][a][cc][bb];
          for (int p = 0; p < 3; ++p)
            acc += jet.gamma[a][cc][p] * jet.gamma[p][d][bb] -
                   jet.gamma[a][d][p] * jet.gamma[p][cc][bb];
          riem_up[a][bb][cc][d] = acc;
        }

  CartesianInvariants inv;
  // scalar from Ric_ij = R^a_{iaj}
  for (int u = 0; u < 3; ++u)
    for (int v = 0; v < 3; ++v) {
      double ric_uv = 0.0;
      for (int a = 0; a < 3; ++a) ric_uv += riem_up[a][u][a][v];
      inv.scalar += jet.ginv[u][v] * ric_uv;
    }

  double low[3][3][3][3];
  for (int a = 0; a < 3; ++a)
    for (int bb = 0; bb < 3; ++bb)
      for (int cc = 0; cc < 3; ++cc)
        for (int d = 0; d < 3; ++d) {
          double acc = 0.0;
          for (int p = 0; p < 3; ++p) acc += jet.g[a][p] * riem_up[p][bb][cc][d];
          low[a][bb][cc][d] = acc;
        }
  // raise indices one at a time, then contract with the lowered tensor
  double t1[3][3][3][3], t2[3][3][3][3];
  auto raise = [&](const double (&in)[3][3][3][3], double (&outT)[3][3][3][3], int slot) {
    for (int a = 0; a < 3; ++a)
      for (int bb = 0; bb < 3; ++bb)
        for (int cc = 0; cc < 3; ++cc)
          for (int d = 0; d < 3; ++d) {
            double acc = 0.0;
            for (int p = 0; p < 3; ++p) {
              const int idx[4] = {slot == 0 ? p : a, slot == 1 ? p : bb,
                                  slot == 2 ? p : cc, slot == 3 ? p : d};
              const int free_idx = slot == 0 ? a : slot == 1 ? bb : slot == 2 ? cc : d;
              acc += jet.ginv[free_idx][p] * in[idx[0]][idx[1]][idx[2]][idx[3]];
            }
            outT[a][bb][cc][d] = acc;
          }
  };
  raise(low, t1, 0);
  raise(t1, t2, 1);
  raise(t2, t1, 2);
  raise(t1, t2, 3);
  double rm2 = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int bb = 0; bb < 3; ++bb)
      for (int cc = 0; cc < 3; ++cc)
        for (int d = 0; d < 3; ++d) rm2 += low[a][bb][cc][d] * t2[a][bb][cc][d];
  // normalization matches the radial module: half the ordered contraction
  // (each unordered curvature plane counted twice, not four times)
  inv.rm_norm = std::sqrt(std::max(0.0, 0.5 * rm2));
  return inv;
}

namespace {

double max_row_sum(const CartesianState& s) {
  double worst = 0.0;
  for (const auto& c : s.comp) {
    const Mat3 g = to_matrix(c);
    for (int u = 0; u < 3; ++u) {
      double row = 0.0;
      for (int v = 0; v < 3; ++v) row += std::abs(g[u][v]);
      worst = std::max(worst, row);
    }
  }
  return worst;
}

}  // namespace

CrosscheckReport crosscheck_run(const MetricProfile& profile,
                                const CartesianSpec& spec, double t_check) {
  CrosscheckReport rep;
  rep.t_check = t_check;
  rep.nodes_per_axis = spec.nodes_per_axis;
  rep.half_width = spec.half_width;

  // radial reference run
  SolverConfig cfg;
  cfg.stepper = Stepper::rk4;
  cfg.t_end = t_check;
  cfg.output_interval = t_check;
  cfg.boundary = BoundaryMode::tail_extrapolation;
  cfg.boundary_exponent = -2.0;
  const Trajectory traj = evolve(profile, cfg);
  if (!traj.completed()) {
    rep.note = "radial run ended with " + to_string(traj.events.back().kind);
    return rep;
  }
  const StencilSet st = derivative_stencils(*profile.grid);
  const CurvatureField cf =
      curvature_field(traj.final_profile(), st, profile.dimension);
  rep.r_origin_1d = cf.scalar[0];
  rep.sup_rm_1d = *std::max_element(cf.rm_norm.begin(), cf.rm_norm.end());

  // Cartesian run: explicit RK2 with frozen boundary
  CartesianState state = init_from_profile(profile, spec);
  const double dt_cap = state.h * state.h / 12.0 / max_row_sum(state);
  const int steps = std::max(1, static_cast<int>(std::ceil(t_check / (0.9 * dt_cap))));
  const double dt = t_check / steps;
  try {
    std::vector<std::array<double, 6>> stage(state.comp.size());
    for (int step = 0; step < steps; ++step) {
      const auto k1 = rhs_deturck(state);
      CartesianState mid = state;
      for (std::size_t q = 0; q < state.comp.size(); ++q)
        for (int c = 0; c < 6; ++c) mid.comp[q][c] += dt * k1[q][c];
      const auto k2 = rhs_deturck(mid);
      for (std::size_t q = 0; q < state.comp.size(); ++q)
        for (int c = 0; c < 6; ++c)
          state.comp[q][c] += 0.5 * dt * (k1[q][c] + k2[q][c]);
      state.time += dt;
    }
  } catch (const std::domain_error& err) {
    rep.note = err.what();
    return rep;
  }

  // origin value: with no node at x = 0 on an even grid, sample the two
  // shells nearest the origin and extrapolate the rotationally symmetric
  // profile R(x) = R0 + c|x|^2 to zero; on odd grids the center node is it
  const int lo = (state.m - 1) / 2, hi = state.m / 2;
  if (lo == hi) {
    rep.r_origin_3d = curvature_invariants_at(state, lo, lo, lo).scalar;
  } else {
    double shell1 = 0.0;  // 8 nodes at |x|^2 = 3/4 h^2
    int count1 = 0;
    for (int i = lo; i <= hi; ++i)
      for (int j = lo; j <= hi; ++j)
        for (int k = lo; k <= hi; ++k) {
          shell1 += curvature_invariants_at(state, i, j, k).scalar;
          ++count1;
        }
    shell1 /= count1;
    double shell2 = 0.0;  // 24 nodes at |x|^2 = 11/4 h^2
    int count2 = 0;
    const int far[2] = {lo - 1, hi + 1};
    for (int axis = 0; axis < 3; ++axis)
      for (int fq = 0; fq < 2; ++fq)
        for (int a = lo; a <= hi; ++a)
          for (int b = lo; b <= hi; ++b) {
            int idx[3] = {a, a, b};
            idx[axis] = far[fq];
            if (axis == 0) { idx[1] = a; idx[2] = b; }
            if (axis == 1) { idx[0] = a; idx[2] = b; }
            if (axis == 2) { idx[0] = a; idx[1] = b; }
            shell2 += curvature_invariants_at(state, idx[0], idx[1], idx[2]).scalar;
            ++count2;
          }
    shell2 /= count2;
    rep.r_origin_3d = (11.0 * shell1 - 3.0 * shell2) / 8.0;
  }
  double sup_rm = 0.0;
  for (int i = 2; i + 2 < state.m; ++i)
    for (int j = 2; j + 2 < state.m; ++j)
      for (int k = 2; k + 2 < state.m; ++k)
        sup_rm = std::max(sup_rm, curvature_invariants_at(state, i, j, k).rm_norm);
  rep.sup_rm_3d = sup_rm;

  const double denom = std::max(std::abs(rep.r_origin_1d), 1e-300);
  rep.rel_diff = std::abs(rep.r_origin_1d - rep.r_origin_3d) / denom;
  rep.sup_rm_rel_diff =
      std::abs(rep.sup_rm_1d - rep.sup_rm_3d) / std::max(rep.sup_rm_1d, 1e-300);
  rep.completed = true;
  return rep;
}

}  // namespace ricci
