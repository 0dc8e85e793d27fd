#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "ricci/flow.hpp"
#include "ricci/profile.hpp"

namespace ricci {

struct CartesianSpec {
  int nodes_per_axis = 48;  // M
  double half_width = 8.0;  // cube [-L, L]^3
};

/// Metric perturbation h_ij = g_ij - delta_ij on a cubic grid, stored as the
/// six independent components (xx, xy, xz, yy, yz, zz) per node.
struct CartesianState {
  int m = 0;
  double half_width = 0.0;
  double h = 0.0;  // spacing
  double time = 0.0;
  std::vector<std::array<double, 6>> comp;

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * m + j) * m + k;
  }
  double coord(int i) const { return -half_width + h * i; }
  bool interior(int i) const { return i >= 1 && i + 1 < m; }

  /// 3x3 symmetric metric at a node.
  std::array<double, 9> metric_at(std::size_t idx) const;
};

/// h_ij(x) = (f^2(|x|) - 1) x_i x_j / |x|^2, interpolated monotone-cubic with
/// the r -> 0 limit 0. The profile must cover radius sqrt(3) L.
CartesianState init_from_profile(const MetricProfile& profile,
                                 const CartesianSpec& spec);

/// DeTurck flow right-hand side -2 R_ij + grad_i W_j + grad_j W_i (with
/// W^k = g^{pq} Gamma^k_pq) from centered second-order differences; boundary
/// nodes return zero (frozen). Throws std::domain_error when g stops being
/// positive definite.
std::vector<std::array<double, 6>> rhs_deturck(const CartesianState& state);

/// Diagnostic vector field W^k per node (zero on the boundary layer).
std::vector<std::array<double, 3>> deturck_W(const CartesianState& state);

struct CartesianInvariants {
  double scalar = 0.0;
  double rm_norm = 0.0;  // sqrt(R_ijkl R^ijkl)
};

/// Scalar curvature and |Rm| at one interior node.
CartesianInvariants curvature_invariants_at(const CartesianState& state, int i,
                                            int j, int k);

struct CrosscheckReport {
  double t_check = 0.0;
  double r_origin_1d = 0.0, r_origin_3d = 0.0, rel_diff = 0.0;
  double sup_rm_1d = 0.0, sup_rm_3d = 0.0, sup_rm_rel_diff = 0.0;
  int nodes_per_axis = 0;
  double half_width = 0.0;
  bool completed = false;
  std::string note;
};

/// Evolves the radial solver (RK4) and the Cartesian solver (explicit RK2,
/// frozen boundary) to t_check and compares the scalar curvature at the
/// origin and the sup of |Rm|; both are gauge-safe comparands.
CrosscheckReport crosscheck_run(const MetricProfile& profile,
                                const CartesianSpec& spec, double t_check);

}  // namespace ricci
