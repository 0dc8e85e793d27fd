#pragma once

#include <string>
#include <vector>

#include "ricci/flow.hpp"
#include "ricci/grid.hpp"
#include "ricci/profile.hpp"

namespace ricci {

/// Pointwise curvature data of f^2 dr^2 + r^2 g_can at one time.
///
/// lambda1 = f_r/(r f^3) and lambda2 = (1 - 1/f^2)/r^2 are the sectional
/// curvatures in planes containing and orthogonal to dr; center values use
/// parity limits. The scalar curvature is assembled from the Ricci
/// components, so R = 2(n-1)lambda1 + (n-1)(n-2)lambda2 is a genuine
/// cross-check away from the axis.
struct CurvatureField {
  double time = 0.0;
  std::vector<double> lambda1, lambda2, scalar, rm_norm, mean_curv;
  std::vector<double> ric_rr, ric_orb;
};

CurvatureField curvature_field(const MetricProfile& profile, const StencilSet& st,
                               int n);

/// Brown-York quasi-local mass of the hypersphere r = b:
/// mu = b^{n-2} (1 - 1/f(t,b)) vol(S^{n-1}); f interpolated monotone-cubic.
double quasilocal_mass(const MetricProfile& profile, double b, int n);

struct SphereFamily {
  enum class Kind { fixed_area, fixed_volume, fixed_proper_radius } kind =
      Kind::fixed_area;
  double target = 1.0;  // b0, V0, or R0

  static SphereFamily fixed_area(double b0) { return {Kind::fixed_area, b0}; }
  static SphereFamily fixed_volume(double v0) { return {Kind::fixed_volume, v0}; }
  static SphereFamily fixed_proper_radius(double r0) {
    return {Kind::fixed_proper_radius, r0};
  }
  std::string name() const;
};

/// Coordinate radius b(t) of the family sphere on one snapshot; fixed_volume
/// and fixed_proper_radius solve their defining integrals by quadrature and
/// bisection. Throws when the target exceeds the integral over the grid.
double sphere_family_radius(const MetricProfile& profile, const SphereFamily& family,
                            int n);

/// A priori bracket [lo, hi] for b(t) from the f^2 bounds of the initial data.
struct RadiusBracket {
  double lo = 0.0, hi = 0.0;
};
RadiusBracket sphere_radius_bracket(const SphereFamily& family, double c_f2_min,
                                    double c_f2_max, int n);

/// Quasi-local mass history of one sphere family along a trajectory,
/// together with the ADM mass estimate per output time.
struct MassSeries {
  SphereFamily family;
  std::vector<double> times, radii, mu, adm;
};

MassSeries mass_series(const Trajectory& traj, const SphereFamily& family, int n);

struct AdmReport {
  double mass = 0.0;       // (n-1) vol(S^{n-1}) lim r^{n-2}(f^2-1)
  double error_bar = 0.0;  // extrapolation residual estimate
  bool converged = false;  // false when the tail sequence oscillates
  bool tail_ok = false;    // tail exponent <= 2-n (+ tolerance)
  double tail_exponent = 0.0;
  std::string note;
};

/// ADM mass by Richardson extrapolation of r^{n-2}(f^2-1) in 1/r over the
/// outer quarter of nodes.
AdmReport adm_mass(const MetricProfile& profile, int n);

/// Time-weighted barrier functions, m in (0, 2]:
///   u_m = ((1+t)/(r^m+r^2)) (1/f^2 - 1)
///   v_m = ((1+t)/(r^m+r^2)) (f^2 - 1)
///   y_m = ((1+t)/(1+r^{2-m})) r d/dr[ r^{-m}(1/f - 1) ]
/// Center values by the defining limits.
struct BarrierTriple {
  double m = 2.0;
  std::vector<double> u, v, y;
};

BarrierTriple barrier_functions(const MetricProfile& profile, const StencilSet& st,
                                double t, double m);

/// Every constant the decay estimates need, computed from the initial data.
struct BoundLedger {
  int dimension = 3;
  double c_f2_min = 1.0, c_f2_max = 1.0;   // extrema of a^2
  double c_w_min = 0.0, c_w_max = 0.0;     // extrema of a^2 - 1
  double c_u_plus = 0.0;                   // max{1/(2(n-1)), sup u_2(0,.)}
  double c_v_plus = 0.0;                   // max{(C+_f2)^2/6, sup v_2(0,.)}
  double c_u_minus = 0.0;                  // -C+_v / C-_f2
  double c_u_abs = 0.0;                    // max |C+-_u|
  double c_r_min = 0.0;                    // min{-n/2, inf R(0,.)}
  double k1 = 0.0;                         // C_u^2 [1/C-_f + 2(n-2)]
  double k2 = 0.0;                         // 8 C_u
  double c_y_cap = 0.0;                    // C_Y
  double c_y_min = 0.0;                    // min{C_Y, inf y_2(0,.)}
  double c_lambda2_min = 0.0, c_lambda2_max = 0.0;
  double c_lambda1_min = 0.0, c_lambda1_max = 0.0;
  double c_rm = 0.0;  // sqrt(2(n-1) max|C_l1|^2 + (n-1)(n-2) max|C_l2|^2)
};

BoundLedger bound_ledger(const MetricProfile& initial, int n);

struct BoundCheck {
  std::string name;
  bool pass = true;
  double margin = 0.0;  // smallest slack, negative when violated
  double worst_time = 0.0;
  double worst_radius = 0.0;
};

struct DecayReport {
  std::vector<BoundCheck> checks;
  double eps = 0.0;
  double measured_rm_decay = 0.0;  // max over t of sup|Rm| (1+t)
  bool all_pass() const;
};

/// Verifies the 1/(1+t) decay bounds of the ledger along a trajectory, with
/// allowance eps (the scheme-error budget).
DecayReport verify_decay(const Trajectory& traj, const BoundLedger& ledger, int n,
                         double eps);

enum class AuxiliaryPde { u_equation, v_equation, y_equation };

/// Residual of the barrier evolution equations on stored snapshots, centered
/// time differencing, max-norm over interior nodes with r >= 4 r_1.
/// m must lie in (0, 2) (y additionally needs m > 1). min_radius overrides
/// the default axis exclusion, keeping the node set fixed across a
/// refinement study.
ResidualSeries residual_auxiliary_pdes(const Trajectory& traj, const StencilSet& st,
                                       int n, AuxiliaryPde which, double m,
                                       double min_radius = -1.0);

/// Residual of dR/dt = Lap R + xi . grad R + 2 Ric.Ric in the radial gauge,
/// max-norm over interior nodes with r >= 4 r_1 (same axis carve-out as the
/// barrier residuals: differencing the 1/r-amplified curvature twice cannot
/// converge at the node adjacent to the pinned center).
ResidualSeries residual_scalar_evolution(const Trajectory& traj, const StencilSet& st,
                                         int n, double min_radius = -1.0);

}  // namespace ricci
