#pragma once

#include <string>
#include <vector>

#include "ricci/grid.hpp"
#include "ricci/profile.hpp"

namespace ricci {

enum class Stepper { rk4, trapezoidal };
enum class BoundaryMode { dirichlet_one, tail_extrapolation };
enum class EventKind { completed, blow_up, minimal_sphere_cap, step_underflow };

std::string to_string(Stepper s);
std::string to_string(BoundaryMode m);
std::string to_string(EventKind e);

struct SolverConfig {
  Stepper stepper = Stepper::rk4;
  double cfl_safety = 0.8;          // sigma in (0, 1]
  double t_end = 20.0;
  double output_interval = 0.5;     // snapshot cadence
  double f_cap = 100.0;             // blow-up / minimal-sphere cap
  BoundaryMode boundary = BoundaryMode::tail_extrapolation;
  double boundary_exponent = -1.0;  // decay exponent for tail extrapolation
  double dt_floor = 1e-13;

  void validate() const;
};

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::completed;
};

/// Time-ordered metric profiles plus the event log. At most one terminal
/// event; time stamps strictly increase.
struct Trajectory {
  std::vector<MetricProfile> snapshots;
  std::vector<Event> events;

  bool completed() const;
  const MetricProfile& final_profile() const { return snapshots.back(); }
};

/// Right-hand side of the master evolution equation
///   df/dt = f_rr/f^2 - 2 f_r^2/f^3 + ((n-2)/r - 1/(r f^2)) f_r
///           - (n-2)(f^2-1)/(r^2 f).
/// At r = 0 the 1/r terms are closed by parity (f_r/r -> f_rr(0),
/// (f^2-1)/r^2 -> (f^2)_rr(0)/2); the boundary node entry is left to the
/// boundary closure and returned as 0. Throws std::domain_error when f is
/// not positive everywhere.
std::vector<double> rhs_master(const MetricProfile& profile, const StencilSet& st,
                               int n);

/// Stable step size: sigma * min_i gap_i^2 f_i^2 / 2 for the explicit
/// stepper, sigma * min_i gap_i for the semi-implicit one.
double stable_dt(const MetricProfile& profile, const SolverConfig& config);

/// Integrates the master equation to t_end or a terminal event. The center
/// node is pinned to f = 1; the outer node follows the configured boundary
/// mode. Requires the initial profile to pass check_no_minimal_sphere.
Trajectory evolve(const MetricProfile& initial, const SolverConfig& config);

/// DeTurck 1-form component xi_1 = (n-2)(f^2-1)/r + f_r/f; zero at r = 0 by
/// parity.
std::vector<double> deturck_vector(const MetricProfile& profile,
                                   const StencilSet& st, int n);

struct ResidualSeries {
  std::vector<double> times;      // interior output times
  std::vector<double> residuals;  // max-norm residual per time
  double max() const;
  /// Residual at the stored time nearest t; refinement studies compare
  /// levels at a common time, away from the initial parabolic transient.
  double at_time(double t) const;
};

/// Consistency check of the w = f^2 - 1 evolution equation: centered time
/// differencing of stored snapshots against the spatial operator
///   w_rr/f^2 - 3 w_r^2/(2 f^4) + ((n-2)/r - 1/(r f^2)) w_r - 2(n-2) w/r^2.
/// Needs at least 3 snapshots.
ResidualSeries residual_w_equation(const Trajectory& traj, const StencilSet& st,
                                   int n);

/// Max over common nodes and output times of |w_a - w_b| for two runs of the
/// same experiment at nested resolutions; the scheme-error estimate behind
/// every epsilon allowance.
double self_convergence_error(const Trajectory& fine, const Trajectory& coarse);

}  // namespace ricci
