#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ricci/grid.hpp"

namespace ricci {

struct FlatFamily {};

/// f^2(0,r) = 1 + A r^2 exp(-r^2/s^2) / (1 + r^2)
struct BumpFamily {
  double amplitude = 0.5;  // A > -1
  double width = 2.0;      // s > 0
};

/// f^2(0,r) = 1 + 2 m r^{delta_tail} chi(r/r_c), chi a quintic smoothstep in
/// log r vanishing for argument <= 1/2 and identically 1 for argument >= 2.
/// delta_tail defaults to 2-n when left unset.
struct MassTailFamily {
  double mass = 0.1;
  std::optional<double> delta_tail;  // < 0
  double cutoff_radius = 1.0;        // r_c > 0
};

/// Tabulated f(r); re-interpolated onto the run grid when radii differ.
struct TableFamily {
  std::vector<double> radii;
  std::vector<double> values;
};

struct ProfileSpec {
  std::variant<FlatFamily, BumpFamily, MassTailFamily, TableFamily> family;
  int dimension = 3;  // n >= 3

  /// Throws std::invalid_argument when a family invariant fails.
  void validate() const;
  /// Decay exponent of f^2 - 1 implied by the family (no finite value for
  /// flat/bump/table; mass_tail yields its delta_tail).
  std::optional<double> tail_exponent() const;
};

/// The single metric degree of freedom f(t, .) sampled on a radial grid.
struct MetricProfile {
  std::shared_ptr<const RadialGrid> grid;
  std::vector<double> f;
  double time = 0.0;
  int dimension = 3;

  std::size_t size() const { return f.size(); }
  double r(std::size_t i) const { return grid->nodes[i]; }
  /// f > 0 everywhere and f = 1 at the center node.
  void validate() const;
  std::vector<double> w() const;  // f^2 - 1 per node
};

/// Quintic smoothstep in log r: 0 for x <= 1/2, 1 for x >= 2, C^2 between.
double cutoff_chi(double x);

MetricProfile sample_profile(const ProfileSpec& spec,
                             std::shared_ptr<const RadialGrid> grid);

/// Loads a two-column CSV (r, f) into a TableFamily.
TableFamily load_table_csv(const std::string& path);

struct MinimalSphereReport {
  bool no_minimal_sphere = true;  // max f <= f_cap
  double max_f = 0.0;
  double max_f_radius = 0.0;
  std::size_t max_f_node = 0;
  double min_mean_curvature = 0.0;  // over nodes with r > 0
  double min_mean_curvature_radius = 0.0;
};

MinimalSphereReport check_no_minimal_sphere(const MetricProfile& profile,
                                            double f_cap);

struct AfClassReport {
  double norm_value = 0.0;       // weighted Sobolev norm of f^2 - 1
  double norm_tail_error = 0.0;
  double tail_exponent = 0.0;    // least-squares fit over the outer third
  bool degenerate_tail = false;  // f^2 - 1 below round-off in the tail
  bool pass = false;
  int certified_k = 0;           // norms above k = 2 are not certifiable
  std::string note;
};

/// Weighted H^k_delta diagnostic for asymptotic flatness of class H^k_delta.
/// k must lie in {0, 1, 2}; delta < 0.
AfClassReport check_af_class(const MetricProfile& profile, int k, double delta,
                             double fit_tolerance = 0.25);

}  // namespace ricci
