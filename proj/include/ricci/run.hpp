#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ricci/cartesian.hpp"
#include "ricci/flow.hpp"
#include "ricci/geometry.hpp"
#include "ricci/grid.hpp"
#include "ricci/profile.hpp"

namespace ricci {

/// One experiment: grid + profile + solver + outputs. Parsed from a single
/// JSON document; every run echoes its config back into the output directory.
struct RunConfig {
  GridSpec grid;
  ProfileSpec profile;
  SolverConfig solver;
  double diagnostics_cadence = 0.5;
  std::string preset;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;
  bool inject_fault = false;  // test mode: corrupts the checked quantity
  CartesianSpec cartesian;
  double t_check = 0.05;

  void validate() const;
};

RunConfig default_config();
RunConfig config_for_preset(const std::string& name);

/// Parses a config JSON document (text), applying values over the defaults.
RunConfig parse_config(const std::string& json_text, const RunConfig& base);

struct CheckResult {
  std::string name;
  bool pass = true;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct RunReport {
  std::string preset;
  std::vector<CheckResult> checks;
  int status = 0;  // 0 iff every enabled check passed

  void add(CheckResult c);
};

extern const std::vector<std::string> kPresetNames;

/// Executes a named experiment, writes its CSV/JSON artifacts under
/// cfg.output_dir, and returns the report (status != 0 iff a check failed).
RunReport run_preset(const std::string& name, const RunConfig& cfg, std::ostream& log);

/// Plain evolution: trajectory.csv + run.json sidecar.
RunReport run_evolve(const RunConfig& cfg, std::ostream& log);

/// Evolution plus the full diagnostic battery: curvature.csv, mass.csv,
/// ledger.json, report.json.
RunReport run_diagnose(const RunConfig& cfg, std::ostream& log);

struct SweepCell {
  double amplitude = 0.0;
  int dimension = 0;
  bool valid = false;
  bool pass = false;
  std::string detail;
  double sup_w = 0.0, inf_w = 0.0;
  double sup_lambda2_decay = 0.0;  // max over the run of |lambda2| (1 + t)
  std::string terminal_event;
};

struct SweepReport {
  std::vector<SweepCell> cells;
  int status = 0;
};

/// Independent runs over amplitude x dimension, executed concurrently;
/// invalid cells are flagged and the sweep continues.
SweepReport sweep(const RunConfig& base, const std::vector<double>& amplitudes,
                  const std::vector<int>& dimensions, std::ostream& log);

// ---- artifact writers (17 significant digits, fixed column orders) ----
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_curvature_csv(const std::string& path, const Trajectory& traj, int n);
void write_mass_csv(const std::string& path, const std::vector<double>& t,
                    const std::vector<double>& b, const std::vector<double>& mu,
                    const std::vector<double>& adm);
void write_run_json(const std::string& path, const RunConfig& cfg,
                    const Trajectory& traj);
void write_ledger_json(const std::string& path, const BoundLedger& ledger,
                       const DecayReport* decay);
void write_report_json(const std::string& path, const RunReport& report);
std::string format_g17(double v);

}  // namespace ricci
