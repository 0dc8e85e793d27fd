#include "ricci/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ricci/interpolation.hpp"
#include "ricci/weighted.hpp"

namespace ricci {

using nlohmann::json;

const std::vector<std::string> kPresetNames = {
    "flat-fixed-point", "max-principle",    "decay-study", "mass-constancy",
    "quasilocal-decay", "aux-residuals",    "crosscheck",  "norm-audit"};

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void RunConfig::validate() const {
  if (grid.cells < 16)
    throw std::invalid_argument("RunConfig: production runs need at least 16 cells");
  profile.validate();
  solver.validate();
  if (!(diagnostics_cadence > 0.0) || diagnostics_cadence > solver.t_end)
    throw std::invalid_argument("RunConfig: diagnostics cadence must lie in (0, t_end]");
  if (threads < 1) throw std::invalid_argument("RunConfig: threads must be >= 1");
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.grid = GridSpec{Stretching::sinh_stretched, 512, 100.0, 1.05, 4.0};
  cfg.profile.family = BumpFamily{0.5, 2.0};
  cfg.profile.dimension = 3;
  cfg.solver = SolverConfig{};
  cfg.solver.boundary_exponent = -2.0;
  cfg.seed = 12345;
  return cfg;
}

RunConfig config_for_preset(const std::string& name) {
  RunConfig cfg = default_config();
  cfg.preset = name;
  if (name == "flat-fixed-point") {
    cfg.profile.family = FlatFamily{};
    cfg.solver.t_end = 1.0;
    cfg.solver.output_interval = 0.25;
  } else if (name == "max-principle" || name == "decay-study" ||
             name == "quasilocal-decay" || name == "aux-residuals") {
    // defaults already match
  } else if (name == "mass-constancy") {
    cfg.profile.family = MassTailFamily{0.1, std::nullopt, 1.0};
    cfg.solver.t_end = 5.0;
    cfg.solver.output_interval = 0.25;
    cfg.solver.boundary = BoundaryMode::tail_extrapolation;
    cfg.solver.boundary_exponent = 2.0 - cfg.profile.dimension;
  } else if (name == "crosscheck") {
    cfg.profile.family = BumpFamily{0.2, 2.0};
    cfg.cartesian = CartesianSpec{48, 8.0};
    cfg.t_check = 0.05;
  } else if (name == "norm-audit") {
    // grid only
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return cfg;
}

RunConfig parse_config(const std::string& json_text, const RunConfig& base) {
  RunConfig cfg = base;
  const json doc = json::parse(json_text);

  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    if (g.contains("stretching"))
      cfg.grid.stretching = stretching_from_string(g["stretching"].get<std::string>());
    if (g.contains("cells")) cfg.grid.cells = g["cells"].get<std::size_t>();
    if (g.contains("r_max")) cfg.grid.r_max = g["r_max"].get<double>();
    if (g.contains("ratio")) cfg.grid.ratio = g["ratio"].get<double>();
    if (g.contains("scale")) cfg.grid.scale = g["scale"].get<double>();
  }
  if (doc.contains("profile")) {
    const auto& p = doc["profile"];
    if (p.contains("dimension")) cfg.profile.dimension = p["dimension"].get<int>();
    const std::string family = p.value("family", "");
    if (family == "flat") {
      cfg.profile.family = FlatFamily{};
    } else if (family == "bump") {
      BumpFamily b;
      b.amplitude = p.value("amplitude", 0.5);
      b.width = p.value("width", 2.0);
      cfg.profile.family = b;
    } else if (family == "mass_tail") {
      MassTailFamily mt;
      mt.mass = p.value("mass", 0.1);
      if (p.contains("delta_tail")) mt.delta_tail = p["delta_tail"].get<double>();
      mt.cutoff_radius = p.value("cutoff_radius", 1.0);
      cfg.profile.family = mt;
    } else if (family == "table") {
      cfg.profile.family = load_table_csv(p.at("path").get<std::string>());
    } else if (!family.empty()) {
      throw std::invalid_argument("unknown profile family '" + family + "'");
    }
  }
  bool boundary_exponent_given = false;
  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    if (s.contains("stepper")) {
      const std::string st = s["stepper"].get<std::string>();
      if (st == "rk4") cfg.solver.stepper = Stepper::rk4;
      else if (st == "trapezoidal") cfg.solver.stepper = Stepper::trapezoidal;
      else throw std::invalid_argument("unknown stepper '" + st + "'");
    }
    if (s.contains("cfl_safety")) cfg.solver.cfl_safety = s["cfl_safety"].get<double>();
    if (s.contains("t_end")) cfg.solver.t_end = s["t_end"].get<double>();
    if (s.contains("output_interval"))
      cfg.solver.output_interval = s["output_interval"].get<double>();
    if (s.contains("f_cap")) cfg.solver.f_cap = s["f_cap"].get<double>();
    if (s.contains("boundary")) {
      const std::string b = s["boundary"].get<std::string>();
      if (b == "dirichlet_one") cfg.solver.boundary = BoundaryMode::dirichlet_one;
      else if (b == "tail_extrapolation")
        cfg.solver.boundary = BoundaryMode::tail_extrapolation;
      else throw std::invalid_argument("unknown boundary mode '" + b + "'");
    }
    if (s.contains("boundary_exponent")) {
      cfg.solver.boundary_exponent = s["boundary_exponent"].get<double>();
      boundary_exponent_given = true;
    }
  }
  // a mass-tail profile seeds the extrapolation exponent unless overridden
  if (!boundary_exponent_given)
    if (auto expo = cfg.profile.tail_exponent()) cfg.solver.boundary_exponent = *expo;

  if (doc.contains("diagnostics_cadence"))
    cfg.diagnostics_cadence = doc["diagnostics_cadence"].get<double>();
  if (doc.contains("preset")) cfg.preset = doc["preset"].get<std::string>();
  if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
  if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();
  if (doc.contains("cartesian")) {
    const auto& c = doc["cartesian"];
    if (c.contains("nodes_per_axis"))
      cfg.cartesian.nodes_per_axis = c["nodes_per_axis"].get<int>();
    if (c.contains("half_width")) cfg.cartesian.half_width = c["half_width"].get<double>();
  }
  if (doc.contains("t_check")) cfg.t_check = doc["t_check"].get<double>();
  return cfg;
}

// ---------------------------------------------------------------- artifacts

namespace {

json config_to_json(const RunConfig& cfg) {
  json g{{"stretching", to_string(cfg.grid.stretching)},
         {"cells", cfg.grid.cells},
         {"r_max", cfg.grid.r_max}};
  if (cfg.grid.stretching == Stretching::geometric) g["ratio"] = cfg.grid.ratio;
  if (cfg.grid.stretching == Stretching::sinh_stretched) g["scale"] = cfg.grid.scale;

  json p{{"dimension", cfg.profile.dimension}};
  if (std::holds_alternative<FlatFamily>(cfg.profile.family)) {
    p["family"] = "flat";
  } else if (const auto* b = std::get_if<BumpFamily>(&cfg.profile.family)) {
    p["family"] = "bump";
    p["amplitude"] = b->amplitude;
    p["width"] = b->width;
  } else if (const auto* mt = std::get_if<MassTailFamily>(&cfg.profile.family)) {
    p["family"] = "mass_tail";
    p["mass"] = mt->mass;
    p["delta_tail"] = mt->delta_tail.value_or(2.0 - cfg.profile.dimension);
    p["cutoff_radius"] = mt->cutoff_radius;
  } else {
    p["family"] = "table";
  }

  json s{{"stepper", to_string(cfg.solver.stepper)},
         {"cfl_safety", cfg.solver.cfl_safety},
         {"t_end", cfg.solver.t_end},
         {"output_interval", cfg.solver.output_interval},
         {"f_cap", cfg.solver.f_cap},
         {"boundary", to_string(cfg.solver.boundary)},
         {"boundary_exponent", cfg.solver.boundary_exponent}};

  return json{{"grid", g},
              {"profile", p},
              {"solver", s},
              {"diagnostics_cadence", cfg.diagnostics_cadence},
              {"preset", cfg.preset},
              {"output_dir", cfg.output_dir},
              {"seed", cfg.seed},
              {"threads", cfg.threads},
              {"cartesian", json{{"nodes_per_axis", cfg.cartesian.nodes_per_axis},
                                 {"half_width", cfg.cartesian.half_width}}},
              {"t_check", cfg.t_check}};
}

std::ofstream open_artifact(const std::string& path) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_artifact(path);
  out << "t,r,f\n";
  for (const auto& snap : traj.snapshots)
    for (std::size_t i = 0; i < snap.size(); ++i)
      out << format_g17(snap.time) << ',' << format_g17(snap.r(i)) << ','
          << format_g17(snap.f[i]) << '\n';
}

void write_curvature_csv(const std::string& path, const Trajectory& traj, int n) {
  auto out = open_artifact(path);
  out << "t,r,lambda1,lambda2,R,rm_norm,H\n";
  const StencilSet st = derivative_stencils(*traj.snapshots.front().grid);
  for (const auto& snap : traj.snapshots) {
    const CurvatureField cf = curvature_field(snap, st, n);
    for (std::size_t i = 0; i < snap.size(); ++i)
      out << format_g17(snap.time) << ',' << format_g17(snap.r(i)) << ','
          << format_g17(cf.lambda1[i]) << ',' << format_g17(cf.lambda2[i]) << ','
          << format_g17(cf.scalar[i]) << ',' << format_g17(cf.rm_norm[i]) << ','
          << format_g17(cf.mean_curv[i]) << '\n';
  }
}

void write_mass_csv(const std::string& path, const std::vector<double>& t,
                    const std::vector<double>& b, const std::vector<double>& mu,
                    const std::vector<double>& adm) {
  auto out = open_artifact(path);
  out << "t,b,mu,adm\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    out << format_g17(t[i]) << ',' << format_g17(b[i]) << ',' << format_g17(mu[i])
        << ',' << format_g17(adm[i]) << '\n';
}

void write_run_json(const std::string& path, const RunConfig& cfg,
                    const Trajectory& traj) {
  json events = json::array();
  for (const auto& e : traj.events)
    events.push_back(json{{"time", e.time}, {"event", to_string(e.kind)}});
  json doc{{"config", config_to_json(cfg)},
           {"events", events},
           {"snapshots", traj.snapshots.size()},
           {"final_time", traj.snapshots.back().time}};
  open_artifact(path) << doc.dump(2) << '\n';
}

void write_ledger_json(const std::string& path, const BoundLedger& lg,
                       const DecayReport* decay) {
  json doc{{"dimension", lg.dimension},
           {"c_f2_min", lg.c_f2_min},
           {"c_f2_max", lg.c_f2_max},
           {"c_w_min", lg.c_w_min},
           {"c_w_max", lg.c_w_max},
           {"c_u_plus", lg.c_u_plus},
           {"c_v_plus", lg.c_v_plus},
           {"c_u_minus", lg.c_u_minus},
           {"c_u_abs", lg.c_u_abs},
           {"c_r_min", lg.c_r_min},
           {"k1", lg.k1},
           {"k2", lg.k2},
           {"c_y_cap", lg.c_y_cap},
           {"c_y_min", lg.c_y_min},
           {"c_lambda2_min", lg.c_lambda2_min},
           {"c_lambda2_max", lg.c_lambda2_max},
           {"c_lambda1_min", lg.c_lambda1_min},
           {"c_lambda1_max", lg.c_lambda1_max},
           {"c_rm", lg.c_rm}};
  if (decay) {
    json checks = json::array();
    for (const auto& c : decay->checks)
      checks.push_back(json{{"name", c.name},
                            {"pass", c.pass},
                            {"margin", c.margin},
                            {"worst_time", c.worst_time},
                            {"worst_radius", c.worst_radius}});
    doc["verification"] = json{{"eps", decay->eps},
                               {"all_pass", decay->all_pass()},
                               {"measured_rm_decay", decay->measured_rm_decay},
                               {"checks", checks}};
  }
  open_artifact(path) << doc.dump(2) << '\n';
}

void write_report_json(const std::string& path, const RunReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks)
    checks.push_back(json{{"name", c.name},
                          {"pass", c.pass},
                          {"value", c.value},
                          {"threshold", c.threshold},
                          {"detail", c.detail}});
  json doc{{"preset", report.preset}, {"status", report.status}, {"checks", checks}};
  open_artifact(path) << doc.dump(2) << '\n';
}

void RunReport::add(CheckResult c) {
  if (!c.pass) status = 1;
  checks.push_back(std::move(c));
}

// ----------------------------------------------------------------- helpers

namespace {

struct PreparedRun {
  std::shared_ptr<const RadialGrid> grid;
  MetricProfile initial;
  Trajectory traj;
};

PreparedRun evolve_config(const RunConfig& cfg) {
  PreparedRun pr;
  pr.grid = std::make_shared<RadialGrid>(build_grid(cfg.grid));
  pr.initial = sample_profile(cfg.profile, pr.grid);
  pr.traj = evolve(pr.initial, cfg.solver);
  return pr;
}

// companion run at half resolution; the scheme-error estimate behind epsilon
double measure_scheme_error(const RunConfig& cfg, const PreparedRun& fine) {
  RunConfig half = cfg;
  half.grid.cells = cfg.grid.cells / 2;
  const PreparedRun coarse = evolve_config(half);
  return self_convergence_error(fine.traj, coarse.traj);
}

double sup_w(const MetricProfile& p) {
  double s = -std::numeric_limits<double>::infinity();
  for (double f : p.f) s = std::max(s, f * f - 1.0);
  return s;
}

double inf_w(const MetricProfile& p) {
  double s = std::numeric_limits<double>::infinity();
  for (double f : p.f) s = std::min(s, f * f - 1.0);
  return s;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

void echo_config(const RunConfig& cfg) {
  open_artifact(out_path(cfg, "config.json")) << config_to_json(cfg).dump(2) << '\n';
}

}  // namespace

RunReport run_evolve(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  echo_config(cfg);
  const PreparedRun pr = evolve_config(cfg);
  write_trajectory_csv(out_path(cfg, "trajectory.csv"), pr.traj);
  write_run_json(out_path(cfg, "run.json"), cfg, pr.traj);

  RunReport rep;
  rep.preset = "evolve";
  CheckResult c{"completed", pr.traj.completed(), pr.traj.snapshots.back().time,
                cfg.solver.t_end,
                "terminal event: " + to_string(pr.traj.events.back().kind)};
  rep.add(c);
  write_report_json(out_path(cfg, "report.json"), rep);
  log << "evolve: " << pr.traj.snapshots.size() << " snapshots, "
      << c.detail << "\n";
  return rep;
}

RunReport run_diagnose(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  echo_config(cfg);
  const PreparedRun pr = evolve_config(cfg);
  const int n = cfg.profile.dimension;
  write_trajectory_csv(out_path(cfg, "trajectory.csv"), pr.traj);
  write_run_json(out_path(cfg, "run.json"), cfg, pr.traj);
  write_curvature_csv(out_path(cfg, "curvature.csv"), pr.traj, n);

  const double eps = 10.0 * measure_scheme_error(cfg, pr);
  const BoundLedger ledger = bound_ledger(pr.initial, n);
  const DecayReport decay = verify_decay(pr.traj, ledger, n, eps);
  write_ledger_json(out_path(cfg, "ledger.json"), ledger, &decay);

  const MassSeries ms = mass_series(pr.traj, SphereFamily::fixed_area(1.0), n);
  write_mass_csv(out_path(cfg, "mass.csv"), ms.times, ms.radii, ms.mu, ms.adm);

  RunReport rep;
  rep.preset = "diagnose";
  rep.add({"completed", pr.traj.completed(), 0, 0,
           "terminal event: " + to_string(pr.traj.events.back().kind)});
  for (const auto& c : decay.checks)
    rep.add({"decay." + c.name, c.pass, c.margin, 0.0,
             "worst at t=" + format_g17(c.worst_time)});
  write_report_json(out_path(cfg, "report.json"), rep);
  log << "diagnose: status " << rep.status << "\n";
  return rep;
}

// ----------------------------------------------------------------- presets

namespace {

RunReport preset_flat_fixed_point(const RunConfig& cfg, std::ostream& log) {
  RunReport rep;
  const PreparedRun pr = evolve_config(cfg);
  double worst = 0.0;
  for (const auto& snap : pr.traj.snapshots)
    worst = std::max(worst, std::max(std::abs(sup_w(snap)), std::abs(inf_w(snap))));
  rep.add({"flat_fixed_point", pr.traj.completed() && worst <= 1e-12, worst, 1e-12,
           "sup |f^2-1| over the run"});
  write_trajectory_csv(out_path(cfg, "trajectory.csv"), pr.traj);
  write_run_json(out_path(cfg, "run.json"), cfg, pr.traj);
  log << "flat-fixed-point: sup|f^2-1| = " << format_g17(worst) << "\n";
  return rep;
}

RunReport preset_max_principle(const RunConfig& cfg, std::ostream& log) {
  RunReport rep;
  PreparedRun pr = evolve_config(cfg);
  const double eps = 10.0 * measure_scheme_error(cfg, pr);
  const BoundLedger ledger = bound_ledger(pr.initial, cfg.profile.dimension);

  if (cfg.inject_fault && pr.traj.snapshots.size() > 2) {
    // test mode: push one interior node of a mid-run snapshot far above the
    // admissible band so the checker must trip
    auto& snap = pr.traj.snapshots[pr.traj.snapshots.size() / 2];
    snap.f[snap.size() / 2] = std::sqrt(1.0 + ledger.c_w_max + 10.0 * eps + 0.1);
  }

  double run_sup = -std::numeric_limits<double>::infinity();
  double run_inf = std::numeric_limits<double>::infinity();
  double f2_min = std::numeric_limits<double>::infinity();
  double f2_max = -std::numeric_limits<double>::infinity();
  for (const auto& snap : pr.traj.snapshots) {
    run_sup = std::max(run_sup, sup_w(snap));
    run_inf = std::min(run_inf, inf_w(snap));
    f2_min = std::min(f2_min, inf_w(snap) + 1.0);
    f2_max = std::max(f2_max, sup_w(snap) + 1.0);
  }
  const double w0_sup = sup_w(pr.traj.snapshots.front());
  const double w0_inf = inf_w(pr.traj.snapshots.front());

  rep.add({"completed", pr.traj.completed(), 0, 0,
           "terminal event: " + to_string(pr.traj.events.back().kind)});
  rep.add({"w_sup", run_sup <= w0_sup + eps, run_sup, w0_sup + eps,
           "sup_t sup_r w vs sup_r w(0) + eps"});
  rep.add({"w_inf", run_inf >= w0_inf - eps, run_inf, w0_inf - eps,
           "inf_t inf_r w vs inf_r w(0) - eps"});
  rep.add({"f2_upper", f2_max <= ledger.c_f2_max + eps, f2_max,
           ledger.c_f2_max + eps, "sup f^2 vs C+_{f2} + eps"});
  rep.add({"f2_lower", f2_min >= ledger.c_f2_min - eps, f2_min,
           ledger.c_f2_min - eps, "inf f^2 vs C-_{f2} - eps"});

  write_trajectory_csv(out_path(cfg, "trajectory.csv"), pr.traj);
  write_run_json(out_path(cfg, "run.json"), cfg, pr.traj);
  write_ledger_json(out_path(cfg, "ledger.json"), ledger, nullptr);
  log << "max-principle: eps = " << format_g17(eps) << ", status " << rep.status
      << "\n";
  return rep;
}

RunReport preset_decay_study(const RunConfig& cfg, std::ostream& log) {
  RunReport rep;
  PreparedRun pr = evolve_config(cfg);
  const int n = cfg.profile.dimension;
  const double eps = 10.0 * measure_scheme_error(cfg, pr);
  const BoundLedger ledger = bound_ledger(pr.initial, n);

  if (cfg.inject_fault && pr.traj.snapshots.size() > 2) {
    auto& snap = pr.traj.snapshots[pr.traj.snapshots.size() / 2];
    for (std::size_t i = 1; i < snap.size(); ++i) {
      // scale lambda2 by 10 post hoc: w -> w' with (1 - 1/f^2) scaled
      const double q = 1.0 - 1.0 / (snap.f[i] * snap.f[i]);
      const double q10 = std::min(10.0 * q, 0.9);
      snap.f[i] = 1.0 / std::sqrt(1.0 - q10);
    }
  }

  const DecayReport decay = verify_decay(pr.traj, ledger, n, eps);
  rep.add({"completed", pr.traj.completed(), 0, 0,
           "terminal event: " + to_string(pr.traj.events.back().kind)});
  for (const auto& c : decay.checks)
    rep.add({"decay." + c.name, c.pass, c.margin, 0.0,
             "min slack, worst at t=" + format_g17(c.worst_time) +
                 " r=" + format_g17(c.worst_radius)});

  // barrier bounds at m = 2 along the run, plus the algebraic identity
  {
    const StencilSet stb = derivative_stencils(*pr.grid);
    double sup_u = -std::numeric_limits<double>::infinity();
    double sup_v = -std::numeric_limits<double>::infinity();
    double inf_y = std::numeric_limits<double>::infinity();
    double identity_gap = 0.0;
    for (const auto& snap : pr.traj.snapshots) {
      const BarrierTriple bt = barrier_functions(snap, stb, snap.time, 2.0);
      for (std::size_t i = 0; i < snap.size(); ++i) {
        sup_u = std::max(sup_u, bt.u[i]);
        sup_v = std::max(sup_v, bt.v[i]);
        inf_y = std::min(inf_y, bt.y[i]);
        identity_gap = std::max(
            identity_gap,
            std::abs(bt.u[i] + bt.v[i] / (snap.f[i] * snap.f[i])));
      }
    }
    rep.add({"barrier.u_upper", sup_u <= ledger.c_u_plus + eps, sup_u,
             ledger.c_u_plus + eps, "sup_t sup_r u_2 vs C+_u + eps"});
    rep.add({"barrier.v_upper", sup_v <= ledger.c_v_plus + eps, sup_v,
             ledger.c_v_plus + eps, "sup_t sup_r v_2 vs C+_v + eps"});
    rep.add({"barrier.y_lower", inf_y >= ledger.c_y_min - eps, inf_y,
             ledger.c_y_min - eps, "inf_t inf_r y_2 vs C-_y - eps"});
    rep.add({"barrier.identity", identity_gap <= 1e-12, identity_gap, 1e-12,
             "max |u_2 + v_2/f^2| over the run"});
  }

  // measured-constant form of the |Rm| decay: sup|Rm|(1+t) on [1, t_end]
  // stays within 10% of its maximum over t <= 1
  const StencilSet st = derivative_stencils(*pr.grid);
  double early = 0.0, late = 0.0;
  for (const auto& snap : pr.traj.snapshots) {
    const CurvatureField cf = curvature_field(snap, st, n);
    const double v =
        *std::max_element(cf.rm_norm.begin(), cf.rm_norm.end()) * (1.0 + snap.time);
    if (snap.time <= 1.0) early = std::max(early, v);
    else late = std::max(late, v);
  }
  rep.add({"rm_measured_decay", late <= 1.1 * early, late, 1.1 * early,
           "sup|Rm|(1+t) on (1, t_end] vs 1.1 x max over t <= 1"});

  write_trajectory_csv(out_path(cfg, "trajectory.csv"), pr.traj);
  write_curvature_csv(out_path(cfg, "curvature.csv"), pr.traj, n);
  write_run_json(out_path(cfg, "run.json"), cfg, pr.traj);
  write_ledger_json(out_path(cfg, "ledger.json"), ledger, &decay);
  log << "decay-study: eps = " << format_g17(eps) << ", status " << rep.status
      << "\n";
  return rep;
}

RunReport preset_mass_constancy(const RunConfig& cfg, std::ostream& log) {
  RunReport rep;
  const int n = cfg.profile.dimension;
  const PreparedRun pr = evolve_config(cfg);
  rep.add({"completed", pr.traj.completed(), 0, 0,
           "terminal event: " + to_string(pr.traj.events.back().kind)});

  MassSeries ms = mass_series(pr.traj, SphereFamily::fixed_area(1.0), n);
  if (cfg.inject_fault)
    for (std::size_t k = ms.adm.size() / 2; k < ms.adm.size(); ++k)
      ms.adm[k] *= 1.10;
  const double mass0 = ms.adm.front();
  double worst_drift = 0.0;
  bool all_defined = std::isfinite(mass0);
  for (double mv : ms.adm) {
    all_defined = all_defined && std::isfinite(mv);
    worst_drift = std::max(worst_drift, std::abs(mv - mass0) / std::abs(mass0));
  }
  rep.add({"adm_constancy", all_defined && worst_drift <= 0.02, worst_drift, 0.02,
           "max |mass(t)-mass(0)|/|mass(0)| under " + to_string(cfg.solver.boundary)});
  write_mass_csv(out_path(cfg, "mass.csv"), ms.times, ms.radii, ms.mu, ms.adm);

  // the same run under the debugging boundary documents the larger drift;
  // the clamped outer node can render individual extrapolations
  // non-convergent, so the drift is measured against the true initial mass
  // over the values that survive
  RunConfig alt = cfg;
  alt.solver.boundary = BoundaryMode::dirichlet_one;
  const PreparedRun pd = evolve_config(alt);
  const MassSeries md = mass_series(pd.traj, SphereFamily::fixed_area(1.0), n);
  double dirichlet_drift = 0.0;
  int withheld = 0;
  for (double mv : md.adm) {
    if (std::isnan(mv)) { ++withheld; continue; }
    dirichlet_drift =
        std::max(dirichlet_drift, std::abs(mv - mass0) / std::abs(mass0));
  }
  rep.add({"adm_drift_dirichlet_reported", true, dirichlet_drift, 0.0,
           "reported, not gated: drift under dirichlet_one vs the initial mass (" +
               std::to_string(withheld) + " estimates withheld)"});
  write_mass_csv(out_path(cfg, "mass_dirichlet.csv"), md.times, md.radii, md.mu,
                 md.adm);

  write_trajectory_csv(out_path(cfg, "trajectory.csv"), pr.traj);
  write_run_json(out_path(cfg, "run.json"), cfg, pr.traj);
  log << "mass-constancy: drift " << format_g17(worst_drift) << " (tail BC), "
      << format_g17(dirichlet_drift) << " (dirichlet), status " << rep.status << "\n";
  return rep;
}

RunReport preset_quasilocal_decay(const RunConfig& cfg, std::ostream& log) {
  RunReport rep;
  const int n = cfg.profile.dimension;
  const PreparedRun pr = evolve_config(cfg);
  const BoundLedger ledger = bound_ledger(pr.initial, n);
  const StencilSet st = derivative_stencils(*pr.grid);
  rep.add({"completed", pr.traj.completed(), 0, 0,
           "terminal event: " + to_string(pr.traj.events.back().kind)});

  const std::vector<SphereFamily> families = {
      SphereFamily::fixed_area(1.0),
      SphereFamily::fixed_volume(4.0 * M_PI / 3.0),
      SphereFamily::fixed_proper_radius(1.0)};

  // ledger-derived uniform bound on |mu|(1+t): with (1+t)|w(t,b)| =
  // 2 b^2 |v_2(t,b)| and |v_2| <= max(C+_v, C+_u C+_f2), the mass obeys
  // |mu|(1+t) <= vol (C+_b)^n 2 Vstar / (C-_f (1 + C-_f))
  const double v_star =
      std::max(ledger.c_v_plus, ledger.c_u_plus * ledger.c_f2_max);
  const double c_f_min = std::sqrt(ledger.c_f2_min);

  bool first = true;
  for (const auto& family : families) {
    const MassSeries ms = mass_series(pr.traj, family, n);
    const RadiusBracket br =
        sphere_radius_bracket(family, ledger.c_f2_min, ledger.c_f2_max, n);
    const double ledger_cap = sphere_volume(n) * std::pow(br.hi, n) * 2.0 * v_star /
                              (c_f_min * (1.0 + c_f_min));

    bool bracket_ok = true;
    double ref = 0.0;
    double worst = 0.0;
    bool sign_ok = true;
    for (std::size_t k = 0; k < ms.times.size(); ++k) {
      const double t = ms.times[k];
      bracket_ok = bracket_ok && ms.radii[k] >= br.lo - 1e-9 &&
                   ms.radii[k] <= br.hi + 1e-9;
      const double decay_value = std::abs(ms.mu[k]) * (1.0 + t);
      if (std::abs(t - 1.0) < 0.26) ref = std::max(ref, decay_value);
      if (t >= 1.0) worst = std::max(worst, decay_value);

      // sign link against lambda2 interpolated from the node field
      const CurvatureField cf = curvature_field(pr.traj.snapshots[k], st, n);
      const MonotoneCubic l2(pr.grid->nodes, cf.lambda2);
      const double lam2_b = l2(ms.radii[k]);
      if (std::abs(ms.mu[k]) > 1e-10 && std::abs(lam2_b) > 1e-12)
        sign_ok = sign_ok && (ms.mu[k] > 0) == (lam2_b > 0);
    }
    rep.add({family.name() + ".radius_bracket", bracket_ok, 0, 0,
             "b(t) within [" + format_g17(br.lo) + ", " + format_g17(br.hi) + "]"});
    rep.add({family.name() + ".mu_decay", worst <= 1.2 * ref, worst, 1.2 * ref,
             "|mu|(1+t) on [1, t_end] vs 1.2 x its value at t = 1"});
    rep.add({family.name() + ".mu_ledger_bound", worst <= ledger_cap, worst,
             ledger_cap, "|mu|(1+t) vs the ledger-derived uniform bound"});
    rep.add({family.name() + ".sign_link", sign_ok, 0, 0,
             "sign(mu) = sign(lambda2(t, b(t)))"});

    const std::string file =
        first ? "mass.csv" : "mass_" + family.name() + ".csv";
    write_mass_csv(out_path(cfg, file), ms.times, ms.radii, ms.mu, ms.adm);
    first = false;
  }

  write_trajectory_csv(out_path(cfg, "trajectory.csv"), pr.traj);
  write_run_json(out_path(cfg, "run.json"), cfg, pr.traj);
  log << "quasilocal-decay: status " << rep.status << "\n";
  return rep;
}

RunReport preset_aux_residuals(const RunConfig& cfg, std::ostream& log) {
  RunReport rep;
  const int n = cfg.profile.dimension;

  struct Level {
    Trajectory traj;
    StencilSet st;
  };
  std::vector<Level> levels;
  double coarse_r1 = 0.0;
  for (int k = 2; k >= 0; --k) {
    RunConfig lv = cfg;
    lv.grid.cells = cfg.grid.cells >> k;
    lv.solver.output_interval = cfg.solver.output_interval * (1 << k);
    PreparedRun pr = evolve_config(lv);
    if (k == 2) coarse_r1 = pr.grid->nodes[1];
    levels.push_back(
        {std::move(pr.traj), derivative_stencils(*pr.grid)});
  }
  // a fixed axis exclusion keeps the max-norm node set comparable across
  // the three grids
  const double r_min = 4.0 * coarse_r1;

  // compare the levels at a common time: order is measured away from the
  // initial parabolic transient, where the solution is uniformly smooth
  const double t_ref = 0.5 * cfg.solver.t_end;
  auto study = [&](const std::string& name,
                   auto&& residual_fn) {
    double res[3];
    for (int k = 0; k < 3; ++k)
      res[k] = residual_fn(levels[k].traj, levels[k].st).at_time(t_ref);
    const double order_coarse = std::log2(res[0] / res[1]);
    const double order_fine = std::log2(res[1] / res[2]);
    rep.add({"residual." + name, order_fine >= 1.9, order_fine, 1.9,
             "orders " + format_g17(order_coarse) + " then " + format_g17(order_fine) +
                 " at t=" + format_g17(t_ref) + "; residuals " + format_g17(res[0]) +
                 " / " + format_g17(res[1]) + " / " + format_g17(res[2])});
  };

  study("w_equation", [&](const Trajectory& t, const StencilSet& s) {
    return residual_w_equation(t, s, n);
  });
  for (double m : {1.5, 1.9}) {
    study("u_equation_m" + format_g17(m),
          [&, m](const Trajectory& t, const StencilSet& s) {
            return residual_auxiliary_pdes(t, s, n, AuxiliaryPde::u_equation, m, r_min);
          });
    study("v_equation_m" + format_g17(m),
          [&, m](const Trajectory& t, const StencilSet& s) {
            return residual_auxiliary_pdes(t, s, n, AuxiliaryPde::v_equation, m, r_min);
          });
    study("y_equation_m" + format_g17(m),
          [&, m](const Trajectory& t, const StencilSet& s) {
            return residual_auxiliary_pdes(t, s, n, AuxiliaryPde::y_equation, m, r_min);
          });
  }
  study("scalar_evolution", [&](const Trajectory& t, const StencilSet& s) {
    return residual_scalar_evolution(t, s, n, r_min);
  });

  write_report_json(out_path(cfg, "residuals.json"), rep);
  log << "aux-residuals: status " << rep.status << "\n";
  return rep;
}

RunReport preset_crosscheck(const RunConfig& cfg, std::ostream& log) {
  RunReport rep;
  const auto grid = std::make_shared<RadialGrid>(build_grid(cfg.grid));
  const MetricProfile initial = sample_profile(cfg.profile, grid);
  const CrosscheckReport base = crosscheck_run(initial, cfg.cartesian, cfg.t_check);
  rep.add({"crosscheck_completed", base.completed, 0, 0, base.note});
  rep.add({"origin_scalar_agreement", base.completed && base.rel_diff <= 0.05,
           base.rel_diff, 0.05,
           "R(origin): 1d " + format_g17(base.r_origin_1d) + ", 3d " +
               format_g17(base.r_origin_3d)});

  rep.add({"sup_rm_agreement", base.completed && base.sup_rm_rel_diff <= 0.2,
           base.sup_rm_rel_diff, 0.2,
           "sup|Rm|: 1d " + format_g17(base.sup_rm_1d) + ", 3d " +
               format_g17(base.sup_rm_3d)});

  CartesianSpec finer = cfg.cartesian;
  finer.nodes_per_axis = cfg.cartesian.nodes_per_axis * 4 / 3;
  const CrosscheckReport fine = crosscheck_run(initial, finer, cfg.t_check);
  rep.add({"refinement_shrinks", fine.completed && fine.rel_diff < base.rel_diff,
           fine.rel_diff, base.rel_diff,
           "rel diff at M=" + std::to_string(finer.nodes_per_axis)});

  json doc;
  doc["t_check"] = base.t_check;
  doc["R_origin_1d"] = base.r_origin_1d;
  doc["R_origin_3d"] = base.r_origin_3d;
  doc["rel_diff"] = base.rel_diff;
  doc["supRm_1d"] = base.sup_rm_1d;
  doc["supRm_3d"] = base.sup_rm_3d;
  doc["grid"]["nodes_per_axis"] = base.nodes_per_axis;
  doc["grid"]["half_width"] = base.half_width;
  doc["refined"]["nodes_per_axis"] = fine.nodes_per_axis;
  doc["refined"]["rel_diff"] = fine.rel_diff;
  doc["refined"]["supRm_3d"] = fine.sup_rm_3d;
  open_artifact(out_path(cfg, "crosscheck.json")) << doc.dump(2) << '\n';
  log << "crosscheck: rel diff " << format_g17(base.rel_diff) << " -> "
      << format_g17(fine.rel_diff) << ", status " << rep.status << "\n";
  return rep;
}

RunReport preset_norm_audit(const RunConfig& cfg, std::ostream& log) {
  RunReport rep;
  const auto grid = std::make_shared<RadialGrid>(build_grid(cfg.grid));
  const int n = cfg.profile.dimension;

  auto sample = [&](auto&& fn, const std::shared_ptr<const RadialGrid>& g) {
    RadialFunction u;
    u.grid = g;
    u.values.resize(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) u.values[i] = fn(g->nodes[i]);
    return u;
  };

  // analytic spot value with a refinement-based quadrature error bar
  const NormSpec spec{0, 2.0, -1.0};
  const RadialFunction u_sigma = sample([](double r) {
    return 1.0 / (1.0 + r * r);
  }, grid);
  const auto norm_c = weighted_norm(u_sigma, spec, n);
  GridSpec fine_spec = cfg.grid;
  fine_spec.cells *= 2;
  const auto fine_grid = std::make_shared<RadialGrid>(build_grid(fine_spec));
  const auto norm_f = weighted_norm(
      sample([](double r) { return 1.0 / (1.0 + r * r); }, fine_grid), spec, n);
  const double quad_bar =
      4.0 / 3.0 * std::abs(norm_c.value - norm_f.value) + norm_c.tail_error + 1e-12;
  const double exact = std::sqrt(4.0 * M_PI / 3.0);
  rep.add({"sigma_norm_spot", std::abs(norm_c.value - exact) <= quad_bar,
           norm_c.value, exact,
           "|computed - sqrt(4pi/3)| vs quadrature error bar " + format_g17(quad_bar)});

  // mollifier: eps-uniform operator norm on three test functions
  const NormSpec mspec{1, 2.0, -1.0};
  std::vector<RadialFunction> tests;
  tests.push_back(sample([](double r) { return std::exp(-r * r); }, grid));
  tests.push_back(sample([](double r) { return 1.0 / ((1.0 + r * r) * (1.0 + r * r)); },
                         grid));
  tests.push_back(sample([](double r) {
    // smooth and compactly supported on [0, 4]
    const double x = r / 4.0;
    return x < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
  }, grid));
  const double eps_set[3] = {0.5, 0.25, 0.125};
  double ratio_lo = std::numeric_limits<double>::infinity(), ratio_hi = 0.0;
  for (const auto& u : tests) {
    const double base_norm = weighted_norm(u, mspec, n).value;
    for (double e : eps_set) {
      const double r = weighted_norm(mollify(u, e), mspec, n).value / base_norm;
      ratio_lo = std::min(ratio_lo, r);
      ratio_hi = std::max(ratio_hi, r);
    }
  }
  const double variation = (ratio_hi - ratio_lo) / (0.5 * (ratio_hi + ratio_lo));
  rep.add({"mollifier_eps_uniform", variation <= 0.10, variation, 0.10,
           "operator-norm ratio spread over eps in {1/2, 1/4, 1/8}"});

  double prev = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  for (double e : eps_set) {
    RadialFunction diff = mollify(tests[2], e);
    for (std::size_t i = 0; i < diff.size(); ++i) diff.values[i] -= tests[2].values[i];
    const double d = weighted_norm(diff, NormSpec{0, 2.0, -1.0}, n).value;
    decreasing = decreasing && d < prev;
    prev = d;
  }
  rep.add({"mollifier_convergence", decreasing, prev, 0,
           "||J_eps u - u|| strictly decreasing over the eps sequence"});

  // dyadic recombination: ratio within a fixed constant, stable under
  // refinement
  const auto dy_c = dyadic_decomposition(u_sigma, spec, n);
  const auto dy_f = dyadic_decomposition(
      sample([](double r) { return 1.0 / (1.0 + r * r); }, fine_grid), spec, n);
  const bool dy_ok = dy_c.ratio > 0.05 && dy_c.ratio < 20.0 &&
                     std::abs(dy_c.ratio - dy_f.ratio) <= 0.05 * dy_c.ratio;
  rep.add({"dyadic_ratio_stable", dy_ok, dy_c.ratio, dy_f.ratio,
           "recombined/direct ratio and its refinement stability"});

  // norm axioms on seeded random pairs
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> amp(-2.0, 2.0), width(0.5, 3.0);
  bool axioms = true;
  for (int trial = 0; trial < 8; ++trial) {
    const double a1 = amp(rng), s1 = width(rng), a2 = amp(rng), s2 = width(rng);
    auto mk = [&](double a, double s) {
      return sample([a, s](double r) { return a * std::exp(-r * r / (s * s)); }, grid);
    };
    const RadialFunction u = mk(a1, s1), v = mk(a2, s2);
    RadialFunction upv = u;
    for (std::size_t i = 0; i < upv.size(); ++i) upv.values[i] += v.values[i];
    for (const NormSpec& ns :
         {NormSpec{0, 2.0, -1.0}, NormSpec{1, 2.0, -1.5}, NormSpec{2, 2.0, -1.0}}) {
      const double nu = weighted_norm(u, ns, n).value;
      const double nv = weighted_norm(v, ns, n).value;
      const double nuv = weighted_norm(upv, ns, n).value;
      axioms = axioms && nuv <= nu + nv + 1e-9 * (nu + nv + 1.0);
      RadialFunction cu = u;
      for (auto& vv : cu.values) vv *= -3.5;
      const double ncu = weighted_norm(cu, ns, n).value;
      axioms = axioms && std::abs(ncu - 3.5 * nu) <= 1e-9 * (1.0 + ncu);
    }
  }
  rep.add({"norm_axioms", axioms, 0, 0,
           "triangle inequality and homogeneity on seeded random pairs"});

  json doc;
  doc["norm_spec"]["k"] = spec.k;
  doc["norm_spec"]["p"] = spec.p;
  doc["norm_spec"]["delta"] = spec.delta;
  doc["sigma_norm"] = norm_c.value;
  doc["sigma_norm_exact"] = exact;
  doc["quadrature_error_bar"] = quad_bar;
  doc["tail_error"] = norm_c.tail_error;
  doc["mollifier_ratio_spread"] = variation;
  doc["dyadic"]["lambda"] = dy_c.lambda;
  doc["dyadic"]["ball"] = dy_c.ball_term;
  doc["dyadic"]["annuli"] = dy_c.annuli;
  doc["dyadic"]["ratio"] = dy_c.ratio;
  doc["dyadic"]["ratio_refined"] = dy_f.ratio;
  open_artifact(out_path(cfg, "norm_audit.json")) << doc.dump(2) << '\n';
  log << "norm-audit: status " << rep.status << "\n";
  return rep;
}

}  // namespace

RunReport run_preset(const std::string& name, const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  echo_config(cfg);
  RunReport rep;
  if (name == "flat-fixed-point") rep = preset_flat_fixed_point(cfg, log);
  else if (name == "max-principle") rep = preset_max_principle(cfg, log);
  else if (name == "decay-study") rep = preset_decay_study(cfg, log);
  else if (name == "mass-constancy") rep = preset_mass_constancy(cfg, log);
  else if (name == "quasilocal-decay") rep = preset_quasilocal_decay(cfg, log);
  else if (name == "aux-residuals") rep = preset_aux_residuals(cfg, log);
  else if (name == "crosscheck") rep = preset_crosscheck(cfg, log);
  else if (name == "norm-audit") rep = preset_norm_audit(cfg, log);
  else throw std::invalid_argument("unknown preset '" + name + "'");
  rep.preset = name;
  write_report_json(out_path(cfg, "report.json"), rep);
  return rep;
}

SweepReport sweep(const RunConfig& base, const std::vector<double>& amplitudes,
                  const std::vector<int>& dimensions, std::ostream& log) {
  SweepReport report;
  std::vector<SweepCell> cells;
  for (double a : amplitudes)
    for (int n : dimensions) {
      SweepCell cell;
      cell.amplitude = a;
      cell.dimension = n;
      cells.push_back(cell);
    }
  report.cells = std::move(cells);
  if (report.cells.empty()) return report;

  std::mutex log_mutex;
  auto worker = [&](std::size_t idx) {
    SweepCell& cell = report.cells[idx];
    try {
      RunConfig cfg = base;
      BumpFamily b;
      if (const auto* bb = std::get_if<BumpFamily>(&base.profile.family)) b = *bb;
      b.amplitude = cell.amplitude;
      cfg.profile.family = b;
      cfg.profile.dimension = cell.dimension;
      cfg.profile.validate();
      cell.valid = true;
      cell.sup_w = -std::numeric_limits<double>::infinity();
      cell.inf_w = std::numeric_limits<double>::infinity();

      const PreparedRun pr = evolve_config(cfg);
      cell.terminal_event = to_string(pr.traj.events.back().kind);
      const StencilSet st = derivative_stencils(*pr.grid);
      for (const auto& snap : pr.traj.snapshots) {
        cell.sup_w = std::max(cell.sup_w, sup_w(snap));
        cell.inf_w = std::min(cell.inf_w, inf_w(snap));
        const auto lambda2 =
            curvature_field(snap, st, cell.dimension).lambda2;
        for (double v : lambda2)
          cell.sup_lambda2_decay =
              std::max(cell.sup_lambda2_decay, std::abs(v) * (1.0 + snap.time));
      }
      cell.pass = pr.traj.completed();
      cell.detail = cell.pass ? "completed" : "terminal: " + cell.terminal_event;
    } catch (const std::exception& err) {
      cell.valid = cell.valid && false;
      cell.pass = false;
      cell.detail = err.what();
    }
    std::lock_guard<std::mutex> lock(log_mutex);
    log << "sweep cell A=" << cell.amplitude << " n=" << cell.dimension << ": "
        << cell.detail << "\n";
  };

  const int threads = std::max(1, base.threads);
  std::vector<std::thread> pool;
  std::size_t next = 0;
  std::mutex next_mutex;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t idx;
        {
          std::lock_guard<std::mutex> lock(next_mutex);
          if (next >= report.cells.size()) return;
          idx = next++;
        }
        worker(idx);
      }
    });
  for (auto& th : pool) th.join();

  for (const auto& cell : report.cells)
    if (cell.valid && !cell.pass) report.status = 1;

  auto out = open_artifact(
      (std::filesystem::path(base.output_dir) / "sweep.csv").string());
  out << "amplitude,dimension,valid,pass,event,sup_w,inf_w,sup_lambda2_decay\n";
  for (const auto& cell : report.cells)
    out << format_g17(cell.amplitude) << ',' << cell.dimension << ','
        << (cell.valid ? 1 : 0) << ',' << (cell.pass ? 1 : 0) << ','
        << cell.terminal_event << ',' << format_g17(cell.sup_w) << ','
        << format_g17(cell.inf_w) << ',' << format_g17(cell.sup_lambda2_decay)
        << '\n';
  return report;
}

}  // namespace ricci
