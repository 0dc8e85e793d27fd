#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ricci/run.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool inject_fault = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration JSON");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--threads", opts.threads, "worker threads for sweeps");
  cmd->add_option("--seed", opts.seed, "seed for sampled checks")
      ->each([&](const std::string&) { opts.seed_set = true; });
}

ricci::RunConfig resolve(const CommonOpts& opts, const ricci::RunConfig& base) {
  ricci::RunConfig cfg = base;
  if (!opts.config_path.empty()) cfg = ricci::parse_config(slurp(opts.config_path), cfg);
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  if (opts.threads > 0) cfg.threads = opts.threads;
  if (opts.seed_set) cfg.seed = opts.seed;
  cfg.inject_fault = opts.inject_fault;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotationally symmetric asymptotically flat Ricci flow laboratory"};
  app.require_subcommand(1);

  CommonOpts evolve_opts, diagnose_opts, preset_opts, sweep_opts, cross_opts,
      norm_opts;
  std::string preset_name;
  std::vector<double> sweep_amplitudes{0.1, 0.3, 0.5};
  std::vector<int> sweep_dimensions{3, 4, 5};

  auto* cmd_evolve = app.add_subcommand("evolve", "integrate the flow, write trajectory");
  add_common(cmd_evolve, evolve_opts);

  auto* cmd_diagnose =
      app.add_subcommand("diagnose", "evolve plus curvature, mass, and bound checks");
  add_common(cmd_diagnose, diagnose_opts);

  auto* cmd_preset = app.add_subcommand("preset", "run a named experiment");
  cmd_preset->add_option("name", preset_name, "preset name")
      ->required()
      ->check(CLI::IsMember(ricci::kPresetNames));
  add_common(cmd_preset, preset_opts);
  cmd_preset->add_flag("--inject-fault", preset_opts.inject_fault,
                       "test mode: corrupt the checked quantity");

  auto* cmd_sweep = app.add_subcommand("sweep", "parameter sweep over amplitude x dimension");
  add_common(cmd_sweep, sweep_opts);
  cmd_sweep->add_option("--amplitudes", sweep_amplitudes, "bump amplitudes");
  cmd_sweep->add_option("--dimensions", sweep_dimensions, "dimensions n");

  auto* cmd_cross = app.add_subcommand("crosscheck", "radial vs Cartesian comparison");
  add_common(cmd_cross, cross_opts);

  auto* cmd_norm = app.add_subcommand("norm-audit", "weighted norm and mollifier audit");
  add_common(cmd_norm, norm_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_evolve->parsed())
      return ricci::run_evolve(resolve(evolve_opts, ricci::default_config()), std::cout)
          .status;
    if (cmd_diagnose->parsed())
      return ricci::run_diagnose(resolve(diagnose_opts, ricci::default_config()),
                                 std::cout)
          .status;
    if (cmd_preset->parsed()) {
      const auto cfg = resolve(preset_opts, ricci::config_for_preset(preset_name));
      return ricci::run_preset(preset_name, cfg, std::cout).status;
    }
    if (cmd_sweep->parsed()) {
      auto cfg = resolve(sweep_opts, ricci::default_config());
      cfg.validate();
      return ricci::sweep(cfg, sweep_amplitudes, sweep_dimensions, std::cout).status;
    }
    if (cmd_cross->parsed()) {
      const auto cfg = resolve(cross_opts, ricci::config_for_preset("crosscheck"));
      return ricci::run_preset("crosscheck", cfg, std::cout).status;
    }
    if (cmd_norm->parsed()) {
      const auto cfg = resolve(norm_opts, ricci::config_for_preset("norm-audit"));
      return ricci::run_preset("norm-audit", cfg, std::cout).status;
    }
  } catch (const std::invalid_argument& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
