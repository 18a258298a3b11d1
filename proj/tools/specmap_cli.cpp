// Command line front end: scene generation, solving, closed-form validation,
// experiment sweeps and estimate comparison.

#include "specmap/analysis.hpp"
#include "specmap/bench.hpp"
#include "specmap/io.hpp"
#include "specmap/metrics.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace specmap;

KeyValues load_config(const std::string& path) {
  if (path.empty()) {
    std::istringstream empty;
    return KeyValues::parse(empty);
  }
  return KeyValues::parse_file(path);
}

int cmd_generate(const std::string& config, std::uint64_t seed, const std::string& out) {
  KeyValues kv = load_config(config);
  SceneConfig scene = scene_from_keys(kv);
  SamplingPlan plan = plan_from_keys(kv, scene);
  kv.require_all_used();
  if (seed != static_cast<std::uint64_t>(-1)) scene.rng_seed = seed;
  Scene sc = generate_scene(scene, plan);
  MeasurementFile mf{scene, plan, sc.measurements};
  if (out.empty()) {
    save_measurements(std::cout, mf);
  } else {
    save_measurements(out, mf);
    std::cout << "wrote " << out << " (" << sc.measurements.m() << " sensors, "
              << scene.n_bands << " bands)\n";
  }
  return 0;
}

int cmd_solve(const std::string& input, const std::string& config, const std::string& out,
              std::uint64_t seed, bool verbose) {
  MeasurementFile mf = load_measurements(input);
  KeyValues kv = load_config(config);
  SolverConfig solver = solver_from_keys(kv);
  KernelConfig kernel = kernel_from_keys(kv);
  int n_sources = kv.get_int("solver.r", mf.scene.n_sources);
  kv.require_all_used();
  InitOptions init;
  init.seed = (seed == static_cast<std::uint64_t>(-1)) ? 0 : seed;
  Estimate est = solve(mf.measurements, mf.scene.grid(), kernel, solver, n_sources, init,
                       verbose ? &std::cerr : nullptr);
  if (out.empty()) {
    save_estimate(std::cout, est);
  } else {
    save_estimate(out, est);
    std::cout << "wrote " << out << " (converged " << (est.converged ? 1 : 0) << ", "
              << est.objective_trace.size() - 1 << " iterations)\n";
  }
  return 0;
}

int cmd_analyze(int trials, std::uint64_t seed, const std::string& out) {
  auto rows = validation_report(trials, seed == static_cast<std::uint64_t>(-1) ? 7 : seed);
  if (out.empty()) {
    write_validation_report(std::cout, rows);
  } else {
    std::ofstream f(out);
    if (!f) throw ConfigError("cannot write report: " + out);
    write_validation_report(f, rows);
  }
  for (const auto& r : rows)
    if (!r.pass) return 1;
  return 0;
}

int cmd_bench(const std::string& config, std::uint64_t seed, const std::string& out, int threads) {
  KeyValues kv = KeyValues::parse_file(config);
  ExperimentConfig cfg = experiment_from_keys(kv);
  kv.require_all_used();
  if (seed != static_cast<std::uint64_t>(-1)) cfg.master_seed = seed;
  if (!out.empty()) cfg.out_path = out;
  if (cfg.out_path.empty()) throw ConfigError("bench needs an output path (config key out or --out)");
  ExperimentResult res = run_experiment(cfg, threads);
  std::cout << "sweep_value nmse_tensor(se) nmse_phi(se) nmse_fields(se) runs\n";
  for (const auto& row : res.summary)
    std::cout << row.sweep_value << " " << row.nmse_tensor << "(" << row.se_tensor << ") "
              << row.nmse_phi << "(" << row.se_phi << ") " << row.nmse_fields << "("
              << row.se_fields << ") " << row.n_runs << "\n";
  return 0;
}

int cmd_nmse(const std::string& est_path, const std::string& ref_path) {
  Estimate est = load_estimate(est_path);
  Estimate ref = load_estimate(ref_path);
  std::cout << "nmse_tensor = " << format_real(nmse(est.tensor_hat, ref.tensor_hat)) << "\n";
  std::cout << "nmse_phi = " << format_real(nmse(Matrix(est.spectra_hat), Matrix(ref.spectra_hat)))
            << "\n";
  std::cout << "nmse_fields = " << format_real(nmse(est.fields_hat, ref.fields_hat)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectrum map construction via integrated interpolation and "
               "block-term decomposition"};
  app.require_subcommand(1);

  std::string config, out, input, ref;
  std::uint64_t seed = static_cast<std::uint64_t>(-1);
  int threads = 1;
  int trials = 100000;
  bool verbose = false;

  auto* gen = app.add_subcommand("generate", "synthesize a scene and write measurements");
  gen->add_option("--config", config, "scene/plan config file");
  gen->add_option("--seed", seed, "override the scene seed");
  gen->add_option("--out", out, "output measurement file");

  auto* solve_cmd = app.add_subcommand("solve", "reconstruct maps from a measurement file");
  solve_cmd->add_option("--in", input, "measurement file")->required();
  solve_cmd->add_option("--config", config, "solver/kernel config file");
  solve_cmd->add_option("--seed", seed, "solver init seed");
  solve_cmd->add_option("--out", out, "output estimate file");
  solve_cmd->add_flag("--verbose", verbose, "log one line per outer iteration");

  auto* analyze = app.add_subcommand("analyze", "closed-form vs Monte Carlo variance report");
  analyze->add_option("--trials", trials, "Monte Carlo trials per formula");
  analyze->add_option("--seed", seed, "Monte Carlo seed");
  analyze->add_option("--out", out, "report file (stdout otherwise)");

  auto* bench = app.add_subcommand("bench", "run a sweep experiment from a config file");
  bench->add_option("--config", config, "experiment config file")->required();
  bench->add_option("--seed", seed, "override the master seed");
  bench->add_option("--out", out, "metrics CSV path");
  bench->add_option("--threads", threads, "parallel runs");

  auto* nm = app.add_subcommand("nmse", "compare two estimate files");
  nm->add_option("--est", input, "estimate file")->required();
  nm->add_option("--ref", ref, "reference estimate file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(config, seed, out);
    if (solve_cmd->parsed()) return cmd_solve(input, config, out, seed, verbose);
    if (analyze->parsed()) return cmd_analyze(trials, seed, out);
    if (bench->parsed()) return cmd_bench(config, seed, out, threads);
    if (nm->parsed()) return cmd_nmse(input, ref);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
