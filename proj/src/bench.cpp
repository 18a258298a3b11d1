#include "specmap/bench.hpp"

#include "specmap/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <set>

namespace specmap {

void ExperimentConfig::validate() const {
  if (n_seeds < 1) throw ConfigError("ExperimentConfig: n_seeds must be >= 1");
  if (sweep_values.empty()) throw ConfigError("ExperimentConfig: sweep needs at least one value");
  static const std::set<std::string> known{"mu", "nu", "rho", "M", "sigma_s",
                                           "d_c", "eta", "C", "N", "kprime"};
  if (!known.count(sweep_param))
    throw ConfigError("ExperimentConfig: unknown sweep parameter '" + sweep_param + "'");
  if (sweep_param == "eta" && spectrum_mode != SpectrumMode::Blocks)
    throw ConfigError("ExperimentConfig: an eta sweep requires the block spectrum mode");
  for (Real v : sweep_values) {
    if (sweep_param == "eta" && !(v >= 0 && v < 1))
      throw ConfigError("ExperimentConfig: eta values must lie in [0,1)");
    if ((sweep_param == "rho" || sweep_param == "C" || sweep_param == "sigma_s" ||
         sweep_param == "d_c") && v < 0)
      throw ConfigError("ExperimentConfig: negative value for sweep " + sweep_param);
    if ((sweep_param == "M" || sweep_param == "N" || sweep_param == "kprime") && v < 1)
      throw ConfigError("ExperimentConfig: sweep " + sweep_param + " needs values >= 1");
  }
}

namespace {

struct RunOutput {
  RunMetrics proposed;
  RunMetrics baseline;
  RunMetrics on_grid;
};

Matrix normalized_blocks(Real overlap, int n_bands) {
  Matrix phi = two_source_spectrum(overlap, n_bands);
  for (int r = 0; r < phi.rows(); ++r) phi.row(r) *= n_bands / phi.row(r).sum();
  return phi;
}

struct ResolvedRun {
  SceneConfig scene;
  SamplingPlan plan;
  SolverConfig solver;
};

ResolvedRun resolve(const ExperimentConfig& cfg, Real value) {
  ResolvedRun rr{cfg.scene, cfg.plan, cfg.solver};
  Real rho = cfg.plan_rho;
  Real overlap = cfg.block_overlap;

  if (cfg.sweep_param == "mu") rr.solver.mu = value;
  else if (cfg.sweep_param == "nu") rr.solver.nu = value;
  else if (cfg.sweep_param == "rho") rho = value;
  else if (cfg.sweep_param == "M") rr.plan.m = static_cast<int>(std::lround(value));
  else if (cfg.sweep_param == "sigma_s") rr.scene.shadow_sigma = value;
  else if (cfg.sweep_param == "d_c") rr.scene.shadow_corr_dist_m = value;
  else if (cfg.sweep_param == "eta") overlap = value;
  else if (cfg.sweep_param == "C") rr.plan.weight_c = value;
  else if (cfg.sweep_param == "kprime") rr.plan.k_prime = static_cast<int>(std::lround(value));
  else if (cfg.sweep_param == "N") {
    const int n = static_cast<int>(std::lround(value));
    rr.scene.n1 = n;
    rr.scene.n2 = n;
  }

  if (cfg.m_rule_c1 > 0) {
    const Real n = rr.scene.n1;
    rr.plan.m = std::max(1, static_cast<int>(std::lround(cfg.m_rule_c1 * n * std::pow(std::log10(n), 2))));
  } else if (!cfg.plan_m_explicit && cfg.sweep_param != "M") {
    rr.plan.m = std::max(1, static_cast<int>(std::lround(rho * rr.scene.n1 * rr.scene.n2)));
  }
  if (cfg.spectrum_mode == ExperimentConfig::SpectrumMode::Blocks) {
    if (rr.scene.n_sources != 2)
      throw ConfigError("block spectrum mode is defined for two sources");
    rr.scene.fixed_spectra = normalized_blocks(overlap, rr.scene.n_bands);
  }
  return rr;
}

RunMetrics failed_run(Real value, int seed) {
  RunMetrics m;
  m.sweep_value = value;
  m.seed = seed;
  m.nmse_tensor = m.nmse_phi = m.nmse_fields = std::numeric_limits<Real>::quiet_NaN();
  m.failed = true;
  return m;
}

GroundTruth slice_truth(const GroundTruth& gt, int offset, int count) {
  GroundTruth out = gt;
  out.extra_points.assign(gt.extra_points.begin() + offset,
                          gt.extra_points.begin() + offset + count);
  out.field_at_extra = gt.field_at_extra.middleCols(offset, count);
  return out;
}

RunOutput run_single(const ExperimentConfig& cfg, int value_index, int seed_index) {
  const Real value = cfg.sweep_values[value_index];
  ResolvedRun rr = resolve(cfg, value);
  rr.scene.rng_seed = derive_seed(cfg.master_seed, 0, seed_index);
  rr.scene.validate();
  rr.plan.validate(rr.scene.n_bands);

  // The scene is realized once over both sensor location sets (the off-grid
  // draws and their snapped twins), so an on-grid run shares the shadowing
  // realization with its off-grid partner.
  Rng scene_rng(rr.scene.rng_seed);
  SamplingPlan plan_off = rr.plan;
  plan_off.on_grid = false;
  SamplingPlan plan_on = rr.plan;
  plan_on.on_grid = true;

  const GridSpec grid = rr.scene.grid();
  std::vector<Vec2> sensors_off = draw_sensor_locations(rr.scene, plan_off, scene_rng);
  // On-grid twin: the same draws snapped to their cell centers, so the pair
  // isolates the effect of sensor positions leaving the grid.
  std::vector<Vec2> sensors_on;
  sensors_on.reserve(sensors_off.size());
  for (const auto& z : sensors_off) {
    auto [i, j] = grid.nearest_cell(z);
    sensors_on.push_back(grid.cell_center(i, j));
  }
  std::vector<Vec2> extra = sensors_off;
  extra.insert(extra.end(), sensors_on.begin(), sensors_on.end());
  GroundTruth truth_all = generate_ground_truth(rr.scene, extra, scene_rng);
  const int m = plan_off.m;

  RunOutput out;
  out.proposed = failed_run(value, seed_index);
  out.baseline = failed_run(value, seed_index);
  out.on_grid = failed_run(value, seed_index);

  auto evaluate = [&](const GroundTruth& truth, const SamplingPlan& plan, std::uint64_t noise_seed,
                      RunMetrics& slot) {
    Rng noise_rng(noise_seed);
    MeasurementSet meas = sample_measurements(truth, rr.scene, plan, noise_rng);
    InitOptions init;
    init.seed = derive_seed(cfg.master_seed, 1, seed_index);
    auto t0 = std::chrono::steady_clock::now();
    Estimate est;
    try {
      est = solve(meas, grid, cfg.kernel, rr.solver, rr.scene.n_sources, init);
    } catch (const Error&) {
      return;  // slot stays failed
    }
    auto t1 = std::chrono::steady_clock::now();
    Alignment aligned = align_sources(est, truth);
    slot.failed = false;
    slot.converged = est.converged;
    slot.runtime_s = cfg.record_runtime ? std::chrono::duration<Real>(t1 - t0).count() : 0.0;
    slot.nmse_tensor = nmse(aligned.estimate.tensor_hat, truth.tensor);
    slot.nmse_phi = nmse(Matrix(aligned.estimate.spectra_hat), Matrix(truth.spectra));
    slot.nmse_fields = nmse(aligned.estimate.fields_hat, truth.fields);
    if (cfg.save_estimates && !cfg.out_path.empty()) {
      std::string stem = cfg.out_path;
      if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") stem.resize(stem.size() - 4);
      save_estimate(stem + "_est_v" + std::to_string(value_index) + "_s" +
                        std::to_string(seed_index) + ".txt",
                    aligned.estimate);
    }
    return;
  };

  const std::uint64_t noise_seed = derive_seed(cfg.master_seed, 2, seed_index);
  const bool main_on_grid = rr.plan.on_grid && !cfg.paired_on_grid;
  GroundTruth truth_main = slice_truth(truth_all, main_on_grid ? m : 0, m);
  const SamplingPlan& plan_main = main_on_grid ? plan_on : plan_off;
  evaluate(truth_main, plan_main, noise_seed, out.proposed);

  if (cfg.run_baseline && !out.proposed.failed) {
    Rng noise_rng(noise_seed);
    MeasurementSet meas = sample_measurements(truth_main, rr.scene, plan_main, noise_rng);
    auto t0 = std::chrono::steady_clock::now();
    try {
      BandEstimate be = lpr_per_band(meas, grid, cfg.kernel);
      auto t1 = std::chrono::steady_clock::now();
      out.baseline.failed = false;
      out.baseline.converged = true;
      out.baseline.runtime_s =
          cfg.record_runtime ? std::chrono::duration<Real>(t1 - t0).count() : 0.0;
      out.baseline.nmse_tensor = nmse(be.as_tensor(), truth_main.tensor);
      out.baseline.nmse_phi = std::numeric_limits<Real>::quiet_NaN();
      out.baseline.nmse_fields = std::numeric_limits<Real>::quiet_NaN();
    } catch (const Error&) {
    }
  }

  if (cfg.paired_on_grid) {
    GroundTruth truth_on = slice_truth(truth_all, m, m);
    evaluate(truth_on, plan_on, noise_seed, out.on_grid);
  }
  return out;
}

}  // namespace

std::vector<MetricsRow> summarize(const std::vector<RunMetrics>& rows) {
  std::map<Real, std::vector<const RunMetrics*>> by_value;
  std::vector<Real> order;
  for (const auto& r : rows) {
    if (!by_value.count(r.sweep_value)) order.push_back(r.sweep_value);
    by_value[r.sweep_value].push_back(&r);
  }
  std::vector<MetricsRow> out;
  for (Real v : order) {
    MetricsRow row;
    row.sweep_value = v;
    std::vector<Real> t, p, f;
    for (const auto* r : by_value[v]) {
      if (r->failed) continue;
      t.push_back(r->nmse_tensor);
      p.push_back(r->nmse_phi);
      f.push_back(r->nmse_fields);
    }
    auto mean_se = [](const std::vector<Real>& xs, Real& mean, Real& se) {
      std::vector<Real> finite;
      for (Real x : xs)
        if (std::isfinite(x)) finite.push_back(x);
      if (finite.empty()) {
        mean = se = std::numeric_limits<Real>::quiet_NaN();
        return;
      }
      mean = 0;
      for (Real x : finite) mean += x;
      mean /= finite.size();
      Real var = 0;
      for (Real x : finite) var += (x - mean) * (x - mean);
      se = finite.size() > 1 ? std::sqrt(var / (finite.size() - 1) / finite.size()) : 0.0;
    };
    row.n_runs = static_cast<int>(t.size());
    mean_se(t, row.nmse_tensor, row.se_tensor);
    mean_se(p, row.nmse_phi, row.se_phi);
    mean_se(f, row.nmse_fields, row.se_fields);
    out.push_back(row);
  }
  return out;
}

void write_metrics_csv(const std::string& path, const std::vector<RunMetrics>& rows) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write metrics table: " + path);
  f << "sweep_value,seed,nmse_tensor,nmse_phi,nmse_fields,runtime_s,converged\n";
  for (const auto& r : rows) {
    f << format_real(r.sweep_value) << "," << r.seed << "," << format_real(r.nmse_tensor) << ","
      << format_real(r.nmse_phi) << "," << format_real(r.nmse_fields) << ","
      << format_real(r.runtime_s) << "," << (r.converged ? 1 : 0) << "\n";
  }
}

ExperimentConfig experiment_from_keys(const KeyValues& kv) {
  ExperimentConfig cfg;
  cfg.scene = scene_from_keys(kv);
  cfg.plan = plan_from_keys(kv, cfg.scene);
  cfg.solver = solver_from_keys(kv);
  cfg.kernel = kernel_from_keys(kv);
  cfg.plan_m_explicit = kv.has("plan.m");
  cfg.plan_rho = kv.get_real("plan.rho", 0.05);
  cfg.sweep_param = kv.get_str("sweep.param", "");
  cfg.sweep_values = kv.get_reals("sweep.values");
  cfg.n_seeds = kv.get_int("seeds", 1);
  cfg.master_seed = kv.get_u64("master_seed", 0);
  cfg.run_baseline = kv.get_bool("baseline", false);
  cfg.paired_on_grid = kv.get_bool("paired_on_grid", false);
  std::string mode = kv.get_str("spectrum.mode", "sinc2");
  if (mode == "sinc2") cfg.spectrum_mode = ExperimentConfig::SpectrumMode::Sinc2;
  else if (mode == "blocks") cfg.spectrum_mode = ExperimentConfig::SpectrumMode::Blocks;
  else throw ConfigError("spectrum.mode must be sinc2|blocks");
  cfg.block_overlap = kv.get_real("spectrum.eta", 0.0);
  cfg.m_rule_c1 = kv.get_real("plan.m_rule_c1", 0.0);
  cfg.record_runtime = kv.get_bool("record_runtime", false);
  cfg.save_estimates = kv.get_bool("save_estimates", false);
  cfg.out_path = kv.get_str("out", "");
  cfg.validate();
  return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const int n_values = static_cast<int>(cfg.sweep_values.size());
  const int total = n_values * cfg.n_seeds;
  std::vector<RunOutput> outputs(total);

  auto work = [&](int idx) { outputs[idx] = run_single(cfg, idx / cfg.n_seeds, idx % cfg.n_seeds); };
  if (threads <= 1) {
    for (int i = 0; i < total; ++i) work(i);
  } else {
    std::atomic<int> next{0};
    auto drain = [&] {
      for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1)) work(i);
    };
    std::vector<std::future<void>> pool;
    for (int t = 0; t < std::min(threads, total); ++t)
      pool.push_back(std::async(std::launch::async, drain));
    for (auto& f : pool) f.get();
  }

  ExperimentResult res;
  for (const auto& o : outputs) res.proposed.push_back(o.proposed);
  if (cfg.run_baseline)
    for (const auto& o : outputs) res.baseline.push_back(o.baseline);
  if (cfg.paired_on_grid)
    for (const auto& o : outputs) res.on_grid.push_back(o.on_grid);
  res.summary = summarize(res.proposed);
  res.summary_baseline = summarize(res.baseline);
  res.summary_on_grid = summarize(res.on_grid);

  if (!cfg.out_path.empty()) {
    write_metrics_csv(cfg.out_path, res.proposed);
    std::string stem = cfg.out_path;
    if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") stem.resize(stem.size() - 4);
    if (cfg.run_baseline) write_metrics_csv(stem + "_baseline.csv", res.baseline);
    if (cfg.paired_on_grid) write_metrics_csv(stem + "_ongrid.csv", res.on_grid);
  }
  return res;
}

}  // namespace specmap
