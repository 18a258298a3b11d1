#pragma once

#include "specmap/baseline.hpp"
#include "specmap/io.hpp"
#include "specmap/metrics.hpp"
#include "specmap/scene.hpp"
#include "specmap/solver.hpp"

#include <string>

namespace specmap {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Counter-based stream derivation: every consumer seeds its own engine from
/// (master, stream, counter), so runs never share or race a global generator.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t counter) {
  std::uint64_t s = splitmix64(master ^ 0xD1B54A32D192ED03ull);
  s = splitmix64(s ^ (stream + 1) * 0x9E3779B97F4A7C15ull);
  s = splitmix64(s ^ (counter + 1) * 0xBF58476D1CE4E5B9ull);
  return s;
}

struct ExperimentConfig {
  SceneConfig scene;
  SamplingPlan plan;
  SolverConfig solver;
  KernelConfig kernel;

  std::string sweep_param;        // mu | nu | rho | M | sigma_s | d_c | eta | C | N | kprime
  std::vector<Real> sweep_values;
  int n_seeds = 1;
  std::uint64_t master_seed = 0;

  bool run_baseline = false;      // also run the per-band regression baseline
  bool paired_on_grid = false;    // add an on-grid twin of every run (shared field)
  enum class SpectrumMode { Sinc2, Blocks } spectrum_mode = SpectrumMode::Sinc2;
  Real block_overlap = 0.0;       // Blocks mode overlap when eta is not swept
  Real m_rule_c1 = 0.0;           // when > 0, m = round(c1 * N * log10(N)^2)
  bool plan_m_explicit = false;   // plan.m given directly (otherwise rho * cells)
  Real plan_rho = 0.05;

  bool record_runtime = false;    // keep false for byte-identical reruns
  bool save_estimates = false;
  std::string out_path;

  void validate() const;
};

struct RunMetrics {
  Real sweep_value = 0;
  int seed = 0;
  Real nmse_tensor = 0, nmse_phi = 0, nmse_fields = 0;
  Real runtime_s = 0;
  bool converged = false;
  bool failed = false;
};

/// Seed-averaged summary per sweep value.
struct MetricsRow {
  Real sweep_value = 0;
  Real nmse_tensor = 0, nmse_phi = 0, nmse_fields = 0;
  Real se_tensor = 0, se_phi = 0, se_fields = 0;
  int n_runs = 0;
};

struct ExperimentResult {
  std::vector<RunMetrics> proposed;
  std::vector<RunMetrics> baseline;   // empty unless run_baseline
  std::vector<RunMetrics> on_grid;    // empty unless paired_on_grid
  std::vector<MetricsRow> summary;
  std::vector<MetricsRow> summary_baseline;
  std::vector<MetricsRow> summary_on_grid;
};

ExperimentConfig experiment_from_keys(const KeyValues& kv);

/// Runs the full sweep; per-seed randomness is shared across sweep values so
/// a sweep is a paired comparison. Writes one CSV per method variant next to
/// `out_path` when it is nonempty.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1);

void write_metrics_csv(const std::string& path, const std::vector<RunMetrics>& rows);
std::vector<MetricsRow> summarize(const std::vector<RunMetrics>& rows);

}  // namespace specmap
