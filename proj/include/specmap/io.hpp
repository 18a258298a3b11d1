#pragma once

#include "specmap/scene.hpp"
#include "specmap/solver.hpp"
#include "specmap/types.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <string>

namespace specmap {

/// Shortest decimal form that round-trips an IEEE double exactly.
std::string format_real(Real v);

/// `key = value` configuration text; '#' starts a comment. Unknown keys are
/// flagged after parsing so typos fail loudly.
struct KeyValues {
  std::map<std::string, std::string> values;
  mutable std::set<std::string> used;

  static KeyValues parse(std::istream& is);
  static KeyValues parse_file(const std::string& path);

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get_str(const std::string& key, const std::string& fallback) const;
  Real get_real(const std::string& key, Real fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<Real> get_reals(const std::string& key) const;  // comma separated
  void require_all_used() const;  // throws ConfigError listing unused keys
};

SceneConfig scene_from_keys(const KeyValues& kv);
SamplingPlan plan_from_keys(const KeyValues& kv, const SceneConfig& scene);
SolverConfig solver_from_keys(const KeyValues& kv);
KernelConfig kernel_from_keys(const KeyValues& kv);

/// Measurement file: scene + plan header, then one record per sensor
/// `x y band:value ...`. The round trip is bit exact.
struct MeasurementFile {
  SceneConfig scene;
  SamplingPlan plan;
  MeasurementSet measurements;
};
void save_measurements(std::ostream& os, const MeasurementFile& mf);
void save_measurements(const std::string& path, const MeasurementFile& mf);
MeasurementFile load_measurements(std::istream& is);
MeasurementFile load_measurements(const std::string& path);

/// Estimate file: spectra, per-source fields and the objective trace; the
/// tensor is rebuilt from fields and spectra on load.
void save_estimate(std::ostream& os, const Estimate& est);
void save_estimate(const std::string& path, const Estimate& est);
Estimate load_estimate(std::istream& is);
Estimate load_estimate(const std::string& path);

}  // namespace specmap
