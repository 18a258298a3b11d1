#include "specmap/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace specmap {

std::string format_real(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof probe, "%.*g", prec, v);
    if (std::strtod(probe, nullptr) == v) return probe;
  }
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

Real parse_real(const std::string& s, const std::string& what) {
  if (s == "inf") return std::numeric_limits<Real>::infinity();
  char* end = nullptr;
  Real v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError("could not parse number '" + s + "' for " + what);
  return v;
}

}  // namespace

KeyValues KeyValues::parse(std::istream& is) {
  KeyValues kv;
  std::string line;
  while (std::getline(is, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line without '=': " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line with empty key: " + line);
    kv.values[key] = value;
  }
  return kv;
}

KeyValues KeyValues::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  return parse(f);
}

std::string KeyValues::get_str(const std::string& key, const std::string& fallback) const {
  used.insert(key);
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

Real KeyValues::get_real(const std::string& key, Real fallback) const {
  used.insert(key);
  auto it = values.find(key);
  return it == values.end() ? fallback : parse_real(it->second, key);
}

int KeyValues::get_int(const std::string& key, int fallback) const {
  return static_cast<int>(get_real(key, fallback));
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) const {
  used.insert(key);
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  return std::strtoull(it->second.c_str(), nullptr, 10);
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  used.insert(key);
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw ConfigError("boolean key '" + key + "' has value '" + v + "'");
}

std::vector<Real> KeyValues::get_reals(const std::string& key) const {
  used.insert(key);
  auto it = values.find(key);
  std::vector<Real> out;
  if (it == values.end()) return out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_real(item, key));
  }
  return out;
}

void KeyValues::require_all_used() const {
  std::string unknown;
  for (const auto& [k, v] : values)
    if (!used.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

SceneConfig scene_from_keys(const KeyValues& kv) {
  SceneConfig c;
  c.area_side_m = kv.get_real("scene.area_side_m", c.area_side_m);
  c.n1 = kv.get_int("scene.n1", c.n1);
  c.n2 = kv.get_int("scene.n2", c.n2);
  c.n_sources = kv.get_int("scene.n_sources", c.n_sources);
  c.n_bands = kv.get_int("scene.n_bands", c.n_bands);
  c.tx_power_w = kv.get_real("scene.tx_power_w", c.tx_power_w);
  c.friis_c0 = kv.get_real("scene.friis_c0", c.friis_c0);
  c.source_height_m = kv.get_real("scene.source_height_m", c.source_height_m);
  c.shadow_sigma = kv.get_real("scene.shadow_sigma", c.shadow_sigma);
  c.shadow_corr_dist_m = kv.get_real("scene.shadow_corr_dist_m", c.shadow_corr_dist_m);
  c.sigma_eta = kv.get_real("scene.sigma_eta", c.sigma_eta);
  c.snr_db = kv.get_real("scene.snr_db", c.snr_db);
  c.rng_seed = kv.get_u64("scene.rng_seed", c.rng_seed);
  std::string model = kv.get_str("scene.prop_model", "friis");
  if (model == "friis") c.prop_model = PropagationModel::Friis;
  else if (model == "exp") c.prop_model = PropagationModel::ExpDecay;
  else if (model == "log") c.prop_model = PropagationModel::LogDistance;
  else throw ConfigError("scene.prop_model must be friis|exp|log");
  c.prop_alpha = kv.get_real("scene.prop_alpha", c.prop_alpha);
  c.prop_beta = kv.get_real("scene.prop_beta", c.prop_beta);
  std::string shadow = kv.get_str("scene.shadow_mode", "log10");
  if (shadow == "log10") c.shadow_mode = ShadowMode::Log10Additive;
  else if (shadow == "db") c.shadow_mode = ShadowMode::DbFactor;
  else if (shadow == "linear") c.shadow_mode = ShadowMode::LinearAdditive;
  else throw ConfigError("scene.shadow_mode must be log10|db|linear");
  c.literal_sinc_arg = kv.get_bool("scene.literal_sinc_arg", false);
  std::vector<Real> sx = kv.get_reals("scene.source_x");
  std::vector<Real> sy = kv.get_reals("scene.source_y");
  if (sx.size() != sy.size())
    throw ConfigError("scene.source_x and scene.source_y lengths differ");
  for (size_t i = 0; i < sx.size(); ++i) c.source_locations.push_back({sx[i], sy[i]});
  return c;
}

SamplingPlan plan_from_keys(const KeyValues& kv, const SceneConfig& scene) {
  SamplingPlan p;
  if (kv.has("plan.m")) {
    p.m = kv.get_int("plan.m", 0);
  } else {
    Real rho = kv.get_real("plan.rho", 0.05);
    p.m = std::max(1, static_cast<int>(std::lround(rho * scene.n1 * scene.n2)));
  }
  p.on_grid = kv.get_bool("plan.on_grid", false);
  std::string scheme = kv.get_str("plan.band_scheme", "full");
  if (scheme == "full") p.scheme = SamplingPlan::BandScheme::Full;
  else if (scheme == "random") p.scheme = SamplingPlan::BandScheme::UniformRandom;
  else if (scheme == "weighted") p.scheme = SamplingPlan::BandScheme::WeightedTwoPopulation;
  else throw ConfigError("plan.band_scheme must be full|random|weighted");
  p.k_prime = kv.get_int("plan.k_prime", scene.n_bands / 2);
  p.weight_c = kv.get_real("plan.weight_c", 1.0);
  return p;
}

SolverConfig solver_from_keys(const KeyValues& kv) {
  SolverConfig c;
  c.nu = kv.get_real("solver.nu", c.nu);
  c.mu = kv.get_real("solver.mu", c.mu);
  c.mu_spectral = kv.get_bool("solver.mu_spectral", c.mu_spectral);
  c.max_outer = kv.get_int("solver.max_outer", c.max_outer);
  c.outer_tol = kv.get_real("solver.outer_tol", c.outer_tol);
  c.svt.mu = 0;
  c.svt.delta = kv.get_real("solver.svt_delta", c.svt.delta);
  c.svt.max_iter = kv.get_int("solver.svt_max_iter", c.svt.max_iter);
  c.svt.tol = kv.get_real("solver.svt_tol", c.svt.tol);
  c.theta_ridge = kv.get_real("solver.theta_ridge", c.theta_ridge);
  std::string interp = kv.get_str("solver.interp", "stride:2");
  if (interp == "full") {
    c.interp_set = InterpSet::full();
  } else if (interp.rfind("stride:", 0) == 0) {
    c.interp_set = InterpSet::strided(std::stoi(interp.substr(7)));
  } else {
    throw ConfigError("solver.interp must be full or stride:<n>");
  }
  return c;
}

KernelConfig kernel_from_keys(const KeyValues& kv) {
  if (kv.has("kernel.bandwidth")) return KernelConfig::fixed(kv.get_real("kernel.bandwidth", 0));
  return KernelConfig::min_neighbors(kv.get_int("kernel.m0", 14));
}

namespace {

void write_scene_keys(std::ostream& os, const SceneConfig& c) {
  os << "scene.area_side_m = " << format_real(c.area_side_m) << "\n";
  os << "scene.n1 = " << c.n1 << "\n";
  os << "scene.n2 = " << c.n2 << "\n";
  os << "scene.n_sources = " << c.n_sources << "\n";
  os << "scene.n_bands = " << c.n_bands << "\n";
  os << "scene.tx_power_w = " << format_real(c.tx_power_w) << "\n";
  os << "scene.friis_c0 = " << format_real(c.friis_c0) << "\n";
  os << "scene.source_height_m = " << format_real(c.source_height_m) << "\n";
  os << "scene.shadow_sigma = " << format_real(c.shadow_sigma) << "\n";
  os << "scene.shadow_corr_dist_m = " << format_real(c.shadow_corr_dist_m) << "\n";
  os << "scene.sigma_eta = " << format_real(c.sigma_eta) << "\n";
  os << "scene.snr_db = " << format_real(c.snr_db) << "\n";
  os << "scene.rng_seed = " << c.rng_seed << "\n";
  os << "scene.prop_model = "
     << (c.prop_model == PropagationModel::Friis ? "friis"
         : c.prop_model == PropagationModel::ExpDecay ? "exp" : "log") << "\n";
  os << "scene.prop_alpha = " << format_real(c.prop_alpha) << "\n";
  os << "scene.prop_beta = " << format_real(c.prop_beta) << "\n";
  os << "scene.shadow_mode = "
     << (c.shadow_mode == ShadowMode::Log10Additive ? "log10"
         : c.shadow_mode == ShadowMode::DbFactor ? "db" : "linear") << "\n";
  os << "scene.literal_sinc_arg = " << (c.literal_sinc_arg ? 1 : 0) << "\n";
  if (!c.source_locations.empty()) {
    std::string xs, ys;
    for (const auto& s : c.source_locations) {
      xs += (xs.empty() ? "" : ",") + format_real(s.x());
      ys += (ys.empty() ? "" : ",") + format_real(s.y());
    }
    os << "scene.source_x = " << xs << "\n";
    os << "scene.source_y = " << ys << "\n";
  }
}

void write_plan_keys(std::ostream& os, const SamplingPlan& p) {
  os << "plan.m = " << p.m << "\n";
  os << "plan.on_grid = " << (p.on_grid ? 1 : 0) << "\n";
  os << "plan.band_scheme = "
     << (p.scheme == SamplingPlan::BandScheme::Full ? "full"
         : p.scheme == SamplingPlan::BandScheme::UniformRandom ? "random" : "weighted") << "\n";
  os << "plan.k_prime = " << p.k_prime << "\n";
  os << "plan.weight_c = " << format_real(p.weight_c) << "\n";
}

}  // namespace

void save_measurements(std::ostream& os, const MeasurementFile& mf) {
  os << "specmap-measurements 1\n";
  write_scene_keys(os, mf.scene);
  write_plan_keys(os, mf.plan);
  os << "sensors = " << mf.measurements.m() << "\n";
  for (int m = 0; m < mf.measurements.m(); ++m) {
    os << format_real(mf.measurements.locations[m].x()) << " "
       << format_real(mf.measurements.locations[m].y());
    for (int k = 0; k < mf.measurements.k(); ++k)
      if (mf.measurements.band_mask(m, k))
        os << " " << k << ":" << format_real(mf.measurements.readings(m, k));
    os << "\n";
  }
}

void save_measurements(const std::string& path, const MeasurementFile& mf) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write measurement file: " + path);
  save_measurements(f, mf);
}

MeasurementFile load_measurements(std::istream& is) {
  std::string magic;
  std::getline(is, magic);
  if (trim(magic) != "specmap-measurements 1")
    throw ConfigError("not a measurement file (bad magic line)");

  std::string header;
  std::string line;
  int sensors = -1;
  while (std::getline(is, line)) {
    if (trim(line).rfind("sensors", 0) == 0) {
      sensors = std::stoi(trim(line).substr(trim(line).find('=') + 1));
      break;
    }
    header += line + "\n";
  }
  if (sensors < 0) throw ConfigError("measurement file missing the sensors line");

  std::istringstream hs(header);
  KeyValues kv = KeyValues::parse(hs);
  MeasurementFile mf;
  mf.scene = scene_from_keys(kv);
  mf.plan = plan_from_keys(kv, mf.scene);
  kv.require_all_used();

  mf.measurements.on_grid = mf.plan.on_grid;
  mf.measurements.band_mask = BoolArray::Constant(sensors, mf.scene.n_bands, false);
  mf.measurements.readings = Matrix::Zero(sensors, mf.scene.n_bands);
  for (int m = 0; m < sensors; ++m) {
    if (!std::getline(is, line)) throw ConfigError("measurement file truncated");
    std::istringstream ls(line);
    Real x, y;
    if (!(ls >> x >> y)) throw ConfigError("bad sensor record: " + line);
    mf.measurements.locations.push_back({x, y});
    std::string pair;
    while (ls >> pair) {
      size_t colon = pair.find(':');
      if (colon == std::string::npos) throw ConfigError("bad band:value pair: " + pair);
      int k = std::stoi(pair.substr(0, colon));
      if (k < 0 || k >= mf.scene.n_bands) throw ConfigError("band index out of range: " + pair);
      mf.measurements.band_mask(m, k) = true;
      mf.measurements.readings(m, k) = parse_real(pair.substr(colon + 1), "reading");
    }
    if (!mf.measurements.band_mask.row(m).any())
      throw ConfigError("sensor record with no measured bands");
  }
  return mf;
}

MeasurementFile load_measurements(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open measurement file: " + path);
  return load_measurements(f);
}

void save_estimate(std::ostream& os, const Estimate& est) {
  const int r = static_cast<int>(est.fields_hat.size());
  const int n1 = r ? static_cast<int>(est.fields_hat[0].rows()) : 0;
  const int n2 = r ? static_cast<int>(est.fields_hat[0].cols()) : 0;
  os << "specmap-estimate 1\n";
  os << "n_sources = " << r << "\n";
  os << "n_bands = " << est.spectra_hat.cols() << "\n";
  os << "n1 = " << n1 << "\n";
  os << "n2 = " << n2 << "\n";
  os << "converged = " << (est.converged ? 1 : 0) << "\n";
  os << "trace =";
  for (Real v : est.objective_trace) os << " " << format_real(v);
  os << "\n";
  for (int s = 0; s < r; ++s) {
    os << "spectrum " << s << " =";
    for (int k = 0; k < est.spectra_hat.cols(); ++k)
      os << " " << format_real(est.spectra_hat(s, k));
    os << "\n";
  }
  for (int s = 0; s < r; ++s) {
    os << "field " << s << "\n";
    for (int i = 0; i < n1; ++i) {
      for (int j = 0; j < n2; ++j) os << (j ? " " : "") << format_real(est.fields_hat[s](i, j));
      os << "\n";
    }
  }
}

void save_estimate(const std::string& path, const Estimate& est) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write estimate file: " + path);
  save_estimate(f, est);
}

Estimate load_estimate(std::istream& is) {
  std::string line;
  std::getline(is, line);
  if (trim(line) != "specmap-estimate 1")
    throw ConfigError("not an estimate file (bad magic line)");
  auto read_kv_line = [&](const std::string& key) {
    std::getline(is, line);
    std::string t = trim(line);
    if (t.rfind(key, 0) != 0) throw ConfigError("estimate file: expected " + key);
    return trim(t.substr(t.find('=') + 1));
  };
  Estimate est;
  const int r = std::stoi(read_kv_line("n_sources"));
  const int k = std::stoi(read_kv_line("n_bands"));
  const int n1 = std::stoi(read_kv_line("n1"));
  const int n2 = std::stoi(read_kv_line("n2"));
  est.converged = std::stoi(read_kv_line("converged")) != 0;
  {
    std::istringstream ts(read_kv_line("trace"));
    Real v;
    while (ts >> v) est.objective_trace.push_back(v);
  }
  est.spectra_hat.resize(r, k);
  for (int s = 0; s < r; ++s) {
    std::istringstream ss(read_kv_line("spectrum"));
    for (int b = 0; b < k; ++b)
      if (!(ss >> est.spectra_hat(s, b))) throw ConfigError("estimate file: short spectrum row");
  }
  est.fields_hat.assign(r, Matrix::Zero(n1, n2));
  for (int s = 0; s < r; ++s) {
    std::getline(is, line);
    if (trim(line).rfind("field", 0) != 0) throw ConfigError("estimate file: expected field block");
    for (int i = 0; i < n1; ++i) {
      std::getline(is, line);
      std::istringstream ls(line);
      for (int j = 0; j < n2; ++j)
        if (!(ls >> est.fields_hat[s](i, j))) throw ConfigError("estimate file: short field row");
    }
  }
  est.mu_effective.assign(r, 0.0);
  est.tensor_hat = assemble_tensor(est.fields_hat, est.spectra_hat);
  return est;
}

Estimate load_estimate(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open estimate file: " + path);
  return load_estimate(f);
}

}  // namespace specmap
