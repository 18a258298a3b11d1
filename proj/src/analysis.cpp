#include "specmap/analysis.hpp"

#include "specmap/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace specmap {

namespace {

Real jackknife_se(const std::vector<Real>& leave_one_out) {
  const int n = static_cast<int>(leave_one_out.size());
  Real mean = 0;
  for (Real v : leave_one_out) mean += v;
  mean /= n;
  Real acc = 0;
  for (Real v : leave_one_out) acc += (v - mean) * (v - mean);
  return std::sqrt((n - 1.0) / n * acc);
}

}  // namespace

TopologyMatrices topology_constant(const Topology& topo) {
  TopologyMatrices out;
  out.a1.setZero();
  out.a2.setZero();
  int positive = 0;
  for (const auto& z : topo.sensors) {
    const Real kap = epanechnikov((z - topo.cell).norm(), topo.bandwidth);
    if (kap <= 0) continue;
    ++positive;
    Eigen::Matrix<Real, 7, 1> x = design_vector(z, topo.cell);
    Eigen::Matrix<Real, 7, 7> xxt = x * x.transpose();
    out.a1 += kap * xxt;
    out.a2 += kap * kap * xxt;
  }
  if (positive < 7)
    throw ConfigError("topology_constant: fewer than 7 sensors inside the kernel window");

  Matrix a1_pinv = psd_pinv(out.a1, 6, "topology_constant");
  out.c_const = (a1_pinv * out.a2 * a1_pinv)(0, 0);
  return out;
}

std::pair<Real, Real> spectrum_coefficients(const Vector& phi) {
  const int k = static_cast<int>(phi.size());
  if (k < 1 || phi.minCoeff() < 0 || phi.maxCoeff() <= 0)
    throw InvalidInput("spectrum_coefficients: spectrum must be nonnegative and not all zero");
  const Real p2 = phi.array().square().sum();
  const Real p4 = phi.array().pow(4).sum();
  const Real c_eta = p4 / (p2 * p2);
  const Real c_eps = 1.0 / p2;
  const Real slack = 1e-9;
  if (c_eta < 1.0 / k - slack || c_eta > 1.0 + slack ||
      c_eps < 1.0 / (Real(k) * k) - slack || c_eps > 1.0 / k + slack)
    throw Error("spectrum_coefficients: bound violation, coefficients out of range");
  return {c_eta, c_eps};
}

Real predict_variance_integrated(const Vector& phi, Real sig_eta, Real sig_eps,
                                 const TopologyMatrices& topo) {
  auto [c_eta, c_eps] = spectrum_coefficients(phi);
  return (c_eta * sig_eta * sig_eta + c_eps * sig_eps * sig_eps) * topo.c_const;
}

Real predict_variance_per_band(const Vector& phi, Real sig_eta, Real sig_eps,
                               const TopologyMatrices& topo) {
  const int k = static_cast<int>(phi.size());
  if (phi.minCoeff() <= 0)
    throw InvalidInput("predict_variance_per_band: diverges for a zero spectrum entry");
  Real noise_coeff = 0;
  for (int i = 0; i < k; ++i) noise_coeff += 1.0 / (phi[i] * phi[i] * k);
  return (sig_eta * sig_eta + noise_coeff * sig_eps * sig_eps) * topo.c_const;
}

VarianceGap variance_gap(const Vector& phi, Real sig_eta, Real sig_eps,
                         const TopologyMatrices& topo) {
  const int k = static_cast<int>(phi.size());
  if (phi.minCoeff() <= 0)
    throw InvalidInput("variance_gap: requires a strictly positive spectrum");
  const Real p2 = phi.array().square().sum();
  const Real p4 = phi.array().pow(4).sum();
  VarianceGap out;
  out.coeff_eta = (p2 * p2 - p4) / (p2 * p2);  // 2 sum_{i<j} phi_i^2 phi_j^2 / (sum phi^2)^2
  Real eps_sum = 0;
  for (int i = 0; i < k; ++i) eps_sum += (p2 - phi[i] * phi[i]) / (phi[i] * phi[i] * k);
  out.coeff_eps = eps_sum / p2;
  out.gap = (out.coeff_eta * sig_eta * sig_eta + out.coeff_eps * sig_eps * sig_eps) * topo.c_const;

  const Real bound = Real(k - 1) / k;
  if (out.coeff_eta < -1e-12 || out.coeff_eta > bound + 1e-12 || out.coeff_eps < bound - 1e-12)
    throw Error("variance_gap: coefficient bound violation");
  const Real direct = predict_variance_per_band(phi, sig_eta, sig_eps, topo) -
                      predict_variance_integrated(phi, sig_eta, sig_eps, topo);
  if (std::abs(direct - out.gap) > 1e-12 * std::max<Real>(1.0, std::abs(direct)))
    throw Error("variance_gap: identity check failed");
  return out;
}

Real predict_variance_band_subset(int k_prime, Real sig_eta, Real sig_eps,
                                  const TopologyMatrices& topo) {
  if (k_prime < 1) throw InvalidInput("predict_variance_band_subset: k_prime must be >= 1");
  return (sig_eta * sig_eta + sig_eps * sig_eps) * topo.c_const / k_prime;
}

Matrix two_source_spectrum(Real overlap, int n_bands) {
  if (!(overlap >= 0 && overlap < 1))
    throw InvalidInput("two_source_spectrum: overlap must lie in [0,1)");
  const Real k1_real = (1 + overlap) * n_bands / 2;
  const int k1 = static_cast<int>(std::lround(k1_real));
  if (std::abs(k1_real - k1) > 1e-9)
    throw ConfigError("two_source_spectrum: (1+overlap)*K/2 must be an integer");
  Matrix phi = Matrix::Zero(2, n_bands);
  for (int k = 0; k < k1; ++k) phi(0, k) = 1.0;
  for (int k = n_bands - k1; k < n_bands; ++k) phi(1, k) = 1.0;
  return phi;
}

TwoSourcePrediction predict_variance_two_source(Real overlap, int n_bands, Real sig_eta,
                                                Real sig_eps, const TopologyMatrices& topo) {
  if (!(overlap >= 0)) throw InvalidInput("predict_variance_two_source: overlap must be >= 0");
  if (overlap >= 1)
    throw InvalidInput("predict_variance_two_source: singular at full overlap, "
                       "the sources cannot be separated");
  const Real e = overlap;
  const Real k = n_bands;
  TwoSourcePrediction out;
  out.coeff_eta = (2 - 10 * e * e + 10 * e - 2 * e * e * e) / (k * std::pow(1 - 3 * e * e + 2 * e, 2));
  out.coeff_eps = 2 * (-e - 1) / (k * (3 * e * e - 2 * e - 1));
  // Both equal 2/K at zero overlap. The fading coefficient grows with the
  // overlap; the noise coefficient first dips slightly below 2/K (more bands
  // per source) before the separation penalty takes over, so only
  // positivity is a hard bound here.
  if (!(out.coeff_eta > 0) || !(out.coeff_eps > 0))
    throw Error("predict_variance_two_source: coefficient positivity violation");
  out.variance = (out.coeff_eta * sig_eta * sig_eta + out.coeff_eps * sig_eps * sig_eps) * topo.c_const;
  return out;
}

VarianceScenario VarianceScenario::full_spectrum(Topology t, Vector phi_row, Real se, Real sn,
                                                 EstimatorKind kind) {
  VarianceScenario sc;
  sc.topology = std::move(t);
  sc.phi = phi_row.transpose();
  sc.band_mask = BoolArray::Constant(sc.topology.sensors.size(), phi_row.size(), true);
  sc.sigma_eta = se;
  sc.sigma_eps = sn;
  sc.estimator = kind;
  return sc;
}

namespace {

/// Linear weights w_mk of the integrated nu=0 constant-term estimate of
/// source 0; the estimation error is sum_mk w_mk * noise_mk.
Matrix integrated_weights(const VarianceScenario& sc) {
  const int m = static_cast<int>(sc.topology.sensors.size());
  const int k = static_cast<int>(sc.phi.cols());
  const int r = static_cast<int>(sc.phi.rows());
  const Vector kap = sc.topology.weights();

  std::vector<Eigen::Matrix<Real, 7, 1>> x(m);
  for (int s = 0; s < m; ++s) x[s] = design_vector(sc.topology.sensors[s], sc.topology.cell);

  Matrix g = Matrix::Zero(7 * r, 7 * r);
  for (int s = 0; s < m; ++s) {
    if (kap[s] <= 0) continue;
    Eigen::Matrix<Real, 7, 7> xxt = x[s] * x[s].transpose();
    for (int band = 0; band < k; ++band) {
      if (!sc.band_mask(s, band)) continue;
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
          g.block<7, 7>(7 * a, 7 * b) += sc.phi(a, band) * sc.phi(b, band) * kap[s] * xxt;
    }
  }
  Vector e0 = Vector::Zero(7 * r);
  e0[0] = 1.0;
  Vector y = psd_pinv(g, 6 * r, "integrated_weights") * e0;

  Matrix w = Matrix::Zero(m, k);
  for (int s = 0; s < m; ++s) {
    if (kap[s] <= 0) continue;
    Vector proj(r);
    for (int a = 0; a < r; ++a) proj[a] = y.segment<7>(7 * a).dot(x[s]);
    for (int band = 0; band < k; ++band)
      if (sc.band_mask(s, band)) w(s, band) = kap[s] * sc.phi.col(band).dot(proj);
  }
  return w;
}

/// Per-band constant-term weights of the frequency-by-frequency estimate.
Matrix per_band_weights(const VarianceScenario& sc) {
  const int m = static_cast<int>(sc.topology.sensors.size());
  const int k = static_cast<int>(sc.phi.cols());
  const Vector kap = sc.topology.weights();
  std::vector<Eigen::Matrix<Real, 7, 1>> x(m);
  for (int s = 0; s < m; ++s) x[s] = design_vector(sc.topology.sensors[s], sc.topology.cell);

  Matrix w = Matrix::Zero(m, k);
  for (int band = 0; band < k; ++band) {
    Matrix a1 = Matrix::Zero(7, 7);
    for (int s = 0; s < m; ++s)
      if (kap[s] > 0 && sc.band_mask(s, band)) a1 += kap[s] * x[s] * x[s].transpose();
    Vector y = psd_pinv(a1, 6, "per_band_weights").col(0);
    for (int s = 0; s < m; ++s)
      if (kap[s] > 0 && sc.band_mask(s, band)) w(s, band) = kap[s] * y.dot(x[s]);
  }
  return w;
}

struct VarianceAccumulator {
  explicit VarianceAccumulator(int n) { samples.reserve(n); }
  std::vector<Real> samples;

  void add(Real v) { samples.push_back(v); }
  MonteCarloResult finalize() const {
    const int n = static_cast<int>(samples.size());
    Real s1 = 0, s2 = 0;
    for (Real v : samples) {
      s1 += v;
      s2 += v * v;
    }
    MonteCarloResult res;
    res.trials = n;
    res.variance = (s2 - s1 * s1 / n) / (n - 1);
    std::vector<Real> loo(n);
    for (int i = 0; i < n; ++i) {
      const Real a = s1 - samples[i], b = s2 - samples[i] * samples[i];
      loo[i] = (b - a * a / (n - 1)) / (n - 2);
    }
    res.std_error = jackknife_se(loo);
    return res;
  }
};

}  // namespace

MonteCarloResult monte_carlo_variance(const VarianceScenario& sc, int n_trials, Rng& rng) {
  if (n_trials < 100)
    throw ConfigError("monte_carlo_variance: refusing fewer than 100 trials");
  const int m = static_cast<int>(sc.topology.sensors.size());
  const int k = static_cast<int>(sc.phi.cols());
  if (sc.band_mask.rows() != m || sc.band_mask.cols() != k)
    throw InvalidInput("monte_carlo_variance: band mask shape mismatch");

  // Per-(sensor, band) noise std: fading enters through the spectrum row of
  // each source, measurement noise directly.
  Matrix noise_std(m, k);
  for (int s = 0; s < m; ++s)
    for (int band = 0; band < k; ++band) {
      Real v = sc.sigma_eps * sc.sigma_eps;
      for (int r = 0; r < sc.phi.rows(); ++r)
        v += sc.sigma_eta * sc.sigma_eta * sc.phi(r, band) * sc.phi(r, band);
      noise_std(s, band) = sc.band_mask(s, band) ? std::sqrt(v) : 0.0;
    }

  std::normal_distribution<Real> normal(0.0, 1.0);

  if (sc.estimator == EstimatorKind::PerBand) {
    if (sc.phi.rows() != 1)
      throw InvalidInput("monte_carlo_variance: the per-band estimator assumes one source");
    if (sc.phi.minCoeff() <= 0)
      throw InvalidInput("monte_carlo_variance: per-band estimator needs a positive spectrum");
    Matrix w = per_band_weights(sc);
    Matrix xs(n_trials, k);
    for (int t = 0; t < n_trials; ++t)
      for (int band = 0; band < k; ++band) {
        Real acc = 0;
        for (int s = 0; s < m; ++s)
          if (sc.band_mask(s, band)) acc += w(s, band) * noise_std(s, band) * normal(rng);
        xs(t, band) = acc / sc.phi(0, band);  // field-scale error
      }
    // Statistic: mean of the per-band variances. Jackknife over trials.
    Vector s1 = xs.colwise().sum().transpose();
    Vector s2 = xs.array().square().colwise().sum().transpose();
    const int n = n_trials;
    auto band_var_mean = [&](int drop) {
      Real acc = 0;
      for (int band = 0; band < k; ++band) {
        Real a = s1[band], b = s2[band];
        int nn = n;
        if (drop >= 0) {
          a -= xs(drop, band);
          b -= xs(drop, band) * xs(drop, band);
          nn = n - 1;
        }
        acc += (b - a * a / nn) / (nn - 1);
      }
      return acc / k;
    };
    MonteCarloResult res;
    res.trials = n;
    res.variance = band_var_mean(-1);
    std::vector<Real> loo(n);
    for (int t = 0; t < n; ++t) loo[t] = band_var_mean(t);
    res.std_error = jackknife_se(loo);
    return res;
  }

  Matrix w = integrated_weights(sc);
  VarianceAccumulator acc(n_trials);
  for (int t = 0; t < n_trials; ++t) {
    Real xi = 0;
    for (int band = 0; band < k; ++band)
      for (int s = 0; s < m; ++s)
        if (sc.band_mask(s, band) && w(s, band) != 0)
          xi += w(s, band) * noise_std(s, band) * normal(rng);
    acc.add(xi);
  }
  return acc.finalize();
}

GapResult monte_carlo_gap(const Topology& topo, const Vector& phi, Real sigma_eta,
                          Real sigma_eps, int n_trials, Rng& rng) {
  if (n_trials < 100) throw ConfigError("monte_carlo_gap: refusing fewer than 100 trials");
  if (phi.minCoeff() <= 0) throw InvalidInput("monte_carlo_gap: needs a positive spectrum");
  const int m = static_cast<int>(topo.sensors.size());
  const int k = static_cast<int>(phi.size());

  auto sc = VarianceScenario::full_spectrum(topo, phi, sigma_eta, sigma_eps);
  Matrix w_int = integrated_weights(sc);
  Matrix w_band = per_band_weights(sc);
  Vector noise_std(k);
  for (int band = 0; band < k; ++band)
    noise_std[band] = std::sqrt(sigma_eps * sigma_eps +
                                sigma_eta * sigma_eta * phi[band] * phi[band]);

  std::normal_distribution<Real> normal(0.0, 1.0);
  Vector xi_int(n_trials);
  Matrix xi_band(n_trials, k);
  for (int t = 0; t < n_trials; ++t) {
    Real acc_int = 0;
    for (int band = 0; band < k; ++band) {
      Real acc_band = 0;
      for (int s = 0; s < m; ++s) {
        const Real n = noise_std[band] * normal(rng);
        acc_int += w_int(s, band) * n;
        acc_band += w_band(s, band) * n;
      }
      xi_band(t, band) = acc_band / phi[band];
    }
    xi_int[t] = acc_int;
  }

  const int n = n_trials;
  const Real i1 = xi_int.sum(), i2 = xi_int.squaredNorm();
  Vector b1 = xi_band.colwise().sum().transpose();
  Vector b2 = xi_band.array().square().colwise().sum().transpose();
  auto stat = [&](int drop) {
    Real a = i1, b = i2;
    int nn = n;
    if (drop >= 0) {
      a -= xi_int[drop];
      b -= xi_int[drop] * xi_int[drop];
      nn = n - 1;
    }
    const Real v_int = (b - a * a / nn) / (nn - 1);
    Real v_band = 0;
    for (int band = 0; band < k; ++band) {
      Real c = b1[band], d = b2[band];
      if (drop >= 0) {
        c -= xi_band(drop, band);
        d -= xi_band(drop, band) * xi_band(drop, band);
      }
      v_band += (d - c * c / nn) / (nn - 1);
    }
    v_band /= k;
    return std::array<Real, 3>{v_band, v_int, v_band - v_int};
  };

  GapResult out;
  out.trials = n;
  auto full = stat(-1);
  out.per_band = full[0];
  out.integrated = full[1];
  out.gap = full[2];
  std::vector<Real> loo(n);
  for (int t = 0; t < n; ++t) loo[t] = stat(t)[2];
  out.gap_std_error = jackknife_se(loo);
  return out;
}

std::vector<ValidationRow> validation_report(int n_trials, std::uint64_t seed, Real rel_tol) {
  Rng rng(seed);
  std::uniform_real_distribution<Real> coord(0.0, 50.0);
  Topology topo;
  for (int s = 0; s < 30; ++s) topo.sensors.push_back({coord(rng), coord(rng)});
  topo.cell = {25.0, 25.0};
  std::vector<Real> dist;
  for (const auto& z : topo.sensors) dist.push_back((z - topo.cell).norm());
  std::sort(dist.begin(), dist.end());
  topo.bandwidth = dist[std::min<size_t>(14, dist.size() - 1)];
  TopologyMatrices tm = topology_constant(topo);

  const int k = 20;
  const Real se = 0.1, sn = 0.1;
  std::vector<ValidationRow> rows;
  auto check = [&](const std::string& name, Real pred, const MonteCarloResult& mc) {
    ValidationRow r{name, pred, mc.variance, mc.std_error, false};
    const bool in_band = std::abs(mc.variance - pred) <= 3 * mc.std_error;
    const bool close = pred > 0 ? std::abs(mc.variance / pred - 1) <= rel_tol : mc.variance == 0;
    r.pass = in_band && close;
    rows.push_back(r);
  };

  {
    Vector phi = Vector::Ones(k);
    auto sc = VarianceScenario::full_spectrum(topo, phi, se, sn);
    check("integrated_full_spectrum_uniform", predict_variance_integrated(phi, se, sn, tm),
          monte_carlo_variance(sc, n_trials, rng));
  }
  {
    std::uniform_real_distribution<Real> u(0.25, 2.0);
    Vector phi(k);
    for (int i = 0; i < k; ++i) phi[i] = u(rng);
    phi *= k / phi.sum();
    auto sc = VarianceScenario::full_spectrum(topo, phi, se, sn, EstimatorKind::PerBand);
    check("per_band_random_spectrum", predict_variance_per_band(phi, se, sn, tm),
          monte_carlo_variance(sc, n_trials, rng));
  }
  {
    const int k_prime = 10;
    VarianceScenario sc = VarianceScenario::full_spectrum(topo, Vector::Ones(k), se, sn);
    sc.band_mask.setConstant(false);
    std::vector<int> bands(k);
    for (int b = 0; b < k; ++b) bands[b] = b;
    for (int s = 0; s < static_cast<int>(topo.sensors.size()); ++s) {
      std::shuffle(bands.begin(), bands.end(), rng);
      for (int b = 0; b < k_prime; ++b) sc.band_mask(s, bands[b]) = true;
    }
    check("integrated_band_subset", predict_variance_band_subset(k_prime, se, sn, tm),
          monte_carlo_variance(sc, n_trials, rng));
  }
  {
    const Real overlap = 0.4;
    VarianceScenario sc;
    sc.topology = topo;
    sc.phi = two_source_spectrum(overlap, k);
    sc.band_mask = BoolArray::Constant(topo.sensors.size(), k, true);
    sc.sigma_eta = se;
    sc.sigma_eps = sn;
    sc.estimator = EstimatorKind::TwoSource;
    check("two_source_overlap_0.4",
          predict_variance_two_source(overlap, k, se, sn, tm).variance,
          monte_carlo_variance(sc, n_trials, rng));
  }
  return rows;
}

void write_validation_report(std::ostream& os, const std::vector<ValidationRow>& rows) {
  os << "formula predicted empirical std_error pass\n";
  for (const auto& r : rows) {
    os << r.name << " " << r.predicted << " " << r.empirical << " " << r.std_error << " "
       << (r.pass ? "pass" : "FAIL") << "\n";
  }
}

}  // namespace specmap
