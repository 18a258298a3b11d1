#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "specmap/analysis.hpp"

#include <random>

using namespace specmap;

namespace {

Topology random_topology(int m, int neighbors, Real area, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> u(0.0, area);
  Topology t;
  for (int s = 0; s < m; ++s) t.sensors.push_back({u(rng), u(rng)});
  t.cell = {area / 2, area / 2};
  std::vector<Real> dist;
  for (const auto& z : t.sensors) dist.push_back((z - t.cell).norm());
  std::sort(dist.begin(), dist.end());
  t.bandwidth = dist[std::min<size_t>(neighbors, dist.size() - 1)];
  return t;
}

}  // namespace

TEST_CASE("symmetric layouts zero the odd moments of the topology matrix") {
  Topology t;
  t.cell = {0.0, 0.0};
  t.bandwidth = 3.0;
  for (Real x : {0.5, 1.0, 1.5})
    for (Real sx : {-1.0, 1.0})
      for (Real sy : {-1.0, 1.0}) t.sensors.push_back({sx * x, sy * x * 0.5});
  t.sensors.push_back({0.0, 0.9});
  t.sensors.push_back({0.0, -0.9});
  TopologyMatrices tm = topology_constant(t);
  CHECK(std::abs(tm.a1(0, 1)) < 1e-12);
  CHECK(std::abs(tm.a1(0, 2)) < 1e-12);
  CHECK(tm.c_const > 0.0);
}

TEST_CASE("a degenerate cluster of identical sensors is rejected") {
  Topology t;
  t.cell = {0.0, 0.0};
  t.bandwidth = 2.0;
  for (int s = 0; s < 10; ++s) t.sensors.push_back({0.4, 0.4});
  CHECK_THROWS_AS(topology_constant(t), DegenerateDesign);
}

TEST_CASE("topology constant matches a pure-noise single-band Monte Carlo") {
  Topology t = random_topology(30, 14, 50.0, 7);
  TopologyMatrices tm = topology_constant(t);
  VarianceScenario sc = VarianceScenario::full_spectrum(t, Vector::Ones(1), 0.0, 1.0);
  Rng rng(11);
  MonteCarloResult mc = monte_carlo_variance(sc, 100000, rng);
  // K = 1, phi = 1: predicted variance is sigma_eps^2 * C = C.
  CHECK(std::abs(mc.variance / tm.c_const - 1.0) <= 0.05);
}

TEST_CASE("spectrum coefficients: uniform, one-hot and a worked example") {
  const int k = 20;
  auto [ce_u, cn_u] = spectrum_coefficients(Vector::Ones(k));
  CHECK(ce_u == doctest::Approx(1.0 / k).epsilon(1e-12));
  CHECK(cn_u == doctest::Approx(1.0 / k).epsilon(1e-12));

  Vector onehot = Vector::Zero(k);
  onehot[0] = k;
  auto [ce_o, cn_o] = spectrum_coefficients(onehot);
  CHECK(ce_o == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cn_o == doctest::Approx(1.0 / (k * k)).epsilon(1e-12));

  Vector phi(4);
  phi << 2, 1, 1, 1;
  auto [ce, cn] = spectrum_coefficients(phi);
  CHECK(ce == doctest::Approx(19.0 / 49.0).epsilon(1e-12));
  CHECK(cn == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("spectrum coefficient bounds hold on random simplex draws") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<Real> u(0.0, 1.0);
  const int k = 12;
  for (int rep = 0; rep < 10000; ++rep) {
    Vector phi(k);
    for (int i = 0; i < k; ++i) phi[i] = u(rng) + 1e-6;
    phi *= k / phi.sum();
    auto [ce, cn] = spectrum_coefficients(phi);  // throws on a bound violation
    CHECK(ce >= 1.0 / k - 1e-9);
    CHECK(cn <= 1.0 / k + 1e-9);
  }
}

TEST_CASE("integrated variance prediction at the uniform and worked spectra") {
  Topology t = random_topology(30, 14, 50.0, 5);
  TopologyMatrices tm = topology_constant(t);
  const Real c = tm.c_const;
  Vector uniform = Vector::Ones(20);
  CHECK(predict_variance_integrated(uniform, 0.3, 0.2, tm) ==
        doctest::Approx((0.09 + 0.04) * c / 20).epsilon(1e-12));
  Vector phi(4);
  phi << 2, 1, 1, 1;
  CHECK(predict_variance_integrated(phi, 1.0, 0.0, tm) ==
        doctest::Approx(19.0 / 49.0 * c).epsilon(1e-12));
  CHECK(predict_variance_integrated(phi, 0.0, 1.0, tm) ==
        doctest::Approx(c / 7.0).epsilon(1e-12));
}

TEST_CASE("per-band variance prediction and its divergence guard") {
  Topology t = random_topology(30, 14, 50.0, 6);
  TopologyMatrices tm = topology_constant(t);
  const Real c = tm.c_const;
  Vector uniform = Vector::Ones(20);
  CHECK(predict_variance_per_band(uniform, 0.3, 0.2, tm) ==
        doctest::Approx((0.09 + 0.04) * c).epsilon(1e-12));

  // Single band: both estimators coincide.
  Vector one_band = Vector::Ones(1);
  CHECK(predict_variance_per_band(one_band, 0.3, 0.2, tm) ==
        doctest::Approx(predict_variance_integrated(one_band, 0.3, 0.2, tm)).epsilon(1e-12));

  Vector phi(4);
  phi << 2, 1, 1, 1;
  CHECK(predict_variance_per_band(phi, 0.0, 1.0, tm) ==
        doctest::Approx((0.25 * (0.25 + 1 + 1 + 1)) * c).epsilon(1e-12));

  Vector with_zero(3);
  with_zero << 1, 0, 2;
  CHECK_THROWS_AS(predict_variance_per_band(with_zero, 0.1, 0.1, tm), InvalidInput);
}

TEST_CASE("variance gap: uniform coefficients, identity and nonnegativity") {
  Topology t = random_topology(30, 14, 50.0, 8);
  TopologyMatrices tm = topology_constant(t);
  const int k = 10;
  VarianceGap g = variance_gap(Vector::Ones(k), 0.5, 0.7, tm);
  CHECK(g.coeff_eta == doctest::Approx((k - 1.0) / k).epsilon(1e-12));
  CHECK(g.coeff_eps == doctest::Approx((k - 1.0) / k).epsilon(1e-12));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<Real> u(0.05, 2.0);
  for (int rep = 0; rep < 200; ++rep) {
    Vector phi(k);
    for (int i = 0; i < k; ++i) phi[i] = u(rng);
    phi *= k / phi.sum();
    VarianceGap gap = variance_gap(phi, 0.4, 0.3, tm);
    const Real direct = predict_variance_per_band(phi, 0.4, 0.3, tm) -
                        predict_variance_integrated(phi, 0.4, 0.3, tm);
    CHECK(gap.gap >= 0.0);
    CHECK(gap.gap == doctest::Approx(direct).epsilon(1e-10));
    CHECK(gap.coeff_eta <= (k - 1.0) / k + 1e-12);
    CHECK(gap.coeff_eps >= (k - 1.0) / k - 1e-12);
  }

  // Near one-hot spectra push the fading coefficient toward zero.
  Vector nearly(k);
  nearly.setConstant(1e-3);
  nearly[0] = k - (k - 1) * 1e-3;
  CHECK(variance_gap(nearly, 1.0, 0.0, tm).coeff_eta < 0.01);
}

TEST_CASE("band-subset prediction: scaling and consistency with the uniform case") {
  Topology t = random_topology(30, 14, 50.0, 9);
  TopologyMatrices tm = topology_constant(t);
  CHECK(predict_variance_band_subset(20, 0.3, 0.2, tm) ==
        doctest::Approx(predict_variance_integrated(Vector::Ones(20), 0.3, 0.2, tm)).epsilon(1e-12));
  TopologyMatrices unit = tm;
  unit.c_const = 2.0;
  CHECK(predict_variance_band_subset(10, 1.0, 1.0, unit) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(predict_variance_band_subset(1, 1.0, 1.0, unit) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK_THROWS_AS(predict_variance_band_subset(0, 1, 1, tm), InvalidInput);
}

TEST_CASE("two-source coefficients: zero overlap, worked value and blow-up near one") {
  Topology t = random_topology(30, 14, 50.0, 10);
  TopologyMatrices tm = topology_constant(t);
  auto p0 = predict_variance_two_source(0.0, 20, 0.1, 0.1, tm);
  CHECK(p0.coeff_eta == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(p0.coeff_eps == doctest::Approx(0.1).epsilon(1e-12));

  auto p5 = predict_variance_two_source(0.5, 20, 0.1, 0.1, tm);
  CHECK(p5.coeff_eps == doctest::Approx(0.12).epsilon(1e-12));
  CHECK(p5.coeff_eta == doctest::Approx(0.136).epsilon(1e-12));

  // The fading coefficient grows monotonically with the overlap. The noise
  // coefficient dips below its zero-overlap value for small overlaps
  // (every source occupies more bands) and only then blows up.
  Real last_eta = 0;
  for (Real e = 0.0; e < 0.995; e += 0.01) {
    auto p = predict_variance_two_source(e, 20, 1.0, 1.0, tm);
    CHECK(p.coeff_eta >= last_eta - 1e-12);
    last_eta = p.coeff_eta;
  }
  CHECK(predict_variance_two_source(0.155, 20, 1, 1, tm).coeff_eps < 0.1);  // below 2/K
  CHECK(predict_variance_two_source(0.6, 20, 1, 1, tm).coeff_eps > 0.1);
  CHECK(predict_variance_two_source(0.999, 20, 1, 1, tm).coeff_eta >
        50 * predict_variance_two_source(0.9, 20, 1, 1, tm).coeff_eta);
  CHECK_THROWS_AS(predict_variance_two_source(1.0, 20, 1, 1, tm), InvalidInput);
}

TEST_CASE("two-source spectrum layout") {
  Matrix phi = two_source_spectrum(0.2, 20);  // k1 = 12, k2 = 4
  CHECK(phi.row(0).sum() == 12.0);
  CHECK(phi.row(1).sum() == 12.0);
  int shared = 0;
  for (int k = 0; k < 20; ++k) shared += (phi(0, k) > 0 && phi(1, k) > 0);
  CHECK(shared == 4);
  CHECK_THROWS_AS(two_source_spectrum(0.25, 20), ConfigError);  // k1 not integral
}

TEST_CASE("monte carlo variance is zero without noise and refuses tiny runs") {
  Topology t = random_topology(30, 14, 50.0, 11);
  auto sc = VarianceScenario::full_spectrum(t, Vector::Ones(8), 0.0, 0.0);
  Rng rng(1);
  CHECK(monte_carlo_variance(sc, 200, rng).variance == 0.0);
  CHECK_THROWS_AS(monte_carlo_variance(sc, 99, rng), ConfigError);
}

TEST_CASE("monte carlo matches the integrated full-spectrum closed form") {
  Topology t = random_topology(30, 14, 50.0, 12);
  TopologyMatrices tm = topology_constant(t);
  Vector phi = Vector::Ones(20);
  auto sc = VarianceScenario::full_spectrum(t, phi, 0.1, 0.1);
  Rng rng(2);
  MonteCarloResult mc = monte_carlo_variance(sc, 30000, rng);
  const Real pred = predict_variance_integrated(phi, 0.1, 0.1, tm);
  CHECK(std::abs(mc.variance / pred - 1.0) <= 0.1);
  CHECK(std::abs(mc.variance - pred) <= 4 * mc.std_error);
}

TEST_CASE("monte carlo matches the two-source closed form at moderate overlap") {
  Topology t = random_topology(30, 14, 50.0, 13);
  TopologyMatrices tm = topology_constant(t);
  VarianceScenario sc;
  sc.topology = t;
  sc.phi = two_source_spectrum(0.4, 20);
  sc.band_mask = BoolArray::Constant(30, 20, true);
  sc.sigma_eta = 0.1;
  sc.sigma_eps = 0.1;
  sc.estimator = EstimatorKind::TwoSource;
  Rng rng(3);
  MonteCarloResult mc = monte_carlo_variance(sc, 30000, rng);
  const Real pred = predict_variance_two_source(0.4, 20, 0.1, 0.1, tm).variance;
  CHECK(std::abs(mc.variance / pred - 1.0) <= 0.1);
}

TEST_CASE("paired gap run reproduces both closed forms and a nonnegative gap") {
  Topology t = random_topology(30, 14, 50.0, 14);
  TopologyMatrices tm = topology_constant(t);
  std::mt19937_64 draw(9);
  std::uniform_real_distribution<Real> u(0.3, 2.0);
  Vector phi(20);
  for (int i = 0; i < 20; ++i) phi[i] = u(draw);
  phi *= 20 / phi.sum();

  Rng rng(4);
  GapResult g = monte_carlo_gap(t, phi, 0.1, 0.1, 30000, rng);
  CHECK(g.gap >= 0.0);
  CHECK(std::abs(g.per_band / predict_variance_per_band(phi, 0.1, 0.1, tm) - 1.0) <= 0.1);
  CHECK(std::abs(g.integrated / predict_variance_integrated(phi, 0.1, 0.1, tm) - 1.0) <= 0.1);
  const Real pred_gap = variance_gap(phi, 0.1, 0.1, tm).gap;
  CHECK(std::abs(g.gap - pred_gap) <= 4 * g.gap_std_error);
}

TEST_CASE("validation report passes at a modest trial count") {
  auto rows = validation_report(20000, 7, 0.10);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    INFO(r.name, ": predicted ", r.predicted, " empirical ", r.empirical);
    CHECK(r.pass);
  }
}
