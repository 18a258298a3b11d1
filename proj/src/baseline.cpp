#include "specmap/baseline.hpp"

#include "specmap/numerics.hpp"

namespace specmap {

BandEstimate lpr_per_band(const MeasurementSet& meas, const GridSpec& grid,
                          const KernelConfig& kcfg) {
  const int k_bands = meas.k();
  std::vector<int> cells(grid.cell_count());
  for (int c = 0; c < grid.cell_count(); ++c) cells[c] = c;
  std::vector<CellWindow> windows = kernel_weights(cells, grid, meas.locations, kcfg);

  BandEstimate out;
  out.alpha.assign(k_bands, Matrix::Zero(grid.n1, grid.n2));
  out.valid = BoolArray::Constant(grid.cell_count(), k_bands, false);
  out.alpha_avg = Matrix::Zero(grid.n1, grid.n2);

  for (const auto& w : windows) {
    const int i = w.cell_index / grid.n2, j = w.cell_index % grid.n2;
    const int mw = static_cast<int>(w.sensor.size());
    Matrix design(mw, 7);
    for (int t = 0; t < mw; ++t)
      design.row(t) = design_vector(meas.locations[w.sensor[t]], w.center).transpose();

    int valid_bands = 0;
    Real acc = 0;
    for (int k = 0; k < k_bands; ++k) {
      std::vector<int> rows;
      for (int t = 0; t < mw; ++t)
        if (meas.band_mask(w.sensor[t], k)) rows.push_back(t);
      if (static_cast<int>(rows.size()) < 7) continue;  // under-determined, excluded

      Matrix a(rows.size(), 7);
      Vector y(rows.size()), wt(rows.size());
      for (size_t t = 0; t < rows.size(); ++t) {
        a.row(t) = design.row(rows[t]);
        y[t] = meas.readings(w.sensor[rows[t]], k);
        wt[t] = w.weight[rows[t]];
      }
      // Minimum-norm weighted least squares; the duplicated mixed term of
      // the second-order design makes the system rank six by construction.
      Vector sw = wt.cwiseSqrt();
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sw.asDiagonal() * a);
      cod.setThreshold(1e-10);
      if (cod.rank() < 6) continue;
      Vector coef = cod.solve(Vector(sw.cwiseProduct(y)));
      out.alpha[k](i, j) = coef[0];
      out.valid(w.cell_index, k) = true;
      acc += coef[0];
      ++valid_bands;
    }
    if (valid_bands > 0) out.alpha_avg(i, j) = acc / valid_bands;
  }
  return out;
}

}  // namespace specmap
