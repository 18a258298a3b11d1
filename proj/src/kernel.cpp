#include "specmap/kernel.hpp"

#include <algorithm>

namespace specmap {

std::vector<CellWindow> kernel_weights(const std::vector<int>& cells, const GridSpec& grid,
                                       const std::vector<Vec2>& sensors, const KernelConfig& cfg) {
  cfg.validate();
  const int m = static_cast<int>(sensors.size());
  const int m0 = cfg.required_neighbors();
  if (m < m0)
    throw ConfigError("kernel_weights: only " + std::to_string(m) + " sensors for m0 = " +
                      std::to_string(m0));

  std::vector<CellWindow> windows;
  windows.reserve(cells.size());
  std::vector<Real> dist(m);
  for (int cell : cells) {
    CellWindow w;
    w.cell_index = cell;
    w.center = grid.cell_center(cell / grid.n2, cell % grid.n2);
    for (int s = 0; s < m; ++s) dist[s] = (sensors[s] - w.center).norm();

    if (const auto* fixed = std::get_if<KernelConfig::Fixed>(&cfg.bandwidth_rule)) {
      w.bandwidth = fixed->bandwidth;
    } else {
      std::vector<Real> sorted = dist;
      std::sort(sorted.begin(), sorted.end());
      // Smallest candidate radius with >= m0 strictly interior sensors;
      // candidates are the sorted distances themselves.
      int idx = m0;  // one past the m0-th nearest
      while (idx < m && sorted[idx] <= sorted[m0 - 1]) ++idx;  // skip ties
      w.bandwidth = idx < m ? sorted[idx] : sorted[m - 1] * (1 + 1e-9) + 1e-12;
    }

    for (int s = 0; s < m; ++s) {
      Real k = epanechnikov(dist[s], w.bandwidth);
      if (k > 0) {
        w.sensor.push_back(s);
      }
    }
    w.weight.resize(w.sensor.size());
    for (size_t t = 0; t < w.sensor.size(); ++t)
      w.weight[t] = epanechnikov(dist[w.sensor[t]], w.bandwidth);

    if (static_cast<int>(w.sensor.size()) < m0)
      throw ConfigError("kernel_weights: cell " + std::to_string(cell) + " has only " +
                        std::to_string(w.sensor.size()) + " sensors in its window");
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace specmap
