#include "specmap/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace specmap {

Real nmse(const Matrix& est, const Matrix& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols())
    throw InvalidInput("nmse: shape mismatch");
  const Real denom = truth.squaredNorm();
  if (denom == 0) throw InvalidInput("nmse: zero-norm truth");
  return (est - truth).squaredNorm() / denom;
}

Real nmse(const std::vector<Matrix>& est, const std::vector<Matrix>& truth) {
  if (est.size() != truth.size()) throw InvalidInput("nmse: slice count mismatch");
  Real num = 0, denom = 0;
  for (size_t k = 0; k < truth.size(); ++k) {
    if (est[k].rows() != truth[k].rows() || est[k].cols() != truth[k].cols())
      throw InvalidInput("nmse: slice shape mismatch");
    num += (est[k] - truth[k]).squaredNorm();
    denom += truth[k].squaredNorm();
  }
  if (denom == 0) throw InvalidInput("nmse: zero-norm truth");
  return num / denom;
}

Alignment align_sources(const Estimate& est, const GroundTruth& truth) {
  const int r_count = static_cast<int>(est.fields_hat.size());
  if (r_count != truth.n_sources())
    throw InvalidInput("align_sources: source count mismatch");
  if (r_count > 6) throw ConfigError("align_sources: exhaustive search limited to 6 sources");

  std::vector<int> perm(r_count);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  Real best_cost = std::numeric_limits<Real>::infinity();
  do {
    Real cost = 0;
    for (int r = 0; r < r_count; ++r) {
      const Real d = (est.spectra_hat.row(perm[r]) - truth.spectra.row(r)).squaredNorm();
      cost += d / truth.spectra.row(r).squaredNorm();
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  Alignment out;
  out.permutation = best;
  out.estimate = est;
  for (int r = 0; r < r_count; ++r) {
    out.estimate.fields_hat[r] = est.fields_hat[best[r]];
    out.estimate.spectra_hat.row(r) = est.spectra_hat.row(best[r]);
    out.estimate.mu_effective[r] = est.mu_effective[best[r]];
  }
  out.estimate.tensor_hat = assemble_tensor(out.estimate.fields_hat, out.estimate.spectra_hat);
  return out;
}

}  // namespace specmap
