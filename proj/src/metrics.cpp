#include "bora/metrics.hpp"

#include <cmath>

namespace bora {

Scores score(const Eigen::VectorXd& y_mean, const Eigen::VectorXd& y_lo,
             const Eigen::VectorXd& y_hi, const Eigen::VectorXd& truth) {
  const int n = static_cast<int>(truth.size());
  if (n == 0) throw EmptyEvaluation("no held-out observations to score");
  if (y_mean.size() != n || y_lo.size() != n || y_hi.size() != n)
    throw LengthMismatch("prediction and truth lengths differ");
  Scores s;
  s.n = n;
  double se = 0, ae = 0, cov = 0, width = 0;
  for (int i = 0; i < n; ++i) {
    const double e = y_mean[i] - truth[i];
    se += e * e;
    ae += std::abs(e);
    cov += (truth[i] >= y_lo[i] && truth[i] <= y_hi[i]) ? 1.0 : 0.0;
    width += y_hi[i] - y_lo[i];
  }
  s.rmspe = std::sqrt(se / n);
  s.mape = ae / n;
  s.coverage = cov / n;
  s.ci_width = width / n;
  return s;
}

Scores score(const PredictionResult& pred, const Eigen::VectorXd& truth) {
  return score(pred.y_mean, pred.y_lo, pred.y_hi, truth);
}

}  // namespace bora
