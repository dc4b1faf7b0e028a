#pragma once

#include <Eigen/Dense>

#include "bora/model.hpp"

namespace bora {

struct Scores {
  double rmspe = 0;
  double mape = 0;
  double coverage = 0;   // fraction of truths inside the interval
  double ci_width = 0;   // mean interval width
  int n = 0;
};

Scores score(const Eigen::VectorXd& y_mean, const Eigen::VectorXd& y_lo,
             const Eigen::VectorXd& y_hi, const Eigen::VectorXd& truth);

Scores score(const PredictionResult& pred, const Eigen::VectorXd& truth);

}  // namespace bora
