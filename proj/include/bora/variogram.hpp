#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bora/covariance.hpp"
#include "bora/model.hpp"

namespace bora {

struct EmpiricalVariogram {
  std::vector<double> bin_center;
  std::vector<double> gamma;  // semivariance per bin
  std::vector<long> count;    // pair count per bin
};

// Semivariances of regression residuals (y - mean when there are no
// covariates) in equal-width distance bins; empty bins are dropped.
EmpiricalVariogram empirical_variogram(const Dataset& data, int n_bins,
                                       double max_dist);

struct VariogramFit {
  double tau2 = 0;    // nugget
  double sigma2 = 0;  // partial sill
  double phi = 0;
  double nu = 0;
  double objective = 0;  // weighted squared error
};

// Distance at which the Matern correlation decays to `target`.
double matern_decay_distance(double nu, double phi, double target);

// Weighted least squares over (tau2, sigma2, phi) with fixed nu; weights are
// the pair counts. phi is searched on a log grid between the correlation-0.05
// solutions at 0.75 and 0.25 of the maximum bin distance (widened), then
// refined by golden section.
VariogramFit fit_matern_variogram(const EmpiricalVariogram& emp, double nu);

// Variogram-derived starting sill and nugget for the sampler, falling back
// to crude splits of the sample variance when the fit degenerates.
void starting_values(const Dataset& train, double nu, CovarianceSpec* spec,
                     McmcConfig* cfg);

}  // namespace bora
