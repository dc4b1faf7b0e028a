#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bora/covariance.hpp"
#include "bora/dag.hpp"

namespace bora {

// Response with optional covariates; the intercept is implicit.
struct Dataset {
  std::vector<Location> locations;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;  // n x p, possibly 0 columns

  int n() const { return static_cast<int>(locations.size()); }
  int p() const { return static_cast<int>(X.cols()); }
};

void validate_dataset(const Dataset& data);

struct PriorSpec {
  double a_tau = 2.0, b_tau = 0.1;    // IG on the nugget
  double a_sigma = 2.0, b_sigma = 1.0;  // IG on the sill
  double phi_lower = 0.0, phi_upper = 0.0;  // uniform support for phi
};

struct McmcConfig {
  int iterations = 25000;
  int burn_in = 10000;
  int thin = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  double phi_proposal_sd = 0.5;  // on the logit-transformed scale
  bool adapt = true;             // Robbins-Monro toward 0.3, burn-in only
  double tau2_init = -1.0;       // <= 0: derived from residual variance
  bool sample_beta = true;
  bool sample_tau2 = true;
  bool sample_sigma2 = true;
  bool sample_phi = true;
};

// Draws are stored column-per-iteration so one draw is contiguous.
struct McmcChain {
  int k = 0, p = 0;
  double nu = 0.0;
  Eigen::MatrixXd beta;    // (p+1) x T
  Eigen::VectorXd tau2;    // T
  Eigen::VectorXd sigma2;  // T
  Eigen::VectorXd phi;     // T
  Eigen::MatrixXd w;       // k x T
  double accept_rate = 0.0;  // phi moves accepted after burn-in
  std::uint64_t seed = 0;
  double phi_lower = 0.0, phi_upper = 0.0;

  int draws() const { return static_cast<int>(tau2.size()); }
  double microergodic(int t) const {
    return sigma2[t] * std::pow(phi[t], 2.0 * nu);
  }
};

// Gibbs sampler for y = X*beta + w + eps with the DAG-structured prior on w.
// spec_init carries the starting sill and the fixed smoothness.
McmcChain gibbs_fit(const Dataset& data, const ReferenceDag& dag,
                    const CovarianceSpec& spec_init, const PriorSpec& priors,
                    const McmcConfig& cfg);

struct PredictionResult {
  std::vector<Location> sites;
  Eigen::VectorXd w_mean, w_sd;
  Eigen::VectorXd y_mean, y_sd, y_lo, y_hi;      // 95% interval, type-7
  Eigen::VectorXd yc_mean, yc_sd, yc_lo, yc_hi;  // draws clamped at zero
  bool clamped = false;
  std::vector<std::vector<double>> y_draws;  // kept only on request
};

// Posterior predictive at new sites. new_X must have chain.p columns (0
// columns when the model has no covariates). Per-site RNG streams make the
// output independent of the thread count.
PredictionResult predict(const McmcChain& chain, const ReferenceDag& dag,
                         const BarrierSet& b,
                         const std::vector<Location>& sites,
                         const Eigen::MatrixXd& new_X, std::uint64_t seed,
                         int threads, bool keep_draws = false);

// Replaces the y summaries with ones computed from draws clamped at zero.
PredictionResult project_nonnegative(const PredictionResult& pred);

struct SummaryRow {
  std::string name;
  double mean = 0, sd = 0, q025 = 0, q500 = 0, q975 = 0, ess = 0;
};

std::vector<SummaryRow> summarize(const McmcChain& chain);

// Effective sample size, Geyer initial positive sequence; in [1, n].
double effective_sample_size(const double* x, int n);

// Quantile with linear interpolation between order statistics (type 7).
double quantile_type7(std::vector<double> sorted_values, double p);

}  // namespace bora
