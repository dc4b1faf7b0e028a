#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bora/covariance.hpp"
#include "bora/dag.hpp"
#include "bora/geometry.hpp"
#include "bora/metrics.hpp"
#include "bora/model.hpp"

namespace bora {

// Two fault segments over the unit-ish square [0,2]^2.
std::vector<Polyline> default_faults();

struct FaultsConfig {
  int replicates = 5;
  int grid_n = 67;        // grid_n x grid_n simulation grid on [0,2]^2
  int train_stride_x = 6; // training subsample strides over the grid
  int train_stride_y = 2;
  int m = 15;
  double beta0 = 1.0;
  double beta1 = 0.5;
  double tau2 = 0.1;
  double sigma2 = 1.0;
  double phi = 4.0;
  double nu = 1.5;
  int iterations = 6000;
  int burn_in = 3000;
  int thin = 3;
  std::uint64_t seed = 91;
  int threads = 1;
  std::vector<Polyline> faults = default_faults();
  std::string outdir;  // empty: nothing written
};

struct FaultsReplicate {
  Scores barrier;       // barrier-aware fit scored against held-out y
  Scores plain;         // same data, neighbor search ignoring the faults
  double beta1_mean = 0, tau2_mean = 0, micro_mean = 0;
};

struct FaultsResult {
  std::vector<FaultsReplicate> reps;
  double mean_beta1 = 0, mean_tau2 = 0, mean_micro = 0;
  double mean_rmspe_barrier = 0, mean_rmspe_plain = 0;
  double mean_coverage_barrier = 0;
};

// Simulate fields broken by the faults, fit with and without the barriers,
// and score predictions at the held-out grid points.
FaultsResult run_faults_experiment(const FaultsConfig& cfg);

struct DoorsConfig {
  int grid_n = 57;             // grid on [lo,hi]^2
  double lo = 2.0, hi = 8.0;
  int ref_stride = 4;
  int m = 10;
  CovarianceSpec spec{1.0, 0.5, 0.5};
  std::string outdir;
};

struct ProbePair {
  Location a, b;
  double dist = 0;
  double dag_cov = 0;  // covariance induced by the neighbor structure
  double base = 0;     // stationary covariance at the same separation
};

struct DoorsResult {
  int k = 0;           // reference points kept outside the doors
  ProbePair across;    // reference pair mirrored across the left door
  ProbePair opening;   // reference pair mirrored through the gap
  ProbePair offgrid;   // off-reference pair mirrored across the left door
  ProbePair nearby;    // short-range same-side pair, one point off-reference
};

// Two wall segments with a gap between them; probes compare the induced
// covariance against the stationary one on both sides of the wall.
DoorsResult run_doors_demo(const DoorsConfig& cfg = {});

struct OrderingConfig {
  int grid_n = 41;          // grid on [0,10]^2
  int train_stride = 2;
  int m = 10;
  double beta0 = 0.3;
  double tau2 = 0.05;
  double sigma2 = 1.0;
  double phi = 1.0;
  double nu = 1.0;
  int iterations = 9000;
  int burn_in = 3000;
  int thin = 2;
  std::uint64_t seed = 47;
  int threads = 1;
  std::string outdir;
};

struct OrderingResult {
  std::vector<std::string> names;  // coordinate orderings tried
  std::vector<double> rmspe;
  double spread = 0;  // max - min
};

// One simulated dataset around a slanted fault, fit under three coordinate
// orderings of the same reference set.
OrderingResult run_ordering_study(const OrderingConfig& cfg = {});

}  // namespace bora
