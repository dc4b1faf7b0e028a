#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "bora/bessel.hpp"
#include "bora/dag.hpp"
#include "bora/rng.hpp"

namespace bora {

struct CovarianceSpec {
  double sigma2 = 1.0;
  double phi = 1.0;
  double nu = 0.5;
};

void validate_spec(const CovarianceSpec& spec);

// Matern covariance at separation d.
double base_cov(double d, const CovarianceSpec& spec);

struct LocalFactors {
  Eigen::VectorXd weights;  // kriging weights on the neighbors
  double cond_var = 0.0;    // conditional variance given the neighbors
};

// Factors of the conditional N(weights' w_nbrs, cond_var). Empty neighbor
// set gives (empty, sigma2). Retries once with diagonal jitter 1e-10*sigma2
// before raising SingularNeighborGram.
LocalFactors local_factors(const Location& target,
                           const std::vector<Location>& nbrs,
                           const CovarianceSpec& spec);

// Flattened per-node factors at unit sill; weights are sill-invariant.
struct DagFactors {
  std::vector<int> offset, len;
  std::vector<double> weights;
  Eigen::VectorXd cond_var;

  Eigen::Map<const Eigen::VectorXd> row(int i) const {
    return {weights.data() + offset[i], static_cast<Eigen::Index>(len[i])};
  }
};

// Distance templates snapshotted from a DAG so factors can be recomputed for
// many phi values without touching geometry again.
class DagFactorEngine {
 public:
  explicit DagFactorEngine(const ReferenceDag& dag);

  void compute(double phi, double nu, DagFactors& out) const;

  int size() const { return k_; }
  int max_neighbors() const { return max_m_; }

 private:
  std::vector<int> offset_, len_, gram_offset_;
  std::vector<double> d_target_;  // node -> neighbor distances
  std::vector<double> d_gram_;    // neighbor pair distances, row-major blocks
  int max_m_ = 0;
  int k_ = 0;
};

// Same template idea for a single off-dag location.
struct SiteTemplate {
  std::vector<int> idx;
  Eigen::VectorXd d_target;
  Eigen::MatrixXd d_gram;
};

SiteTemplate make_site_template(const Location& u, const NonRefNeighbors& nb,
                                const ReferenceDag& dag);

// Unit-sill weights and conditional variance for one site.
void site_factors(const SiteTemplate& st, double phi, double nu,
                  Eigen::VectorXd& weights, double& cond_var);

// C-tilde^{-1} = (I-M)' V^{-1} (I-M), held as A = V^{-1/2}(I-M) so entries of
// C-tilde come from two sparse triangular solves, never a dense inverse.
struct SparseGpFactors {
  CovarianceSpec spec;
  DagFactors unit;
  Eigen::VectorXd cond_var;  // sigma2 * unit.cond_var
  Eigen::SparseMatrix<double> A;   // lower triangular, unit-free scale
  Eigen::SparseMatrix<double> At;  // transpose of A

  Eigen::VectorXd ctilde_column(int j) const;
  Eigen::SparseMatrix<double> precision() const { return At * A; }
};

SparseGpFactors assemble_precision(const ReferenceDag& dag,
                                   const CovarianceSpec& spec);

// Covariance induced on the whole domain: reference pairs read C-tilde,
// off-dag locations condition on their neighbor sets.
double nonstationary_cov(const Location& s1, const Location& s2,
                         const ReferenceDag& dag, const SparseGpFactors& f,
                         const BarrierSet& b);

// Ancestral draw of w over the reference set.
Eigen::VectorXd sample_prior_w(const ReferenceDag& dag,
                               const SparseGpFactors& f, Rng& rng);

}  // namespace bora
