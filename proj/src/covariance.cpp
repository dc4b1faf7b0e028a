#include "bora/covariance.hpp"

#include <cmath>

namespace bora {

namespace {

constexpr double kJitter = 1e-10;  // relative to the sill

// In-place lower Cholesky; false when a pivot is not positive.
template <typename Mat>
bool chol_lower(Mat&& g) {
  const int n = static_cast<int>(g.rows());
  for (int j = 0; j < n; ++j) {
    double d = g(j, j);
    for (int t = 0; t < j; ++t) d -= g(j, t) * g(j, t);
    if (!(d > 0.0)) return false;
    const double r = std::sqrt(d);
    g(j, j) = r;
    for (int i = j + 1; i < n; ++i) {
      double v = g(i, j);
      for (int t = 0; t < j; ++t) v -= g(i, t) * g(j, t);
      g(i, j) = v / r;
    }
  }
  return true;
}

// Unit-sill conditional factors from distance templates. Fills `weights_out`
// (length n) and the conditional variance. The scratch matrices are reused
// across calls so the hot loop does not allocate.
void unit_factors_from_dists(const double* d_target, const double* d_gram,
                             int n, int gram_stride, double phi, double nu,
                             double* weights_out, double* cond_var_out,
                             Eigen::MatrixXd& gwork, Eigen::VectorXd& cwork) {
  if (n == 0) {
    *cond_var_out = 1.0;
    return;
  }
  if (gwork.rows() < n) {
    gwork.resize(n, n);
    cwork.resize(n);
  }
  auto fill = [&](double jitter) {
    for (int a = 0; a < n; ++a) {
      cwork[a] = matern_corr(phi * d_target[a], nu);
      gwork(a, a) = 1.0 + jitter;
      for (int b = 0; b < a; ++b)
        gwork(a, b) = matern_corr(phi * d_gram[a * gram_stride + b], nu);
    }
  };
  for (int attempt = 0; attempt < 2; ++attempt) {
    fill(attempt == 0 ? 0.0 : kJitter);
    auto g = gwork.topLeftCorner(n, n);
    if (!chol_lower(g)) continue;
    double v = 1.0;
    for (int a = 0; a < n; ++a) {
      weights_out[a] = cwork[a];
    }
    // solve (L L') x = c in place
    for (int i = 0; i < n; ++i) {
      double s = weights_out[i];
      for (int t = 0; t < i; ++t) s -= g(i, t) * weights_out[t];
      weights_out[i] = s / g(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = weights_out[i];
      for (int t = i + 1; t < n; ++t) s -= g(t, i) * weights_out[t];
      weights_out[i] = s / g(i, i);
    }
    for (int a = 0; a < n; ++a) v -= cwork[a] * weights_out[a];
    if (v > 0.0) {
      *cond_var_out = v;
      return;
    }
  }
  throw SingularNeighborGram(
      "neighbor Gram matrix is singular even after jitter; are the "
      "locations distinct?");
}

}  // namespace

void validate_spec(const CovarianceSpec& spec) {
  if (!(spec.sigma2 > 0.0) || !std::isfinite(spec.sigma2))
    throw InvalidSpec("sigma2 must be positive and finite");
  if (!(spec.phi > 0.0) || !std::isfinite(spec.phi))
    throw InvalidSpec("phi must be positive and finite");
  if (!(spec.nu > 0.0) || !std::isfinite(spec.nu))
    throw InvalidSpec("nu must be positive and finite");
}

double base_cov(double d, const CovarianceSpec& spec) {
  validate_spec(spec);
  if (std::isnan(d) || d < 0.0)
    throw NegativeDistance("base_cov: distance must be nonnegative");
  return spec.sigma2 * matern_corr(spec.phi * d, spec.nu);
}

LocalFactors local_factors(const Location& target,
                           const std::vector<Location>& nbrs,
                           const CovarianceSpec& spec) {
  validate_spec(spec);
  LocalFactors out;
  const int n = static_cast<int>(nbrs.size());
  if (n == 0) {
    out.cond_var = spec.sigma2;
    return out;
  }
  Eigen::VectorXd d_target(n);
  Eigen::MatrixXd d_gram(n, n);
  for (int a = 0; a < n; ++a) {
    d_target[a] = distance(target, nbrs[a]);
    for (int b = 0; b < n; ++b) d_gram(a, b) = distance(nbrs[a], nbrs[b]);
  }
  out.weights.resize(n);
  Eigen::MatrixXd gwork;
  Eigen::VectorXd cwork;
  double v0 = 0;
  // d_gram is symmetric, so the row-major stride view is safe
  unit_factors_from_dists(d_target.data(), d_gram.data(), n, n, spec.phi,
                          spec.nu, out.weights.data(), &v0, gwork, cwork);
  out.cond_var = spec.sigma2 * v0;
  return out;
}

DagFactorEngine::DagFactorEngine(const ReferenceDag& dag) {
  k_ = static_cast<int>(dag.refs.size());
  offset_.resize(k_);
  len_.resize(k_);
  gram_offset_.resize(k_);
  int total = 0, gtotal = 0;
  for (int i = 0; i < k_; ++i) {
    const int n = static_cast<int>(dag.nbrs[i].idx.size());
    offset_[i] = total;
    gram_offset_[i] = gtotal;
    len_[i] = n;
    total += n;
    gtotal += n * n;
    max_m_ = std::max(max_m_, n);
  }
  d_target_.resize(total);
  d_gram_.resize(gtotal);
  for (int i = 0; i < k_; ++i) {
    const NeighborList& nl = dag.nbrs[i];
    const int n = len_[i];
    for (int a = 0; a < n; ++a) {
      d_target_[offset_[i] + a] = distance(dag.refs[i], dag.refs[nl.idx[a]]);
      for (int b = 0; b < n; ++b)
        d_gram_[gram_offset_[i] + a * n + b] =
            distance(dag.refs[nl.idx[a]], dag.refs[nl.idx[b]]);
    }
  }
}

void DagFactorEngine::compute(double phi, double nu, DagFactors& out) const {
  out.offset = offset_;
  out.len = len_;
  out.weights.resize(d_target_.size());
  out.cond_var.resize(k_);
  Eigen::MatrixXd gwork;
  Eigen::VectorXd cwork;
  for (int i = 0; i < k_; ++i) {
    double v0 = 1.0;
    unit_factors_from_dists(d_target_.data() + offset_[i],
                            d_gram_.data() + gram_offset_[i], len_[i], len_[i],
                            phi, nu, out.weights.data() + offset_[i], &v0,
                            gwork, cwork);
    out.cond_var[i] = v0;
  }
}

SiteTemplate make_site_template(const Location& u, const NonRefNeighbors& nb,
                                const ReferenceDag& dag) {
  SiteTemplate st;
  st.idx = nb.idx;
  const int n = static_cast<int>(nb.idx.size());
  st.d_target.resize(n);
  st.d_gram.resize(n, n);
  for (int a = 0; a < n; ++a) {
    st.d_target[a] = distance(u, dag.refs[nb.idx[a]]);
    for (int b = 0; b < n; ++b)
      st.d_gram(a, b) = distance(dag.refs[nb.idx[a]], dag.refs[nb.idx[b]]);
  }
  return st;
}

void site_factors(const SiteTemplate& st, double phi, double nu,
                  Eigen::VectorXd& weights, double& cond_var) {
  const int n = static_cast<int>(st.idx.size());
  weights.resize(n);
  cond_var = 1.0;
  if (n == 0) return;
  Eigen::MatrixXd gwork;
  Eigen::VectorXd cwork;
  // d_gram is symmetric, so row-major stride over a col-major matrix is fine
  unit_factors_from_dists(st.d_target.data(), st.d_gram.data(), n, n, phi, nu,
                          weights.data(), &cond_var, gwork, cwork);
}

SparseGpFactors assemble_precision(const ReferenceDag& dag,
                                   const CovarianceSpec& spec) {
  validate_spec(spec);
  SparseGpFactors f;
  f.spec = spec;
  DagFactorEngine engine(dag);
  engine.compute(spec.phi, spec.nu, f.unit);
  const int k = static_cast<int>(dag.refs.size());
  f.cond_var = spec.sigma2 * f.unit.cond_var;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(f.unit.weights.size() + k);
  for (int i = 0; i < k; ++i) {
    const double s = 1.0 / std::sqrt(f.cond_var[i]);
    trips.emplace_back(i, i, s);
    const NeighborList& nl = dag.nbrs[i];
    for (int a = 0; a < f.unit.len[i]; ++a)
      trips.emplace_back(i, nl.idx[a], -s * f.unit.weights[f.unit.offset[i] + a]);
  }
  f.A.resize(k, k);
  f.A.setFromTriplets(trips.begin(), trips.end());
  f.A.makeCompressed();
  f.At = f.A.transpose();
  f.At.makeCompressed();
  return f;
}

Eigen::VectorXd SparseGpFactors::ctilde_column(int j) const {
  const Eigen::Index k = A.rows();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(k);
  z[j] = 1.0;
  At.triangularView<Eigen::Upper>().solveInPlace(z);
  A.triangularView<Eigen::Lower>().solveInPlace(z);
  return z;
}

namespace {

struct SideInfo {
  bool is_ref = false;
  int ref_idx = -1;
  NonRefNeighbors nb;
  Eigen::VectorXd weights;  // unit-sill kriging weights for non-reference
  double cond_var = 0.0;    // sill-scaled
};

SideInfo classify(const Location& s, const ReferenceDag& dag,
                  const SparseGpFactors& f, const BarrierSet& b) {
  SideInfo info;
  info.ref_idx = dag.find_ref(s);
  info.is_ref = info.ref_idx >= 0;
  if (info.is_ref) return info;
  info.nb = nonref_neighbors(s, dag, b);
  const SiteTemplate st = make_site_template(s, info.nb, dag);
  double v0 = 1.0;
  site_factors(st, f.spec.phi, f.spec.nu, info.weights, v0);
  info.cond_var = f.spec.sigma2 * v0;
  return info;
}

}  // namespace

double nonstationary_cov(const Location& s1, const Location& s2,
                         const ReferenceDag& dag, const SparseGpFactors& f,
                         const BarrierSet& b) {
  SideInfo a = classify(s1, dag, f, b);
  SideInfo c = classify(s2, dag, f, b);
  if (a.is_ref && c.is_ref)
    return f.ctilde_column(c.ref_idx)[a.ref_idx];
  if (a.is_ref != c.is_ref) {
    if (a.is_ref) std::swap(a, c);  // keep the non-reference on the left
    const Eigen::VectorXd col = f.ctilde_column(c.ref_idx);
    double v = 0.0;
    for (std::size_t t = 0; t < a.nb.idx.size(); ++t)
      v += a.weights[t] * col[a.nb.idx[t]];
    return v;
  }
  // both off the dag
  const bool same = s1 == s2;
  const std::size_t n1 = a.nb.idx.size(), n2 = c.nb.idx.size();
  double v = same ? a.cond_var : 0.0;
  // columns for the smaller side
  const SideInfo& colside = n1 <= n2 ? a : c;
  const SideInfo& rowside = n1 <= n2 ? c : a;
  for (std::size_t t = 0; t < colside.nb.idx.size(); ++t) {
    const Eigen::VectorXd col = f.ctilde_column(colside.nb.idx[t]);
    double inner = 0.0;
    for (std::size_t r = 0; r < rowside.nb.idx.size(); ++r)
      inner += rowside.weights[r] * col[rowside.nb.idx[r]];
    v += colside.weights[t] * inner;
  }
  return v;
}

Eigen::VectorXd sample_prior_w(const ReferenceDag& dag,
                               const SparseGpFactors& f, Rng& rng) {
  const int k = static_cast<int>(dag.refs.size());
  Eigen::VectorXd w(k);
  for (int i = 0; i < k; ++i) {
    double mean = 0.0;
    const NeighborList& nl = dag.nbrs[i];
    for (int t = 0; t < f.unit.len[i]; ++t)
      mean += f.unit.weights[f.unit.offset[i] + t] * w[nl.idx[t]];
    w[i] = mean + std::sqrt(f.cond_var[i]) * rng.normal();
  }
  return w;
}

}  // namespace bora
