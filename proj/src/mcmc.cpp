#include <algorithm>
#include <cmath>
#include <limits>

#include "bora/model.hpp"

namespace bora {

void validate_dataset(const Dataset& data) {
  const int n = data.n();
  if (n == 0) throw InvalidSpec("dataset is empty");
  if (data.y.size() != n)
    throw DimensionMismatch("response length does not match locations");
  if (data.X.size() > 0 && data.X.rows() != n)
    throw DimensionMismatch("covariate rows do not match locations");
  for (const Location& s : data.locations)
    if (!std::isfinite(s.x) || !std::isfinite(s.y))
      throw NonFinite("dataset location with non-finite coordinate");
  if (!data.y.allFinite()) throw NonFinite("non-finite response value");
  if (data.X.size() > 0 && !data.X.allFinite())
    throw NonFinite("non-finite covariate value");
}

namespace {

struct FlatDag {
  std::vector<int> nbr_off, nbr_len, nbr_idx;
  std::vector<int> child_off, child_len, child_node, child_slot;
};

FlatDag flatten(const ReferenceDag& dag) {
  FlatDag f;
  const int k = static_cast<int>(dag.refs.size());
  f.nbr_off.resize(k);
  f.nbr_len.resize(k);
  int total = 0;
  for (int i = 0; i < k; ++i) {
    f.nbr_off[i] = total;
    f.nbr_len[i] = static_cast<int>(dag.nbrs[i].idx.size());
    total += f.nbr_len[i];
  }
  f.nbr_idx.reserve(total);
  std::vector<std::vector<std::pair<int, int>>> children(k);
  for (int i = 0; i < k; ++i)
    for (std::size_t s = 0; s < dag.nbrs[i].idx.size(); ++s) {
      f.nbr_idx.push_back(dag.nbrs[i].idx[s]);
      children[dag.nbrs[i].idx[s]].emplace_back(i, static_cast<int>(s));
    }
  f.child_off.resize(k);
  f.child_len.resize(k);
  int ctotal = 0;
  for (int i = 0; i < k; ++i) {
    f.child_off[i] = ctotal;
    f.child_len[i] = static_cast<int>(children[i].size());
    ctotal += f.child_len[i];
  }
  f.child_node.reserve(ctotal);
  f.child_slot.reserve(ctotal);
  for (int i = 0; i < k; ++i)
    for (const auto& [node, slot] : children[i]) {
      f.child_node.push_back(node);
      f.child_slot.push_back(slot);
    }
  return f;
}

double conditional_mean(const FlatDag& fd, const DagFactors& fac,
                        const Eigen::VectorXd& w, int i) {
  double a = 0.0;
  const int off = fd.nbr_off[i];
  for (int t = 0; t < fd.nbr_len[i]; ++t)
    a += fac.weights[fac.offset[i] + t] * w[fd.nbr_idx[off + t]];
  return a;
}

// log density of w under the DAG factorization, dropping terms that do not
// involve phi: -1/2 sum log v0_i - (1/(2 sigma2)) sum (w_i - a_i)^2 / v0_i
double loglik_w(const FlatDag& fd, const DagFactors& fac,
                const Eigen::VectorXd& w, double sigma2) {
  double logdet = 0.0, quad = 0.0;
  const int k = static_cast<int>(w.size());
  for (int i = 0; i < k; ++i) {
    const double a = conditional_mean(fd, fac, w, i);
    const double r = w[i] - a;
    logdet += std::log(fac.cond_var[i]);
    quad += r * r / fac.cond_var[i];
  }
  return -0.5 * logdet - 0.5 * quad / sigma2;
}

}  // namespace

McmcChain gibbs_fit(const Dataset& data, const ReferenceDag& dag,
                    const CovarianceSpec& spec_init, const PriorSpec& priors,
                    const McmcConfig& cfg) {
  validate_dataset(data);
  validate_spec(spec_init);
  const int k = static_cast<int>(dag.refs.size());
  const int n = data.n();
  if (n != k) throw DimensionMismatch("dataset size does not match the dag");
  for (int i = 0; i < k; ++i)
    if (!(data.locations[i] == dag.refs[i]))
      throw DimensionMismatch("dataset locations must match the dag order");
  if (!(priors.phi_lower > 0) || !(priors.phi_upper > priors.phi_lower))
    throw InvalidSpec("phi prior requires 0 < lower < upper");
  if (priors.a_tau <= 0 || priors.b_tau <= 0 || priors.a_sigma <= 0 ||
      priors.b_sigma <= 0)
    throw InvalidSpec("inverse gamma priors require positive parameters");
  if (cfg.iterations <= cfg.burn_in || cfg.burn_in < 0 || cfg.thin < 1)
    throw InvalidSpec("need iterations > burn_in >= 0 and thin >= 1");

  const int p = data.p();
  Eigen::MatrixXd Xf(n, p + 1);
  Xf.col(0).setOnes();
  if (p > 0) Xf.rightCols(p) = data.X;
  const Eigen::MatrixXd XtX = Xf.transpose() * Xf;
  const Eigen::LLT<Eigen::MatrixXd> llt(XtX);
  if (llt.info() != Eigen::Success)
    throw InvalidSpec("design matrix is rank deficient");

  const FlatDag fd = flatten(dag);
  const DagFactorEngine engine(dag);

  Rng rng(cfg.seed);

  // starting values: least squares for beta, residuals for w
  Eigen::VectorXd beta = llt.solve(Xf.transpose() * data.y);
  Eigen::VectorXd w = data.y - Xf * beta;
  const double resid_var =
      w.squaredNorm() / std::max(1, n - (p + 1));
  double tau2 = cfg.tau2_init > 0 ? cfg.tau2_init
                                  : std::max(0.1 * resid_var, 1e-8);
  double sigma2 = spec_init.sigma2;
  const double lo = priors.phi_lower, hi = priors.phi_upper;
  double phi = 0.5 * (lo + hi);
  const double nu = spec_init.nu;

  DagFactors cur, prop;
  engine.compute(phi, nu, cur);

  const int T = (cfg.iterations - cfg.burn_in) / cfg.thin;
  McmcChain chain;
  chain.k = k;
  chain.p = p;
  chain.nu = nu;
  chain.seed = cfg.seed;
  chain.phi_lower = lo;
  chain.phi_upper = hi;
  chain.beta.resize(p + 1, T);
  chain.tau2.resize(T);
  chain.sigma2.resize(T);
  chain.phi.resize(T);
  chain.w.resize(k, T);

  double prop_sd = cfg.phi_proposal_sd;
  if (!(prop_sd > 0)) throw InvalidSpec("phi proposal sd must be positive");
  long accepted = 0, proposed = 0;
  double cur_ll = loglik_w(fd, cur, w, sigma2);
  bool cur_ll_valid = true;  // invalidated when w or sigma2 move

  Eigen::VectorXd xb = Xf * beta;
  int saved = 0;
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    // w: one Gauss-Seidel sweep of scalar conditionals
    for (int i = 0; i < k; ++i) {
      const double fi = sigma2 * cur.cond_var[i];
      double prec = 1.0 / tau2 + 1.0 / fi;
      double num = (data.y[i] - xb[i]) / tau2 +
                   conditional_mean(fd, cur, w, i) / fi;
      const int coff = fd.child_off[i];
      for (int t = 0; t < fd.child_len[i]; ++t) {
        const int j = fd.child_node[coff + t];
        const int slot = fd.child_slot[coff + t];
        const double bji = cur.weights[cur.offset[j] + slot];
        const double fj = sigma2 * cur.cond_var[j];
        const double aj = conditional_mean(fd, cur, w, j);
        // child residual with w_i's contribution removed
        const double r = w[j] - (aj - bji * w[i]);
        prec += bji * bji / fj;
        num += bji * r / fj;
      }
      w[i] = num / prec + rng.normal() / std::sqrt(prec);
    }
    cur_ll_valid = false;

    if (cfg.sample_beta) {
      const Eigen::VectorXd bhat = llt.solve(Xf.transpose() * (data.y - w));
      Eigen::VectorXd z(p + 1);
      for (int t = 0; t <= p; ++t) z[t] = rng.normal();
      beta = bhat + std::sqrt(tau2) *
                        llt.matrixU().solve(z);
      xb = Xf * beta;
    }

    if (cfg.sample_tau2) {
      const double ssr = (data.y - xb - w).squaredNorm();
      tau2 = rng.inv_gamma(priors.a_tau + 0.5 * n, priors.b_tau + 0.5 * ssr);
    }

    if (cfg.sample_sigma2) {
      double q0 = 0.0;
      for (int i = 0; i < k; ++i) {
        const double r = w[i] - conditional_mean(fd, cur, w, i);
        q0 += r * r / cur.cond_var[i];
      }
      sigma2 =
          rng.inv_gamma(priors.a_sigma + 0.5 * k, priors.b_sigma + 0.5 * q0);
      cur_ll_valid = false;
    }

    if (cfg.sample_phi) {
      if (!cur_ll_valid) {
        cur_ll = loglik_w(fd, cur, w, sigma2);
        cur_ll_valid = true;
      }
      const double theta = std::log((phi - lo) / (hi - phi));
      const double theta_p = theta + prop_sd * rng.normal();
      const double phi_p = lo + (hi - lo) / (1.0 + std::exp(-theta_p));
      double log_alpha = -std::numeric_limits<double>::infinity();
      if (phi_p > lo && phi_p < hi) {  // sigmoid can saturate at the ends
        engine.compute(phi_p, nu, prop);
        const double prop_ll = loglik_w(fd, prop, w, sigma2);
        log_alpha = prop_ll + std::log((phi_p - lo) * (hi - phi_p)) -
                    (cur_ll + std::log((phi - lo) * (hi - phi)));
        if (std::log(rng.uniform_pos()) < log_alpha) {
          phi = phi_p;
          std::swap(cur, prop);
          cur_ll = prop_ll;
          if (iter > cfg.burn_in) ++accepted;
        }
      }
      if (iter > cfg.burn_in) ++proposed;
      if (cfg.adapt && iter <= cfg.burn_in) {
        const double acc = std::min(1.0, std::exp(log_alpha));
        prop_sd *= std::exp(std::pow(iter, -0.6) * (acc - 0.3));
        prop_sd = std::clamp(prop_sd, 1e-3, 10.0);
      }
    }

    if (!std::isfinite(tau2) || !std::isfinite(sigma2) ||
        !std::isfinite(beta[0]) || !std::isfinite(w[k - 1]))
      throw NonFiniteLikelihood("non-finite state at iteration " +
                                std::to_string(iter));

    if (iter > cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0 &&
        saved < T) {
      chain.beta.col(saved) = beta;
      chain.tau2[saved] = tau2;
      chain.sigma2[saved] = sigma2;
      chain.phi[saved] = phi;
      chain.w.col(saved) = w;
      ++saved;
    }
  }
  chain.accept_rate = proposed > 0 ? double(accepted) / double(proposed) : 0.0;
  return chain;
}

}  // namespace bora
