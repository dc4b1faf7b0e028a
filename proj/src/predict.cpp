#include <algorithm>
#include <cmath>

#include "bora/model.hpp"
#include "bora/parallel.hpp"

namespace bora {

namespace {

struct DrawStats {
  double mean = 0, sd = 0, lo = 0, hi = 0;
};

DrawStats summarize_draws(std::vector<double> draws) {
  DrawStats s;
  const int t = static_cast<int>(draws.size());
  double sum = 0;
  for (double v : draws) sum += v;
  s.mean = sum / t;
  double ss = 0;
  for (double v : draws) ss += (v - s.mean) * (v - s.mean);
  s.sd = t > 1 ? std::sqrt(ss / (t - 1)) : 0.0;
  std::sort(draws.begin(), draws.end());
  s.lo = quantile_type7(draws, 0.025);
  s.hi = quantile_type7(draws, 0.975);
  return s;
}

}  // namespace

double quantile_type7(std::vector<double> sorted_values, double p) {
  const int n = static_cast<int>(sorted_values.size());
  if (n == 0) throw EmptyEvaluation("quantile of an empty sample");
  if (p <= 0) return sorted_values.front();
  if (p >= 1) return sorted_values.back();
  const double h = (n - 1) * p;
  const int lo = static_cast<int>(h);
  const double frac = h - lo;
  if (lo + 1 >= n) return sorted_values[n - 1];
  return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

PredictionResult predict(const McmcChain& chain, const ReferenceDag& dag,
                         const BarrierSet& b,
                         const std::vector<Location>& sites,
                         const Eigen::MatrixXd& new_X, std::uint64_t seed,
                         int threads, bool keep_draws) {
  const int ns = static_cast<int>(sites.size());
  const int T = chain.draws();
  if (ns == 0) throw EmptyEvaluation("no prediction sites");
  if (T == 0) throw InvalidSpec("chain has no saved draws");
  if (chain.p > 0 &&
      (new_X.rows() != ns || new_X.cols() != chain.p))
    throw MissingCovariates(
        "prediction sites need covariates matching the fitted model");

  PredictionResult out;
  out.sites = sites;
  out.w_mean.resize(ns);
  out.w_sd.resize(ns);
  out.y_mean.resize(ns);
  out.y_sd.resize(ns);
  out.y_lo.resize(ns);
  out.y_hi.resize(ns);
  out.yc_mean.resize(ns);
  out.yc_sd.resize(ns);
  out.yc_lo.resize(ns);
  out.yc_hi.resize(ns);
  if (keep_draws) out.y_draws.resize(ns);

  parallel_for(ns, threads, [&](int s) {
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(s));
    const NonRefNeighbors nb = nonref_neighbors(sites[s], dag, b);
    std::vector<double> wdraw(T), ydraw(T);

    if (!nb.dist.empty() && nb.dist[0] == 0.0) {
      // coincident with a reference: its w draws transfer exactly
      const int j = nb.idx[0];
      for (int t = 0; t < T; ++t) wdraw[t] = chain.w(j, t);
    } else {
      const SiteTemplate st = make_site_template(sites[s], nb, dag);
      Eigen::VectorXd wt;
      double v0 = 1.0;
      int run_start = 0;
      while (run_start < T) {
        int run_end = run_start + 1;
        const double phi = chain.phi[run_start];
        while (run_end < T && chain.phi[run_end] == phi) ++run_end;
        site_factors(st, phi, chain.nu, wt, v0);
        for (int t = run_start; t < run_end; ++t) {
          double mean = 0;
          for (std::size_t a = 0; a < nb.idx.size(); ++a)
            mean += wt[a] * chain.w(nb.idx[a], t);
          wdraw[t] = mean + std::sqrt(chain.sigma2[t] * v0) * rng.normal();
        }
        run_start = run_end;
      }
    }

    for (int t = 0; t < T; ++t) {
      double fixed = chain.beta(0, t);
      for (int c = 0; c < chain.p; ++c)
        fixed += new_X(s, c) * chain.beta(c + 1, t);
      ydraw[t] = fixed + wdraw[t] + std::sqrt(chain.tau2[t]) * rng.normal();
    }

    const DrawStats ws = summarize_draws(wdraw);
    out.w_mean[s] = ws.mean;
    out.w_sd[s] = ws.sd;
    const DrawStats ys = summarize_draws(ydraw);
    out.y_mean[s] = ys.mean;
    out.y_sd[s] = ys.sd;
    out.y_lo[s] = ys.lo;
    out.y_hi[s] = ys.hi;

    std::vector<double> clamped = ydraw;
    for (double& v : clamped) v = std::max(0.0, v);
    const DrawStats cs = summarize_draws(std::move(clamped));
    out.yc_mean[s] = cs.mean;
    out.yc_sd[s] = cs.sd;
    out.yc_lo[s] = cs.lo;
    out.yc_hi[s] = cs.hi;

    if (keep_draws) out.y_draws[s] = std::move(ydraw);
  });
  return out;
}

PredictionResult project_nonnegative(const PredictionResult& pred) {
  PredictionResult out = pred;
  out.clamped = true;
  out.y_mean = pred.yc_mean;
  out.y_sd = pred.yc_sd;
  out.y_lo = pred.yc_lo;
  out.y_hi = pred.yc_hi;
  return out;
}

}  // namespace bora
