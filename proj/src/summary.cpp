#include <algorithm>
#include <cmath>
#include <numeric>

#include "bora/model.hpp"

namespace bora {

double effective_sample_size(const double* x, int n) {
  if (n <= 0) throw EmptyEvaluation("ess of an empty chain");
  if (n == 1) return 1.0;
  const double mean = std::accumulate(x, x + n, 0.0) / n;
  std::vector<double> c(n, 0.0);
  double var = 0.0;
  for (int i = 0; i < n; ++i) var += (x[i] - mean) * (x[i] - mean);
  var /= n;
  if (var <= 0.0) return 1.0;  // constant chain carries one datum
  auto gamma_hat = [&](int lag) {
    double s = 0.0;
    for (int i = 0; i + lag < n; ++i)
      s += (x[i] - mean) * (x[i + lag] - mean);
    return s / n;
  };
  // Geyer: sum pair sums Gamma_t = gamma(2t) + gamma(2t+1) while positive
  double tau = 1.0;  // = 1 + 2 sum rho, assembled from pair sums
  double g_prev = var + gamma_hat(1);
  if (g_prev > 0) tau = 2.0 * g_prev / var - 1.0;
  for (int t = 1; 2 * t + 1 < n; ++t) {
    const double g = gamma_hat(2 * t) + gamma_hat(2 * t + 1);
    if (g <= 0.0) break;
    tau += 2.0 * g / var;
  }
  const double ess = n / std::max(tau, 1e-12);
  return std::clamp(ess, 1.0, double(n));
}

std::vector<SummaryRow> summarize(const McmcChain& chain) {
  const int T = chain.draws();
  if (T == 0) throw EmptyEvaluation("chain has no saved draws");

  auto make_row = [&](const std::string& name, std::vector<double> v) {
    SummaryRow r;
    r.name = name;
    double sum = 0;
    for (double q : v) sum += q;
    r.mean = sum / T;
    double ss = 0;
    for (double q : v) ss += (q - r.mean) * (q - r.mean);
    r.sd = T > 1 ? std::sqrt(ss / (T - 1)) : 0.0;
    r.ess = effective_sample_size(v.data(), T);
    std::sort(v.begin(), v.end());
    r.q025 = quantile_type7(v, 0.025);
    r.q500 = quantile_type7(v, 0.5);
    r.q975 = quantile_type7(v, 0.975);
    return r;
  };

  std::vector<SummaryRow> rows;
  for (int c = 0; c <= chain.p; ++c) {
    std::vector<double> v(T);
    for (int t = 0; t < T; ++t) v[t] = chain.beta(c, t);
    rows.push_back(make_row("beta" + std::to_string(c), std::move(v)));
  }
  rows.push_back(make_row(
      "tau2", {chain.tau2.data(), chain.tau2.data() + T}));
  rows.push_back(make_row(
      "sigma2", {chain.sigma2.data(), chain.sigma2.data() + T}));
  rows.push_back(
      make_row("phi", {chain.phi.data(), chain.phi.data() + T}));
  std::vector<double> micro(T);
  for (int t = 0; t < T; ++t) micro[t] = chain.microergodic(t);
  rows.push_back(make_row("sigma2_phi_2nu", std::move(micro)));
  return rows;
}

}  // namespace bora
