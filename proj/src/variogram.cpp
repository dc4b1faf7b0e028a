#include "bora/variogram.hpp"

#include <algorithm>
#include <cmath>

namespace bora {

EmpiricalVariogram empirical_variogram(const Dataset& data, int n_bins,
                                       double max_dist) {
  validate_dataset(data);
  const int n = data.n();
  if (n < 2) throw TooFewPoints("variogram needs at least 2 locations");
  if (n_bins < 1) throw InvalidSpec("variogram needs at least 1 bin");

  Eigen::VectorXd resid;
  if (data.p() == 0) {
    resid = data.y.array() - data.y.mean();
  } else {
    Eigen::MatrixXd Xf(n, data.p() + 1);
    Xf.col(0).setOnes();
    Xf.rightCols(data.p()) = data.X;
    const Eigen::VectorXd beta =
        (Xf.transpose() * Xf).llt().solve(Xf.transpose() * data.y);
    resid = data.y - Xf * beta;
  }

  if (max_dist <= 0) {
    double dmax = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        dmax = std::max(dmax, distance(data.locations[i], data.locations[j]));
    max_dist = 0.5 * dmax;
    if (max_dist <= 0) throw DegenerateBins("all locations coincide");
  }

  const double h = max_dist / n_bins;
  std::vector<double> acc(n_bins, 0.0);
  std::vector<long> cnt(n_bins, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = distance(data.locations[i], data.locations[j]);
      if (d > max_dist || d <= 0) continue;
      const int b = std::min(static_cast<int>(d / h), n_bins - 1);
      const double diff = resid[i] - resid[j];
      acc[b] += diff * diff;
      ++cnt[b];
    }

  EmpiricalVariogram out;
  for (int b = 0; b < n_bins; ++b) {
    if (cnt[b] == 0) continue;
    out.bin_center.push_back(h * (b + 0.5));
    out.gamma.push_back(acc[b] / (2.0 * cnt[b]));
    out.count.push_back(cnt[b]);
  }
  return out;
}

double matern_decay_distance(double nu, double phi, double target) {
  if (!(target > 0) || !(target < 1))
    throw InvalidSpec("decay target must be in (0,1)");
  double lo = 1e-9, hi = 1.0;
  while (matern_corr(hi, nu) > target && hi < 1e9) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (matern_corr(mid, nu) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi) / phi;
}

namespace {

struct WlsResult {
  double tau2, sigma2, obj;
};

// gamma(h) = tau2 + sigma2 * (1 - rho(phi h)); linear WLS in (tau2, sigma2)
// with nonnegativity by clamping to the active constraint.
WlsResult wls_at_phi(const EmpiricalVariogram& emp, double nu, double phi) {
  const std::size_t nb = emp.bin_center.size();
  double sw = 0, sg = 0, sgg = 0, sy = 0, sgy = 0;
  std::vector<double> g(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const double wb = static_cast<double>(emp.count[b]);
    g[b] = 1.0 - matern_corr(phi * emp.bin_center[b], nu);
    sw += wb;
    sg += wb * g[b];
    sgg += wb * g[b] * g[b];
    sy += wb * emp.gamma[b];
    sgy += wb * g[b] * emp.gamma[b];
  }
  const double det = sw * sgg - sg * sg;
  double tau2, sigma2;
  if (std::abs(det) < 1e-30) {
    tau2 = 0.0;
    sigma2 = sgg > 0 ? std::max(0.0, sgy / sgg) : 0.0;
  } else {
    tau2 = (sgg * sy - sg * sgy) / det;
    sigma2 = (sw * sgy - sg * sy) / det;
    if (sigma2 < 0) {
      sigma2 = 0.0;
      tau2 = std::max(0.0, sy / sw);
    } else if (tau2 < 0) {
      tau2 = 0.0;
      sigma2 = sgg > 0 ? std::max(0.0, sgy / sgg) : 0.0;
    }
  }
  double obj = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    const double r = emp.gamma[b] - tau2 - sigma2 * g[b];
    obj += static_cast<double>(emp.count[b]) * r * r;
  }
  return {tau2, sigma2, obj};
}

}  // namespace

VariogramFit fit_matern_variogram(const EmpiricalVariogram& emp, double nu) {
  if (emp.bin_center.size() < 3)
    throw DegenerateBins("variogram fit needs at least 3 nonempty bins");
  if (!(nu > 0)) throw InvalidSpec("nu must be positive");

  const double h_max =
      *std::max_element(emp.bin_center.begin(), emp.bin_center.end());
  const double xstar = matern_decay_distance(nu, 1.0, 0.05);
  const double lo = xstar / (0.75 * h_max) / 10.0;
  const double hi = xstar / (0.25 * h_max) * 10.0;

  const int n_grid = 60;
  double best_phi = lo;
  WlsResult best = wls_at_phi(emp, nu, lo);
  for (int i = 1; i < n_grid; ++i) {
    const double phi =
        lo * std::pow(hi / lo, static_cast<double>(i) / (n_grid - 1));
    const WlsResult r = wls_at_phi(emp, nu, phi);
    if (r.obj < best.obj) {
      best = r;
      best_phi = phi;
    }
  }

  // golden-section refinement on log(phi) around the winning grid point
  const double step = std::log(hi / lo) / (n_grid - 1);
  double a = std::log(best_phi) - step, c = std::log(best_phi) + step;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
  WlsResult f1 = wls_at_phi(emp, nu, std::exp(x1));
  WlsResult f2 = wls_at_phi(emp, nu, std::exp(x2));
  for (int it = 0; it < 80; ++it) {
    if (f1.obj < f2.obj) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - gr * (c - a);
      f1 = wls_at_phi(emp, nu, std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (c - a);
      f2 = wls_at_phi(emp, nu, std::exp(x2));
    }
  }
  const double phi_ref = f1.obj < f2.obj ? std::exp(x1) : std::exp(x2);
  const WlsResult& ref = f1.obj < f2.obj ? f1 : f2;

  VariogramFit fit;
  fit.nu = nu;
  if (ref.obj <= best.obj) {
    fit.tau2 = ref.tau2;
    fit.sigma2 = ref.sigma2;
    fit.phi = phi_ref;
    fit.objective = ref.obj;
  } else {
    fit.tau2 = best.tau2;
    fit.sigma2 = best.sigma2;
    fit.phi = best_phi;
    fit.objective = best.obj;
  }
  return fit;
}

void starting_values(const Dataset& train, double nu, CovarianceSpec* spec,
                     McmcConfig* cfg) {
  const double mean = train.y.mean();
  const double var =
      (train.y.array() - mean).square().sum() / std::max(1, train.n() - 1);
  spec->nu = nu;
  spec->sigma2 = std::max(0.5 * var, 1e-8);
  cfg->tau2_init = -1.0;
  try {
    const EmpiricalVariogram emp = empirical_variogram(train, 15, -1.0);
    const VariogramFit fit = fit_matern_variogram(emp, nu);
    if (fit.sigma2 > 1e-6 * var) spec->sigma2 = fit.sigma2;
    if (fit.tau2 > 0) cfg->tau2_init = fit.tau2;
  } catch (const Error&) {
  }
}

}  // namespace bora
