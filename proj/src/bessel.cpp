#include "bora/bessel.hpp"

#include <cmath>

#include "bora/errors.hpp"

namespace bora {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Coefficients of 1/Gamma(1+x) = sum a_k x^k.
constexpr double kA1 = 0.57721566490153286061;
constexpr double kA2 = -0.65587807152025388108;
constexpr double kA3 = -0.04200263503409523553;
constexpr double kA4 = 0.16653861138229148950;
constexpr double kA5 = -0.04219773455554433675;
constexpr double kA6 = -0.00962197152787697356;
constexpr double kA7 = 0.00721894324666309954;

struct KPair {
  double kmu;   // K_mu(x), scaled by exp(x) when `scaled`
  double kmu1;  // K_{mu+1}(x), same scaling
};

// Temme's series, |mu| <= 1/2, 0 < x <= 2.
KPair temme_series(double mu, double x, bool scaled) {
  const double d1 = -std::log(0.5 * x);
  const double e = mu * d1;
  const double z = mu * kPi;
  const double fact = std::abs(z) < 1e-10 ? 1.0 / (1.0 - z * z / 6.0)
                                          : z / std::sin(z);
  const double fact2 = std::abs(e) < 1e-10 ? 1.0 + e * e / 6.0
                                           : std::sinh(e) / e;
  double gam1, gam2;
  const double mu2 = mu * mu;
  if (std::abs(mu) < 1e-2) {
    gam1 = -(kA1 + mu2 * (kA3 + mu2 * (kA5 + mu2 * kA7)));
    gam2 = 1.0 + mu2 * (kA2 + mu2 * (kA4 + mu2 * kA6));
  } else {
    const double gampl_direct = 1.0 / std::tgamma(1.0 + mu);
    const double gammi_direct = 1.0 / std::tgamma(1.0 - mu);
    gam1 = (gammi_direct - gampl_direct) / (2.0 * mu);
    gam2 = (gammi_direct + gampl_direct) / 2.0;
  }
  const double gampl = gam2 - mu * gam1;  // 1/Gamma(1+mu)
  const double gammi = gam2 + mu * gam1;  // 1/Gamma(1-mu)

  double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d1);
  double sum = ff;
  const double ee = std::exp(e);
  double p = 0.5 * ee / gampl;
  double q = 0.5 / (ee * gammi);
  double c = 1.0;
  const double dd = 0.25 * x * x;
  double sum1 = p;
  for (int i = 1; i <= 500; ++i) {
    ff = (i * ff + p + q) / (i * i - mu2);
    c *= dd / i;
    p /= (i - mu);
    q /= (i + mu);
    const double del = c * ff;
    sum += del;
    const double del1 = c * (p - i * ff);
    sum1 += del1;
    if (std::abs(del) < std::abs(sum) * 1e-17) break;
  }
  const double scale = scaled ? std::exp(x) : 1.0;
  return {scale * sum, scale * sum1 * (2.0 / x)};
}

// Thompson-Barnett CF2, |mu| <= 1/2, x > 2. Natural scale is exp(x)*K.
KPair cf2(double mu, double x, bool scaled) {
  const double mu2 = mu * mu;
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25 - mu2;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= 10000; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < 1e-17) break;
  }
  h = a1 * h;
  const double pref = std::sqrt(kPi / (2.0 * x)) * (scaled ? 1.0 : std::exp(-x));
  const double kmu = pref / s;
  const double kmu1 = kmu * (mu + x + 0.5 - h) / x;
  return {kmu, kmu1};
}

double bessel_k_impl(double nu, double x, bool scaled) {
  nu = std::abs(nu);
  if (!(x > 0.0) || !std::isfinite(x) || !std::isfinite(nu))
    throw InvalidSpec("bessel_k requires finite nu and x > 0");
  const int n = static_cast<int>(nu + 0.5);
  const double mu = nu - n;  // in [-1/2, 1/2]
  KPair kp = x <= 2.0 ? temme_series(mu, x, scaled) : cf2(mu, x, scaled);
  double rk = kp.kmu, rk1 = kp.kmu1;
  for (int i = 1; i < n; ++i) {
    const double rknew = (2.0 * (mu + i) / x) * rk1 + rk;
    rk = rk1;
    rk1 = rknew;
  }
  return n == 0 ? rk : rk1;
}

}  // namespace

double bessel_k(double nu, double x) { return bessel_k_impl(nu, x, false); }

double bessel_k_scaled(double nu, double x) {
  return bessel_k_impl(nu, x, true);
}

double matern_corr(double t, double nu) {
  if (t < 0.0) throw NegativeDistance("matern_corr: negative argument");
  if (t == 0.0) return 1.0;
  if (nu == 0.5) return std::exp(-t);
  if (nu == 1.5) return (1.0 + t) * std::exp(-t);
  if (nu == 2.5) return (1.0 + t + t * t / 3.0) * std::exp(-t);
  if (!(nu > 0.0)) throw InvalidSpec("matern_corr: nu must be positive");
  // 2^{1-nu}/Gamma(nu) * t^nu * K_nu(t), assembled in log space so large t
  // underflows to zero instead of producing inf * 0
  const double log_pref = (1.0 - nu) * std::log(2.0) - std::lgamma(nu);
  const double body = nu * std::log(t) - t;
  const double scaledk = bessel_k_scaled(nu, t);
  return std::exp(log_pref + body) * scaledk;
}

}  // namespace bora
