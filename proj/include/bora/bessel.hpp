#pragma once

namespace bora {

// Modified Bessel function of the second kind, order nu >= 0 (symmetric in
// nu). Series of Temme for x <= 2, Thompson-Barnett continued fraction
// above, upward recurrence in the order.
double bessel_k(double nu, double x);

// exp(x) * K_nu(x); safe for large x where K itself underflows.
double bessel_k_scaled(double nu, double x);

// Matern correlation with argument t = phi * distance, unit sill.
// Closed forms at nu = 0.5, 1.5, 2.5; the Bessel route otherwise.
double matern_corr(double t, double nu);

}  // namespace bora
