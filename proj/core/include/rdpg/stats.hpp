#pragma once

namespace rdpg {

/// Standard normal quantile, z with Phi(z) = p, for 0 < p < 1.
double normal_quantile(double p);

double normal_cdf(double z);

/// P(chi^2_d <= q) through the regularized lower incomplete gamma function.
double chi2_cdf(double q, int d);

/// The (1 - alpha) quantile of chi^2_d by bisection on chi2_cdf, absolute
/// error at most 1e-8. Requires 0 < alpha < 1 and d >= 1.
double chi2_quantile(double alpha, int d);

}  // namespace rdpg
