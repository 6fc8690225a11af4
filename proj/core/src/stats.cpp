#include "rdpg/stats.hpp"

#include "rdpg/common.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

namespace rdpg {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double chi2_cdf(double q, int d) {
  if (d < 1) throw DomainError("chi2_cdf: degrees of freedom must be at least 1");
  if (q <= 0.0) return 0.0;
  if (std::isinf(q)) return 1.0;
  return boost::math::gamma_p(0.5 * d, 0.5 * q);
}

double chi2_quantile(double alpha, int d) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("chi2_quantile: alpha must lie in (0, 1)");
  if (d < 1) throw DomainError("chi2_quantile: degrees of freedom must be at least 1");
  const double target = 1.0 - alpha;
  double lo = 0.0;
  double hi = static_cast<double>(d) + 10.0;
  while (chi2_cdf(hi, d) < target) hi *= 2.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, d) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace rdpg
