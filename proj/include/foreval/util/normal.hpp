#ifndef FOREVAL_UTIL_NORMAL_HPP
#define FOREVAL_UTIL_NORMAL_HPP

namespace foreval {

// Inverse standard normal CDF via the classic rational approximation in t =
// sqrt(-2 ln p) (absolute error below 4.5e-4, ample for prediction bands).
// q = 0.5 returns exactly 0 so a median quantile equals the point forecast.
// Requires 0 < q < 1.
double inverse_normal_cdf(double q);

// Standard normal CDF (via std::erfc), used only in tests as a cross-check.
double normal_cdf(double x);

}  // namespace foreval

#endif  // FOREVAL_UTIL_NORMAL_HPP
