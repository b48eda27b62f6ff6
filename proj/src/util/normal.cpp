#include "foreval/util/normal.hpp"

#include <cmath>
#include <string>

#include "foreval/errors.hpp"

namespace foreval {

namespace {

// Upper-tail quantile for tail probability p in (0, 0.5]: returns x with
// P(Z > x) = p. Rational approximation in t = sqrt(-2 ln p).
double upper_tail_quantile(double p) {
  constexpr double c0 = 2.515517;
  constexpr double c1 = 0.802853;
  constexpr double c2 = 0.010328;
  constexpr double d1 = 1.432788;
  constexpr double d2 = 0.189269;
  constexpr double d3 = 0.001308;
  const double t = std::sqrt(-2.0 * std::log(p));
  return t - (c0 + t * (c1 + t * c2)) / (1.0 + t * (d1 + t * (d2 + t * d3)));
}

}  // namespace

double inverse_normal_cdf(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorCode::kSchemaError,
                "quantile level must lie strictly between 0 and 1, got " + std::to_string(q));
  }
  if (q == 0.5) return 0.0;
  if (q < 0.5) return -upper_tail_quantile(q);
  return upper_tail_quantile(1.0 - q);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace foreval
