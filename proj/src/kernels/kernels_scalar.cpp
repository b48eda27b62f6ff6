#include <cmath>

#include "foreval/kernels/kernels.hpp"

namespace foreval::kernels::scalar {

MaskedSum masked_sum_abs(const double* y, std::size_t n) {
  MaskedSum out;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(y[i])) continue;
    out.sum += std::abs(y[i]);
    ++out.count;
  }
  return out;
}

MaskedSum masked_sum_abs_diff(const double* a, const double* b, std::size_t n) {
  MaskedSum out;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    out.sum += std::abs(a[i] - b[i]);
    ++out.count;
  }
  return out;
}

MaskedSum masked_sum_pinball(const double* y, const double* f, std::size_t n,
                             double q) {
  MaskedSum out;
  const double over = 2.0 * q;          // y >= f
  const double under = 2.0 * (q - 1.0); // y < f
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(y[i]) || std::isnan(f[i])) continue;
    const double d = y[i] - f[i];
    out.sum += (d >= 0.0) ? over * d : under * d;
    ++out.count;
  }
  return out;
}

void accumulate_rows(double* acc, const double* rows, std::size_t width,
                     const std::uint32_t* idx, std::size_t n_idx) {
  for (std::size_t i = 0; i < n_idx; ++i) {
    const double* row = rows + static_cast<std::size_t>(idx[i]) * width;
    for (std::size_t w = 0; w < width; ++w) {
      acc[w] += row[w];
    }
  }
}

}  // namespace foreval::kernels::scalar
