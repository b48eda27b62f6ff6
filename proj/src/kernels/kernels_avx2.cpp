// AVX2 variants of the scoring reductions. Compiled with -mavx2 -mfma; only
// reached through the dispatch table when the CPU reports AVX2 support.

#if defined(FOREVAL_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>

#include "foreval/kernels/kernels.hpp"

namespace foreval::kernels::avx2 {

namespace {

const __m256d kSignMask = _mm256_set1_pd(-0.0);

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline int popcount4(__m256d mask) {
  return __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(mask)));
}

}  // namespace

MaskedSum masked_sum_abs(const double* y, std::size_t n) {
  MaskedSum out;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(y + i);
    __m256d valid = _mm256_cmp_pd(v, v, _CMP_ORD_Q);
    __m256d a = _mm256_andnot_pd(kSignMask, v);
    acc = _mm256_add_pd(acc, _mm256_and_pd(a, valid));
    out.count += popcount4(valid);
  }
  out.sum = hsum(acc);
  for (; i < n; ++i) {
    if (std::isnan(y[i])) continue;
    out.sum += std::abs(y[i]);
    ++out.count;
  }
  return out;
}

MaskedSum masked_sum_abs_diff(const double* a, const double* b, std::size_t n) {
  MaskedSum out;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    __m256d valid = _mm256_and_pd(_mm256_cmp_pd(va, va, _CMP_ORD_Q),
                                  _mm256_cmp_pd(vb, vb, _CMP_ORD_Q));
    __m256d d = _mm256_andnot_pd(kSignMask, _mm256_sub_pd(va, vb));
    acc = _mm256_add_pd(acc, _mm256_and_pd(d, valid));
    out.count += popcount4(valid);
  }
  out.sum = hsum(acc);
  for (; i < n; ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    out.sum += std::abs(a[i] - b[i]);
    ++out.count;
  }
  return out;
}

MaskedSum masked_sum_pinball(const double* y, const double* f, std::size_t n,
                             double q) {
  MaskedSum out;
  const double over = 2.0 * q;
  const double under = 2.0 * (q - 1.0);
  const __m256d vover = _mm256_set1_pd(over);
  const __m256d vunder = _mm256_set1_pd(under);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vf = _mm256_loadu_pd(f + i);
    __m256d valid = _mm256_and_pd(_mm256_cmp_pd(vy, vy, _CMP_ORD_Q),
                                  _mm256_cmp_pd(vf, vf, _CMP_ORD_Q));
    __m256d d = _mm256_sub_pd(vy, vf);
    // rho_q(d) = max(2q*d, 2(q-1)*d): the slopes bracket zero, so the larger
    // product is the active branch for either sign of d.
    __m256d loss = _mm256_max_pd(_mm256_mul_pd(vover, d), _mm256_mul_pd(vunder, d));
    acc = _mm256_add_pd(acc, _mm256_and_pd(loss, valid));
    out.count += popcount4(valid);
  }
  out.sum = hsum(acc);
  for (; i < n; ++i) {
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
    std::size_t w = 0;
    for (; w + 4 <= width; w += 4) {
      __m256d a = _mm256_loadu_pd(acc + w);
      __m256d r = _mm256_loadu_pd(row + w);
      _mm256_storeu_pd(acc + w, _mm256_add_pd(a, r));
    }
    for (; w < width; ++w) {
      acc[w] += row[w];
    }
  }
}

}  // namespace foreval::kernels::avx2

#endif  // FOREVAL_HAVE_AVX2
