#ifndef FOREVAL_KERNELS_KERNELS_HPP
#define FOREVAL_KERNELS_KERNELS_HPP

#include <cstddef>
#include <cstdint>

// Batch scoring reduces to a handful of dense reductions over double arrays.
// Each reduction has a scalar reference implementation and, on x86-64, an
// AVX2 variant. The active variant is picked once at startup from CPUID and
// can be overridden with set_backend() or the FOREVAL_KERNELS environment
// variable (values: auto, scalar, avx2).
//
// Missing observations travel as NaN. The masked_* reductions skip any
// element pair containing a NaN and report how many elements contributed,
// so callers can renormalize their divisors.

namespace foreval::kernels {

enum class Backend { kScalar, kAvx2 };

// Active backend for all kernel entry points below.
Backend backend();
const char* backend_name(Backend b);

// Force a backend. Returns false (and leaves the dispatch unchanged) if the
// requested backend is not available on this CPU.
bool set_backend(Backend b);

// Reset to the best backend supported by the CPU, honoring FOREVAL_KERNELS.
void reset_backend();

struct MaskedSum {
  double sum = 0.0;
  std::int64_t count = 0;  // elements that contributed
};

// sum of |y[i]| over elements where y[i] is not NaN.
MaskedSum masked_sum_abs(const double* y, std::size_t n);

// sum of |a[i] - b[i]| over elements where neither a[i] nor b[i] is NaN.
MaskedSum masked_sum_abs_diff(const double* a, const double* b, std::size_t n);

// sum of the quantile loss
//   rho_q(y, f) = 2q(y - f)       if y >= f
//                 2(1-q)(f - y)   if y <  f
// over elements where neither y[i] nor f[i] is NaN.
MaskedSum masked_sum_pinball(const double* y, const double* f, std::size_t n,
                             double q);

// acc[w] += sum over i of rows[idx[i] * width + w], for w in [0, width).
// Row-by-row accumulation order is part of the contract: both backends add
// the selected rows in idx order, so results are bit-identical across
// backends.
void accumulate_rows(double* acc, const double* rows, std::size_t width,
                     const std::uint32_t* idx, std::size_t n_idx);

// Reference implementations, always available. The dispatched entry points
// above are equivalence-tested against these.
namespace scalar {
MaskedSum masked_sum_abs(const double* y, std::size_t n);
MaskedSum masked_sum_abs_diff(const double* a, const double* b, std::size_t n);
MaskedSum masked_sum_pinball(const double* y, const double* f, std::size_t n,
                             double q);
void accumulate_rows(double* acc, const double* rows, std::size_t width,
                     const std::uint32_t* idx, std::size_t n_idx);
}  // namespace scalar

#if defined(FOREVAL_HAVE_AVX2)
namespace avx2 {
MaskedSum masked_sum_abs(const double* y, std::size_t n);
MaskedSum masked_sum_abs_diff(const double* a, const double* b, std::size_t n);
MaskedSum masked_sum_pinball(const double* y, const double* f, std::size_t n,
                             double q);
void accumulate_rows(double* acc, const double* rows, std::size_t width,
                     const std::uint32_t* idx, std::size_t n_idx);
}  // namespace avx2
#endif

}  // namespace foreval::kernels

#endif  // FOREVAL_KERNELS_KERNELS_HPP
