#include "foreval/kernels/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace foreval::kernels {

namespace {

struct Dispatch {
  MaskedSum (*masked_sum_abs)(const double*, std::size_t);
  MaskedSum (*masked_sum_abs_diff)(const double*, const double*, std::size_t);
  MaskedSum (*masked_sum_pinball)(const double*, const double*, std::size_t,
                                  double);
  void (*accumulate_rows)(double*, const double*, std::size_t,
                          const std::uint32_t*, std::size_t);
};

constexpr Dispatch kScalarDispatch = {
    &scalar::masked_sum_abs,
    &scalar::masked_sum_abs_diff,
    &scalar::masked_sum_pinball,
    &scalar::accumulate_rows,
};

#if defined(FOREVAL_HAVE_AVX2)
constexpr Dispatch kAvx2Dispatch = {
    &avx2::masked_sum_abs,
    &avx2::masked_sum_abs_diff,
    &avx2::masked_sum_pinball,
    &avx2::accumulate_rows,
};
#endif

bool avx2_supported() {
#if defined(FOREVAL_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Backend pick_default() {
  if (const char* env = std::getenv("FOREVAL_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::kScalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return Backend::kAvx2;
    // "auto" or anything unrecognized falls through to CPU detection.
  }
  return avx2_supported() ? Backend::kAvx2 : Backend::kScalar;
}

Backend g_backend = pick_default();

const Dispatch& active() {
#if defined(FOREVAL_HAVE_AVX2)
  if (g_backend == Backend::kAvx2) return kAvx2Dispatch;
#endif
  return kScalarDispatch;
}

}  // namespace

Backend backend() { return g_backend; }

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
  }
  return "?";
}

bool set_backend(Backend b) {
  if (b == Backend::kAvx2 && !avx2_supported()) return false;
  g_backend = b;
  return true;
}

void reset_backend() { g_backend = pick_default(); }

MaskedSum masked_sum_abs(const double* y, std::size_t n) {
  return active().masked_sum_abs(y, n);
}

MaskedSum masked_sum_abs_diff(const double* a, const double* b, std::size_t n) {
  return active().masked_sum_abs_diff(a, b, n);
}

MaskedSum masked_sum_pinball(const double* y, const double* f, std::size_t n,
                             double q) {
  return active().masked_sum_pinball(y, f, n, q);
}

void accumulate_rows(double* acc, const double* rows, std::size_t width,
                     const std::uint32_t* idx, std::size_t n_idx) {
  active().accumulate_rows(acc, rows, width, idx, n_idx);
}

}  // namespace foreval::kernels
