#include "gpmal/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define GPMAL_HAVE_AVX2_PATH 1
#include <immintrin.h>
#else
#define GPMAL_HAVE_AVX2_PATH 0
#endif

namespace gpmal::simd::detail {

#if GPMAL_HAVE_AVX2_PATH
namespace {

#define GPMAL_AVX2 __attribute__((target("avx2")))

// Four points per step, one per lane. Each lane accumulates over dimensions in
// the same order as element::sq_dist.
GPMAL_AVX2 void sq_dist_ids(const double* points, std::size_t dim, const double* query,
                            const std::uint32_t* ids, std::size_t count, double* out) {
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    const __m256i offsets = _mm256_set_epi64x(static_cast<long long>(ids[k + 3] * dim),
                                              static_cast<long long>(ids[k + 2] * dim),
                                              static_cast<long long>(ids[k + 1] * dim),
                                              static_cast<long long>(ids[k] * dim));
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < dim; ++j) {
      const __m256d p = _mm256_i64gather_pd(points + j, offsets, 8);
      const __m256d diff = _mm256_sub_pd(p, _mm256_set1_pd(query[j]));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    _mm256_storeu_pd(out + k, acc);
  }
  for (; k < count; ++k)
    out[k] = element::sq_dist(points + static_cast<std::size_t>(ids[k]) * dim, query, dim);
}

GPMAL_AVX2 void sq_dist_rows(const double* points, std::size_t dim, const double* query,
                             std::size_t count, double* out) {
  const auto stride = static_cast<long long>(dim);
  const __m256i lanes = _mm256_set_epi64x(3 * stride, 2 * stride, stride, 0);
  std::size_t r = 0;
  for (; r + 4 <= count; r += 4) {
    const double* base = points + r * dim;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < dim; ++j) {
      const __m256d p = _mm256_i64gather_pd(base + j, lanes, 8);
      const __m256d diff = _mm256_sub_pd(p, _mm256_set1_pd(query[j]));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    _mm256_storeu_pd(out + r, acc);
  }
  for (; r < count; ++r) out[r] = element::sq_dist(points + r * dim, query, dim);
}

GPMAL_AVX2 inline __m256d saturate(__m256d v) {
  return _mm256_min_pd(_mm256_max_pd(v, _mm256_set1_pd(-kValueLimit)),
                       _mm256_set1_pd(kValueLimit));
}

GPMAL_AVX2 void add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, saturate(_mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  for (; i < n; ++i) out[i] = element::add(a[i], b[i]);
}

GPMAL_AVX2 void sub(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, saturate(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  for (; i < n; ++i) out[i] = element::sub(a[i], b[i]);
}

GPMAL_AVX2 void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, saturate(_mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  for (; i < n; ++i) out[i] = element::mul(a[i], b[i]);
}

GPMAL_AVX2 void protected_div(const double* a, const double* b, double* out, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d eps = _mm256_set1_pd(kDivisionEpsilon);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(a + i);
    const __m256d y = _mm256_loadu_pd(b + i);
    const __m256d ok = _mm256_cmp_pd(_mm256_andnot_pd(sign_mask, y), eps, _CMP_GT_OQ);
    const __m256d safe = _mm256_blendv_pd(one, y, ok);
    const __m256d q = saturate(_mm256_div_pd(x, safe));
    _mm256_storeu_pd(out + i, _mm256_and_pd(q, ok));
  }
  for (; i < n; ++i) out[i] = element::protected_div(a[i], b[i]);
}

// _mm256_max_pd(a, b) is (a > b ? a : b), matching element::max exactly.
GPMAL_AVX2 void max(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = element::max(a[i], b[i]);
}

GPMAL_AVX2 void min(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_min_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = element::min(a[i], b[i]);
}

// No vector exp in AVX2; lanes go through libm so results match the scalar path.
void sigmoid(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = element::sigmoid(a[i]);
}

GPMAL_AVX2 void relu(const double* a, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(a + i), zero));
  for (; i < n; ++i) out[i] = element::relu(a[i]);
}

GPMAL_AVX2 void select_negative(const double* c, const double* y, const double* z, double* out,
                                std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d neg = _mm256_cmp_pd(_mm256_loadu_pd(c + i), zero, _CMP_LT_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(_mm256_loadu_pd(z + i), _mm256_loadu_pd(y + i), neg));
  }
  for (; i < n; ++i) out[i] = element::select_negative(c[i], y[i], z[i]);
}

#undef GPMAL_AVX2

}  // namespace

const Kernels* avx2_kernels() {
  static const Kernels table{
      Isa::avx2, &sq_dist_ids, &sq_dist_rows, &add, &sub, &mul, &protected_div,
      &max,      &min,         &sigmoid,      &relu, &select_negative,
  };
  return &table;
}

#else

const Kernels* avx2_kernels() { return nullptr; }

#endif

}  // namespace gpmal::simd::detail
