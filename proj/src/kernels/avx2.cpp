// Compiled with -mavx2 -mno-fma on x86-64. Only reached through the dispatch
// table after a CPUID check, so nothing here may be inlined into other TUs.

#include "etlinks/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace etlinks::kernels::avx2 {

namespace {

inline double finish(__m256d acc, const double* a, const double* b, std::size_t i, std::size_t n,
                     bool squared_diff) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (std::size_t l = 0; i < n; ++i, ++l) {
    if (squared_diff) {
      const double d = a[i] - b[i];
      lanes[l] += d * d;
    } else {
      lanes[l] += a[i] * b[i];
    }
  }
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  return finish(acc, a, b, i, n, false);
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  return finish(acc, a, b, i, n, true);
}

void rotate_pair(double* a, double* b, std::size_t n, double c, double s) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(a + i);
    const __m256d y = _mm256_loadu_pd(b + i);
    _mm256_storeu_pd(a + i, _mm256_sub_pd(_mm256_mul_pd(vc, x), _mm256_mul_pd(vs, y)));
    _mm256_storeu_pd(b + i, _mm256_add_pd(_mm256_mul_pd(vs, x), _mm256_mul_pd(vc, y)));
  }
  for (; i < n; ++i) {
    const double x = a[i];
    const double y = b[i];
    a[i] = c * x - s * y;
    b[i] = s * x + c * y;
  }
}

}  // namespace etlinks::kernels::avx2

#else

namespace etlinks::kernels::avx2 {
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
double squared_distance(const double* a, const double* b, std::size_t n) {
  return scalar::squared_distance(a, b, n);
}
void rotate_pair(double* a, double* b, std::size_t n, double c, double s) {
  scalar::rotate_pair(a, b, n, c, s);
}
}  // namespace etlinks::kernels::avx2

#endif
