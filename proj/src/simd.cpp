#include "flatmc/simd.hpp"

#include <limits>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define FLATMC_X86 1
#else
#define FLATMC_X86 0
#endif

namespace flatmc::simd {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sq_dist(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double reduce_sum(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

double reduce_max(const double* a, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (a[i] > m) m = a[i];
  return m;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

}  // namespace scalar

#if FLATMC_X86

namespace avx2 {

__attribute__((target("avx2"))) static double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

__attribute__((target("avx2"))) double dot(const double* a, const double* b,
                                           std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

__attribute__((target("avx2"))) double sq_dist(const double* a, const double* b,
                                               std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

__attribute__((target("avx2"))) double reduce_sum(const double* a,
                                                  std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

__attribute__((target("avx2"))) double reduce_max(const double* a,
                                                  std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vm = _mm256_loadu_pd(a);
    i = 4;
    for (; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_loadu_pd(a + i));
    __m128d lo = _mm256_castpd256_pd128(vm);
    __m128d hi = _mm256_extractf128_pd(vm, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    m = _mm_cvtsd_f64(_mm_max_sd(lo, sh));
  }
  for (; i < n; ++i)
    if (a[i] > m) m = a[i];
  return m;
}

__attribute__((target("avx2"))) void axpy(double alpha, const double* x,
                                          double* y, std::size_t n) {
  __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vx = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

}  // namespace avx2

bool avx2_available() { return __builtin_cpu_supports("avx2"); }

#else

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) {
  return scalar::dot(a, b, n);
}
double sq_dist(const double* a, const double* b, std::size_t n) {
  return scalar::sq_dist(a, b, n);
}
double reduce_sum(const double* a, std::size_t n) {
  return scalar::reduce_sum(a, n);
}
double reduce_max(const double* a, std::size_t n) {
  return scalar::reduce_max(a, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  scalar::axpy(alpha, x, y, n);
}
}  // namespace avx2

bool avx2_available() { return false; }

#endif

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sq_dist)(const double*, const double*, std::size_t);
  double (*reduce_sum)(const double*, std::size_t);
  double (*reduce_max)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
};

constexpr Table kScalar{scalar::dot, scalar::sq_dist, scalar::reduce_sum,
                        scalar::reduce_max, scalar::axpy};
constexpr Table kAvx2{avx2::dot, avx2::sq_dist, avx2::reduce_sum,
                      avx2::reduce_max, avx2::axpy};

Backend g_backend = Backend::Auto;

const Table& table() {
  switch (g_backend) {
    case Backend::Scalar:
      return kScalar;
    case Backend::Avx2:
      return kAvx2;
    case Backend::Auto:
    default:
      return avx2_available() ? kAvx2 : kScalar;
  }
}

}  // namespace

void set_backend(Backend b) { g_backend = b; }

Backend active_backend() {
  if (g_backend != Backend::Auto) return g_backend;
  return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

double dot(const double* a, const double* b, std::size_t n) {
  return table().dot(a, b, n);
}
double sq_dist(const double* a, const double* b, std::size_t n) {
  return table().sq_dist(a, b, n);
}
double reduce_sum(const double* a, std::size_t n) {
  return table().reduce_sum(a, n);
}
double reduce_max(const double* a, std::size_t n) {
  return table().reduce_max(a, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  table().axpy(alpha, x, y, n);
}

}  // namespace flatmc::simd
