#pragma once
#include <cstddef>

// Data-parallel inner-loop kernels. Scalar reference implementations plus
// AVX2 variants; the active set is picked once at startup from CPUID and can
// be forced (for equivalence tests) with set_backend(). axpy avoids FMA so
// the scalar and AVX2 variants agree bitwise; reductions differ only by
// association order.
namespace flatmc::simd {

enum class Backend { Auto, Scalar, Avx2 };

bool avx2_available();
void set_backend(Backend b);
Backend active_backend();

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
double reduce_sum(const double* a, std::size_t n);
double reduce_max(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
double reduce_sum(const double* a, std::size_t n);
double reduce_max(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2

// dispatched entry points
double dot(const double* a, const double* b, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
double reduce_sum(const double* a, std::size_t n);
double reduce_max(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);

}  // namespace flatmc::simd
