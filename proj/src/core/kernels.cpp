#include "dmwat/core/kernels.hpp"

#include <algorithm>
#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dmwat::kernels {

namespace {

#ifdef _OPENMP
std::atomic<Backend> g_backend{Backend::openmp};
#else
std::atomic<Backend> g_backend{Backend::serial};
#endif

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelThreshold = 1u << 16;

// Row kernels shared by both backends; the outer row loop is the only thing
// the OpenMP variants parallelize.
inline void row_nn(std::size_t i, std::size_t n, std::size_t k, const double* a,
                   const double* b, double* c, bool accumulate) {
  double* ci = c + i * n;
  if (!accumulate) std::fill(ci, ci + n, 0.0);
  const double* ai = a + i * k;
  for (std::size_t p = 0; p < k; ++p) {
    const double av = ai[p];
    const double* bp = b + p * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
  }
}

inline void row_nt(std::size_t i, std::size_t n, std::size_t k, const double* a,
                   const double* b, double* c, bool accumulate) {
  double* ci = c + i * n;
  const double* ai = a + i * k;
  for (std::size_t j = 0; j < n; ++j) {
    const double* bj = b + j * k;
    double s = 0.0;
    for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
    ci[j] = accumulate ? ci[j] + s : s;
  }
}

inline void row_tn(std::size_t i, std::size_t m, std::size_t n, std::size_t k,
                   const double* a, const double* b, double* c, bool accumulate) {
  double* ci = c + i * n;
  if (!accumulate) std::fill(ci, ci + n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double av = a[p * m + i];
    if (av == 0.0) continue;
    const double* bp = b + p * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
  }
}

}  // namespace

Backend default_backend() { return g_backend.load(); }
void set_default_backend(Backend b) { g_backend.store(b); }

bool openmp_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) row_nn(i, n, k, a.data(), b.data(), c.data(), accumulate);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) row_nt(i, n, k, a.data(), b.data(), c.data(), accumulate);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    row_tn(i, m, n, k, a.data(), b.data(), c.data(), accumulate);
  }
}

}  // namespace serial

namespace omp {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  const long rows = static_cast<long>(m);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < rows; ++i) {
    row_nn(static_cast<std::size_t>(i), n, k, a.data(), b.data(), c.data(), accumulate);
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  const long rows = static_cast<long>(m);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < rows; ++i) {
    row_nt(static_cast<std::size_t>(i), n, k, a.data(), b.data(), c.data(), accumulate);
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  const long rows = static_cast<long>(m);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < rows; ++i) {
    row_tn(static_cast<std::size_t>(i), m, n, k, a.data(), b.data(), c.data(), accumulate);
  }
}

}  // namespace omp

namespace {
bool use_parallel(std::size_t m, std::size_t n, std::size_t k) {
  return g_backend.load() == Backend::openmp && max_threads() > 1 && m > 1 &&
         m * n * k >= kParallelThreshold;
}
}  // namespace

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  if (use_parallel(m, n, k)) {
    omp::gemm_nn(m, n, k, a, b, c, accumulate);
  } else {
    serial::gemm_nn(m, n, k, a, b, c, accumulate);
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  if (use_parallel(m, n, k)) {
    omp::gemm_nt(m, n, k, a, b, c, accumulate);
  } else {
    serial::gemm_nt(m, n, k, a, b, c, accumulate);
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  if (use_parallel(m, n, k)) {
    omp::gemm_tn(m, n, k, a, b, c, accumulate);
  } else {
    serial::gemm_tn(m, n, k, a, b, c, accumulate);
  }
}

}  // namespace dmwat::kernels
