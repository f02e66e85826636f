#include "compactonlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace clab::kern {

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

void band_matvec(const double* band, int dim, int kd, const double* x, double* y,
                 Exec mode) {
  const int w = 2 * kd + 1;
  if (mode == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < dim; ++i) {
      const int jlo = std::max(0, i - kd);
      const int jhi = std::min(dim - 1, i + kd);
      double acc = 0.0;
      for (int j = jlo; j <= jhi; ++j) acc += band[i * w + (j - i + kd)] * x[j];
      y[i] = acc;
    }
  } else {
    for (int i = 0; i < dim; ++i) {
      const int jlo = std::max(0, i - kd);
      const int jhi = std::min(dim - 1, i + kd);
      double acc = 0.0;
      for (int j = jlo; j <= jhi; ++j) acc += band[i * w + (j - i + kd)] * x[j];
      y[i] = acc;
    }
  }
}

void axpy(double a, const double* x, double* y, std::size_t len, Exec mode) {
  if (mode == Exec::parallel) {
    const long long n = (long long)len;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) y[i] += a * x[i];
  } else {
    for (std::size_t i = 0; i < len; ++i) y[i] += a * x[i];
  }
}

namespace {

constexpr std::size_t chunk = 1024;

// Partial sums over fixed chunks, then a serial pass over the partials in
// chunk order. The grouping is independent of the thread count.
template <class Body>
double chunked_reduce(std::size_t len, Exec mode, Body body) {
  const std::size_t nchunks = (len + chunk - 1) / chunk;
  if (nchunks == 0) return 0.0;
  std::vector<double> partial(nchunks, 0.0);
  if (mode == Exec::parallel) {
    const long long nc = (long long)nchunks;
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < nc; ++c) {
      const std::size_t lo = (std::size_t)c * chunk;
      const std::size_t hi = std::min(lo + chunk, len);
      double acc = 0.0;
      for (std::size_t i = lo; i < hi; ++i) acc += body(i);
      partial[c] = acc;
    }
  } else {
    for (std::size_t c = 0; c < nchunks; ++c) {
      const std::size_t lo = c * chunk;
      const std::size_t hi = std::min(lo + chunk, len);
      double acc = 0.0;
      for (std::size_t i = lo; i < hi; ++i) acc += body(i);
      partial[c] = acc;
    }
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

}  // namespace

double sum(const double* x, std::size_t len, Exec mode) {
  return chunked_reduce(len, mode, [x](std::size_t i) { return x[i]; });
}

double dot(const double* x, const double* y, std::size_t len, Exec mode) {
  return chunked_reduce(len, mode, [x, y](std::size_t i) { return x[i] * y[i]; });
}

void map_root_term(const double* f, double* out, std::size_t len, double eps,
                   double alpha, Exec mode) {
  const double e2 = eps * eps;
  auto one = [e2, alpha](double v) {
    const double q = e2 + v * v;
    if (q == 0.0) return 0.0;  // eps = 0 and v = 0: the odd limit
    return std::pow(q, -alpha / 2.0) * v;
  };
  if (mode == Exec::parallel) {
    const long long n = (long long)len;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) out[i] = one(f[i]);
  } else {
    for (std::size_t i = 0; i < len; ++i) out[i] = one(f[i]);
  }
}

double trapezoid(const double* x, std::size_t len, double h, Exec mode) {
  if (len < 2) return 0.0;
  const double interior = sum(x + 1, len - 2, mode);
  return h * (interior + 0.5 * (x[0] + x[len - 1]));
}

}  // namespace clab::kern
