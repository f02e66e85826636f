#pragma once

#include <cstddef>

// Hot inner loops shared by the solvers: banded matvec, pointwise
// nonlinearity maps, axpy, and reductions. Each kernel has a serial
// reference implementation and an OpenMP variant; the two must produce
// byte-identical results (reductions use fixed-size chunked partial sums,
// so the summation order never depends on the thread count).
// bench/bench_kernels.cpp compares the two.

namespace clab::kern {

enum class Exec { serial, parallel };

bool openmp_available();
int max_threads();

// y = A x for a banded matrix stored row-major as band[i*(2kd+1) + (j-i+kd)],
// zero outside the band.
void band_matvec(const double* band, int dim, int kd, const double* x, double* y,
                 Exec mode);

// y += a*x
void axpy(double a, const double* x, double* y, std::size_t len, Exec mode);

// Deterministic sum/dot: identical result for any thread count.
double sum(const double* x, std::size_t len, Exec mode);
double dot(const double* x, const double* y, std::size_t len, Exec mode);

// out_i = (eps^2 + f_i^2)^{-alpha/2} f_i   (the regularized |F|^{-alpha}F)
void map_root_term(const double* f, double* out, std::size_t len, double eps,
                   double alpha, Exec mode);

// Composite trapezoid with uniform spacing h over len samples.
double trapezoid(const double* x, std::size_t len, double h, Exec mode);

}  // namespace clab::kern
