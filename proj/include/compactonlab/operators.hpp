#pragma once

#include <cstdint>
#include <vector>

#include "compactonlab/core.hpp"
#include "compactonlab/kernels.hpp"

// Discrete differential operators and the symbolic weighted-derivative
// recursion used by the interface-oscillation analysis.

namespace clab {

// General banded matrix, half-bandwidth kd, stored row-major:
// entry(i,j) = band[i*(2kd+1) + (j-i+kd)] for |i-j| <= kd.
struct BandedMatrix {
  int dim = 0;
  int kd = 0;
  std::vector<double> band;

  static BandedMatrix zero(int dim, int kd);
  double& at(int i, int j);
  double get(int i, int j) const;
  void matvec(const double* x, double* y, kern::Exec mode = kern::Exec::serial) const;
  std::vector<double> matvec(const std::vector<double>& x,
                             kern::Exec mode = kern::Exec::serial) const;
  void add_diag(const std::vector<double>& d);   // A += diag(d)
  void add_scalar_diag(double a);                // A += a*I
};

// Solve A x = b for a banded A (LAPACK dgbsv, partial pivoting). A is taken
// by value because the factorization overwrites it. Returns false when the
// factorization reports a singular pivot.
bool band_solve(BandedMatrix A, std::vector<double>& b);

// Minimal binomial stencil for d^{2m}/dy^{2m}: coefficients
// (-1)^{m+j} C(2m, m+j) / h^{2m}, j = -m..m; exact on polynomials of degree
// <= 2m+1.
std::vector<double> central_stencil_2m(int m, double h);

// Matrix of (-1)^m d^{2m}/dy^{2m} on the interior nodes of the grid with the
// clamp closure: boundary node values vanish, ghost nodes use the
// parity-mirror reflection F(-R - t) = (-1)^m F(-R + t), the natural
// extension of a function with an m-fold zero at the end. Symmetric, and
// positive definite for the meshes used here (asserted in tests).
BandedMatrix derivative_matrix_2m(int m, const Grid& grid);

// 2m-th derivative of a profile at the interior nodes (closure as above; the
// closure rows are only second-order for functions honoring the clamp).
std::vector<double> apply_2m_derivative(const Profile& p);

// m-th derivative at the interior nodes (central stencils, same ghost
// convention). Used for the quadratic tail of the energy.
std::vector<double> apply_m_derivative(const Profile& p);

// F - (eps^2 + F^2)^{-alpha/2} F, the regularized nonlinear part of the
// stationary equation. Odd in F; at eps = 0, F = 0 the limit value is 0.
double nonlinearity(double F, const ProblemParams& p);

// The regularized root term psi_eps(F) = (eps^2 + F^2)^{-alpha/2} F and its
// derivative (needed by Newton and the flow's lagged mobility):
// psi_eps'(F) = (eps^2+F^2)^{-alpha/2} [1 - alpha F^2/(eps^2+F^2)] > 0.
double root_term(double F, double eps, double alpha);
double root_term_deriv(double F, double eps, double alpha);

// Composite trapezoid over the whole grid.
double integrate(const std::vector<double>& values, double h);

// Richardson extrapolation of an O(h^2) quantity from meshes h and h/2.
double richardson(double coarse, double fine);

// int |D^m F|^2 by quadrature of the discrete m-th derivative. In 1D the
// operator pair Delta^{m/2} (m even) / grad Delta^{(m-1)/2} (m odd) is the
// plain m-th derivative either way.
double tilde_dm_quadratic(const Profile& p);

// Same quantity through the clamp-closed 2m-th derivative matrix:
// h * F^T L F with L = (-1)^m d^{2m}. Summation by parts makes the two agree
// up to discretization error; this version is the one the gradient flow's
// Lyapunov bookkeeping uses so monotonicity is exact for the implicit step.
double dirichlet_quadratic(const Profile& p);

// Weighted derivative operators P_k for the interface variable F = y^g phi(ln y):
// P_0(phi) = phi, P_{k+1}(phi) = (P_k(phi))' + (g - k) P_k(phi). Coefficients
// are kept as integer polynomials in g so the printed k <= 5 forms can be
// checked exactly.
struct PkPolynomial {
  int k = 0;
  // coeff[j] multiplies phi^(j); stored as ascending powers of g.
  std::vector<std::vector<std::int64_t>> coeff;

  double eval_coeff(int j, double g) const;
};

std::vector<PkPolynomial> pk_build(int kmax);

// Falling factorial g(g-1)...(g-(k-1)); the order-0 coefficient of P_k.
std::vector<std::int64_t> falling_factorial_poly(int k);

}  // namespace clab
