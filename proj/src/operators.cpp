#include "compactonlab/operators.hpp"

#include <lapacke.h>

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace clab {

BandedMatrix BandedMatrix::zero(int dim, int kd) {
  BandedMatrix A;
  A.dim = dim;
  A.kd = kd;
  A.band.assign(std::size_t(dim) * (2 * kd + 1), 0.0);
  return A;
}

double& BandedMatrix::at(int i, int j) {
  assert(i >= 0 && i < dim && j >= 0 && j < dim && std::abs(i - j) <= kd);
  return band[std::size_t(i) * (2 * kd + 1) + (j - i + kd)];
}

double BandedMatrix::get(int i, int j) const {
  if (i < 0 || i >= dim || j < 0 || j >= dim || std::abs(i - j) > kd) return 0.0;
  return band[std::size_t(i) * (2 * kd + 1) + (j - i + kd)];
}

void BandedMatrix::matvec(const double* x, double* y, kern::Exec mode) const {
  kern::band_matvec(band.data(), dim, kd, x, y, mode);
}

std::vector<double> BandedMatrix::matvec(const std::vector<double>& x, kern::Exec mode) const {
  if (int(x.size()) != dim) throw std::invalid_argument("BandedMatrix::matvec: size mismatch");
  std::vector<double> y(dim);
  matvec(x.data(), y.data(), mode);
  return y;
}

void BandedMatrix::add_diag(const std::vector<double>& d) {
  if (int(d.size()) != dim) throw std::invalid_argument("BandedMatrix::add_diag: size mismatch");
  for (int i = 0; i < dim; ++i) band[std::size_t(i) * (2 * kd + 1) + kd] += d[i];
}

void BandedMatrix::add_scalar_diag(double a) {
  for (int i = 0; i < dim; ++i) band[std::size_t(i) * (2 * kd + 1) + kd] += a;
}

bool band_solve(BandedMatrix A, std::vector<double>& b) {
  const int n = A.dim;
  const int kl = A.kd;
  const int ku = A.kd;
  if (int(b.size()) != n) throw std::invalid_argument("band_solve: rhs size mismatch");
  const int ldab = 2 * kl + ku + 1;
  std::vector<double> ab(std::size_t(ldab) * n, 0.0);
  // LAPACK band storage (column-major): AB[kl+ku+i-j, j] = A(i,j)
  for (int i = 0; i < n; ++i) {
    const int jlo = std::max(0, i - kl);
    const int jhi = std::min(n - 1, i + ku);
    for (int j = jlo; j <= jhi; ++j)
      ab[std::size_t(j) * ldab + (kl + ku + i - j)] = A.get(i, j);
  }
  std::vector<lapack_int> ipiv(n);
  lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, n, kl, ku, 1, ab.data(), ldab,
                                  ipiv.data(), b.data(), n);
  return info == 0;
}

namespace {

double binom(int n, int k) {
  double v = 1.0;
  for (int t = 0; t < k; ++t) v = v * double(n - t) / double(t + 1);
  return v;
}

// h^{2m} by repeated squaring-style products so that doubling h scales the
// result exactly in floating point (the spectrum-scaling identity relies on
// this).
double h_pow_2m(double h, int m) {
  const double h2 = h * h;
  double v = 1.0;
  for (int t = 0; t < m; ++t) v *= h2;
  return v;
}

}  // namespace

std::vector<double> central_stencil_2m(int m, double h) {
  if (m < 1) throw std::invalid_argument("central_stencil_2m: m >= 1");
  const double scale = 1.0 / h_pow_2m(h, m);
  std::vector<double> c(2 * m + 1);
  for (int j = -m; j <= m; ++j) {
    double v = binom(2 * m, m + j) * scale;
    c[j + m] = ((m + j) % 2 == 1) ? -v : v;  // (-1)^{m+j} C(2m, m+j) / h^{2m}
  }
  return c;
}

BandedMatrix derivative_matrix_2m(int m, const Grid& grid) {
  const int N = grid.npts;
  if (N < 2 * m + 3) throw std::invalid_argument("derivative_matrix_2m: grid too small");
  const std::vector<double> sten = central_stencil_2m(m, grid.h);
  const double opsign = (m % 2 == 0) ? 1.0 : -1.0;  // (-1)^m
  const double parity = opsign;                      // ghost reflection factor
  BandedMatrix A = BandedMatrix::zero(N - 2, m);
  for (int i = 1; i <= N - 2; ++i) {
    for (int j = -m; j <= m; ++j) {
      int t = i + j;
      double w = opsign * sten[j + m];
      if (t < 0) {
        t = -t;
        w *= parity;
      } else if (t > N - 1) {
        t = 2 * (N - 1) - t;
        w *= parity;
      }
      if (t == 0 || t == N - 1) continue;  // clamped end values
      A.at(i - 1, t - 1) += w;
    }
  }
  return A;
}

namespace {

// Apply a centered stencil to the full profile with parity-mirror ghosts and
// actual (possibly nonzero) end values.
std::vector<double> apply_centered(const Profile& p, const std::vector<double>& sten,
                                   int halfw, bool interior_only) {
  const int N = p.grid.npts;
  const double parity = (p.params.m % 2 == 0) ? 1.0 : -1.0;
  const auto& F = p.values;
  auto fetch = [&](int t) -> double {
    if (t < 0) return parity * F[-t];
    if (t > N - 1) return parity * F[2 * (N - 1) - t];
    return F[t];
  };
  const int lo = interior_only ? 1 : 0;
  const int hi = interior_only ? N - 2 : N - 1;
  std::vector<double> out(hi - lo + 1);
  for (int i = lo; i <= hi; ++i) {
    double acc = 0.0;
    for (int j = -halfw; j <= halfw; ++j) acc += sten[j + halfw] * fetch(i + j);
    out[i - lo] = acc;
  }
  return out;
}

}  // namespace

std::vector<double> apply_2m_derivative(const Profile& p) {
  const int m = p.params.m;
  if (p.grid.npts < 2 * m + 3) throw std::invalid_argument("apply_2m_derivative: grid too small");
  return apply_centered(p, central_stencil_2m(m, p.grid.h), m, /*interior_only=*/true);
}

std::vector<double> apply_m_derivative(const Profile& p) {
  const int m = p.params.m;
  // compose second differences, then one centered first difference if m is odd
  std::vector<double> c{1.0};
  int halfw = 0;
  for (int t = 0; t < m / 2; ++t) {
    std::vector<double> nc(c.size() + 2, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
      nc[j] += c[j];
      nc[j + 1] -= 2.0 * c[j];
      nc[j + 2] += c[j];
    }
    c = std::move(nc);
    ++halfw;
  }
  if (m % 2 == 1) {
    std::vector<double> nc(c.size() + 2, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
      nc[j] -= 0.5 * c[j];
      nc[j + 2] += 0.5 * c[j];
    }
    c = std::move(nc);
    ++halfw;
  }
  const double scale = 1.0 / std::pow(p.grid.h, m);
  for (double& v : c) v *= scale;
  return apply_centered(p, c, halfw, /*interior_only=*/false);
}

double nonlinearity(double F, const ProblemParams& p) {
  const DerivedExponents d = derive_exponents(p.m, p.n);
  return F - root_term(F, p.epsilon, d.alpha);
}

double root_term(double F, double eps, double alpha) {
  const double q = eps * eps + F * F;
  if (q == 0.0) return 0.0;
  return std::pow(q, -alpha / 2.0) * F;
}

double root_term_deriv(double F, double eps, double alpha) {
  const double q = eps * eps + F * F;
  if (q == 0.0) return 0.0;
  return std::pow(q, -alpha / 2.0) * (1.0 - alpha * F * F / q);
}

double integrate(const std::vector<double>& values, double h) {
  return kern::trapezoid(values.data(), values.size(), h, kern::Exec::serial);
}

double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

double tilde_dm_quadratic(const Profile& p) {
  const std::vector<double> d = apply_m_derivative(p);
  std::vector<double> sq(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) sq[i] = d[i] * d[i];
  return integrate(sq, p.grid.h);
}

double dirichlet_quadratic(const Profile& p) {
  const int N = p.grid.npts;
  BandedMatrix L = derivative_matrix_2m(p.params.m, p.grid);
  std::vector<double> x(p.values.begin() + 1, p.values.end() - 1);
  std::vector<double> y(N - 2);
  L.matvec(x.data(), y.data());
  return p.grid.h * kern::dot(x.data(), y.data(), x.size(), kern::Exec::serial);
}

double PkPolynomial::eval_coeff(int j, double g) const {
  if (j < 0 || j > k) return 0.0;
  double acc = 0.0;
  double gp = 1.0;
  for (std::int64_t c : coeff[j]) {
    acc += double(c) * gp;
    gp *= g;
  }
  return acc;
}

std::vector<PkPolynomial> pk_build(int kmax) {
  if (kmax < 0) throw std::invalid_argument("pk_build: kmax >= 0");
  std::vector<PkPolynomial> out;
  out.reserve(kmax + 1);
  PkPolynomial p0;
  p0.k = 0;
  p0.coeff = {{1}};
  out.push_back(p0);
  for (int k = 0; k < kmax; ++k) {
    const PkPolynomial& prev = out.back();
    PkPolynomial nxt;
    nxt.k = k + 1;
    nxt.coeff.assign(k + 2, {});
    for (int j = 0; j <= k + 1; ++j) {
      // coefficient of phi^(j) in P_{k+1} = (coeff of phi^(j-1) in P_k)
      //                                   + (g - k) * (coeff of phi^(j) in P_k)
      std::vector<std::int64_t> poly;
      if (j >= 1 && j - 1 <= k) poly = prev.coeff[j - 1];
      if (j <= k) {
        const auto& q = prev.coeff[j];
        if (poly.size() < q.size() + 1) poly.resize(q.size() + 1, 0);
        for (std::size_t t = 0; t < q.size(); ++t) {
          poly[t + 1] += q[t];              // g * q
          poly[t] -= std::int64_t(k) * q[t];  // -k * q
        }
      }
      while (!poly.empty() && poly.back() == 0) poly.pop_back();
      if (poly.empty()) poly = {0};
      nxt.coeff[j] = std::move(poly);
    }
    out.push_back(std::move(nxt));
  }
  return out;
}

std::vector<std::int64_t> falling_factorial_poly(int k) {
  std::vector<std::int64_t> poly{1};
  for (int t = 0; t < k; ++t) {
    std::vector<std::int64_t> nxt(poly.size() + 1, 0);
    for (std::size_t j = 0; j < poly.size(); ++j) {
      nxt[j + 1] += poly[j];
      nxt[j] -= std::int64_t(t) * poly[j];
    }
    poly = std::move(nxt);
  }
  return poly;
}

}  // namespace clab
