#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "compactonlab/bvp.hpp"
#include "compactonlab/core.hpp"
#include "compactonlab/operators.hpp"
#include "compactonlab/tails.hpp"

using namespace clab;
using namespace clab::tails;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The m = 2, n = 1 tail orbit is reused by several cases; compute it once.
const OrbitRecord& orbit_m2_n1() {
  static const OrbitRecord rec = periodic_even(2, 1.0);
  return rec;
}

// Minimal fixed-step RK4 for the m = 2 stationary system F'''' = F - psi(F),
// used as an integrator independent of the library's adaptive one.
struct Rk4Stationary {
  double eps = 1e-9;
  double alpha = 0.5;
  void rhs(const double* y, double* d) const {
    d[0] = y[1];
    d[1] = y[2];
    d[2] = y[3];
    d[3] = y[0] - root_term(y[0], eps, alpha);
  }
  void step(double* y, double h) const {
    double k1[4], k2[4], k3[4], k4[4], t[4];
    rhs(y, k1);
    for (int i = 0; i < 4; ++i) t[i] = y[i] + 0.5 * h * k1[i];
    rhs(t, k2);
    for (int i = 0; i < 4; ++i) t[i] = y[i] + 0.5 * h * k2[i];
    rhs(t, k3);
    for (int i = 0; i < 4; ++i) t[i] = y[i] + h * k3[i];
    rhs(t, k4);
    for (int i = 0; i < 4; ++i)
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
};

ProblemParams stationary_params(int m, double n) {
  ProblemParams p;
  p.m = m;
  p.n = n;
  p.epsilon = 1e-9;
  p.R = 10.0;
  p.npts = 101;
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// equilibria
// ---------------------------------------------------------------------------

TEST_CASE("equilibria_odd: closed forms for small cases") {
  // m=1, n=1: gamma = 4, two falling factors 4*3 = 12, alpha = 1/2.
  CHECK(equilibria_odd(1, 1.0).phi0 == doctest::Approx(1.0 / 144.0).epsilon(1e-14));
  // m=3, n=1: gamma = 12, product 12*11*10*9*8*7 = 665280.
  CHECK(equilibria_odd(3, 1.0).phi0 ==
        doctest::Approx(1.0 / (665280.0 * 665280.0)).epsilon(1e-13));
  // n = infinity: gamma = 2m exactly, alpha = 1, phi0 = 1/(2m)!.
  CHECK(equilibria_odd(1, kInf).phi0 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(equilibria_odd(3, kInf).phi0 ==
        doctest::Approx(1.0 / 720.0).epsilon(1e-15));
}

TEST_CASE("equilibria_odd: even m has no constant tail states") {
  CHECK_THROWS_AS(equilibria_odd(2, 1.0), wrong_parity);
  CHECK_THROWS_AS(equilibria_odd(4, 0.5), wrong_parity);
}

TEST_CASE("equilibria_odd: the value really is a rest point of the tail ODE") {
  for (auto [m, n] : {std::pair{1, 1.0}, {3, 15.0}, {3, 1.0}}) {
    const double phi0 = equilibria_odd(m, n).phi0;
    std::vector<double> state(2 * m, 0.0);
    state[0] = phi0;
    const std::vector<double> dy = rhs_autonomous(state, m, n, 0.0);
    // Every component of the vector field vanishes at (+phi0, 0, ..., 0);
    // the top component is a cancellation of O(1)-sized terms, so allow
    // roundoff relative to the coefficient scale.
    double c0 = 1.0;
    const double g = 2.0 * m * (n + 1.0) / n;
    for (int k = 0; k < 2 * m; ++k) c0 *= g - k;
    for (double d : dy) CHECK(std::fabs(d) <= 1e-12 * c0 * phi0 + 1e-300);
    // the mirror state -phi0 as well (odd vector field)
    state[0] = -phi0;
    for (double d : rhs_autonomous(state, m, n, 0.0))
      CHECK(std::fabs(d) <= 1e-12 * c0 * phi0 + 1e-300);
  }
}

// ---------------------------------------------------------------------------
// rhs_autonomous
// ---------------------------------------------------------------------------

TEST_CASE("rhs_autonomous: odd symmetry rhs(-x) = -rhs(x)") {
  std::mt19937 gen(20240817u);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int m : {1, 2, 3}) {
    std::vector<double> x(2 * m), xm(2 * m);
    for (int trial = 0; trial < 5; ++trial) {
      for (int j = 0; j < 2 * m; ++j) {
        x[j] = unif(gen);
        xm[j] = -x[j];
      }
      const auto f = rhs_autonomous(x, m, 1.5, 1e-8);
      const auto fm = rhs_autonomous(xm, m, 1.5, 1e-8);
      for (int j = 0; j < 2 * m; ++j)
        CHECK(fm[j] == doctest::Approx(-f[j]).epsilon(1e-13));
    }
  }
}

TEST_CASE("rhs_autonomous: coefficients come from the operator ladder") {
  // Probing with unit basis states isolates each linear coefficient; they
  // must equal the ladder polynomial values at gamma bit for bit.
  const int m = 2;
  const double n = 1.5;
  const double g = 2.0 * m * (n + 1.0) / n;
  const auto pk = pk_build(2 * m);
  for (int j = 1; j < 2 * m; ++j) {
    std::vector<double> e(2 * m, 0.0);
    e[j] = 1.0;
    const auto f = rhs_autonomous(e, m, n, 0.0);
    // with phi = 0 the root term vanishes, so the top slot is exactly -c_j
    CHECK(f[2 * m - 1] == doctest::Approx(-pk[2 * m].eval_coeff(j, g)).epsilon(1e-14));
  }
  // j = 0 slot carries the root term too: at phi = 1 it contributes
  // sign * 1^{1-alpha} = -1 for m = 2.
  std::vector<double> e0(2 * m, 0.0);
  e0[0] = 1.0;
  const auto f0 = rhs_autonomous(e0, m, n, 0.0);
  CHECK(f0[2 * m - 1] ==
        doctest::Approx(-1.0 - pk[2 * m].eval_coeff(0, g)).epsilon(1e-13));
}

TEST_CASE("rhs_autonomous: no constant states for m = 2 with n in (0, 1]") {
  // For even m the root term and the falling-factorial term have the same
  // sign for every constant state, so the top component never vanishes:
  // its sign is opposite to the state's.
  for (double n : {0.3, 1.0}) {
    for (double c : {-3.0, -1.0, -0.3, 0.3, 1.0, 3.0}) {
      std::vector<double> state(4, 0.0);
      state[0] = c;
      const auto f = rhs_autonomous(state, 2, n, 0.0);
      CHECK(f[3] * c < 0.0);
    }
  }
}

TEST_CASE("rhs_autonomous: state size is checked") {
  CHECK_THROWS_AS(rhs_autonomous({1.0, 0.0}, 2, 1.0, 0.0),
                  std::invalid_argument);
}

// ---------------------------------------------------------------------------
// scale_small_n
// ---------------------------------------------------------------------------

TEST_CASE("scale_small_n: binomial limit descriptors") {
  const ScaledEquation e2 = scale_small_n(2, 0.2);
  CHECK(e2.coefficients == std::vector<double>{1, 4, 6, 4, 1});
  CHECK(e2.argument_factor == doctest::Approx(20.0).epsilon(1e-15));
  // two arithmetic routes to the amplitude factor
  CHECK(std::pow(e2.amplitude_factor, 0.2) ==
        doctest::Approx(std::pow(0.05, 4.0)).epsilon(1e-13));

  const ScaledEquation e3 = scale_small_n(3, 0.5);
  CHECK(e3.coefficients == std::vector<double>{1, 6, 15, 20, 15, 6, 1});
  CHECK(e3.argument_factor == doctest::Approx(12.0).epsilon(1e-15));

  // n = 2m makes the amplitude factor exactly 1
  CHECK(scale_small_n(2, 4.0).amplitude_factor == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(scale_small_n(1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(scale_small_n(4, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(scale_small_n(2, kInf), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// periodic_even: stable orbits for even m
// ---------------------------------------------------------------------------

TEST_CASE("periodic_even: m = 2, n = 1 reference orbit") {
  const OrbitRecord& rec = orbit_m2_n1();
  CHECK(rec.m == 2);
  CHECK(rec.n == 1.0);
  CHECK(!rec.scaled);
  CHECK(rec.stability == Stability::stable);
  CHECK(rec.method == "forward-attractor");
  CHECK(rec.equation == "tail");
  CHECK(rec.amplitude > 0.0);
  CHECK(rec.period > 0.0);
  // reference values from this computation, reproducible to far better than
  // the quoted slack
  CHECK(rec.amplitude == doctest::Approx(2.5951424e-8).epsilon(1e-4));
  CHECK(rec.period == doctest::Approx(0.9825058).epsilon(1e-4));
  // the return map settled: successive section states nearly coincide
  CHECK(std::isfinite(rec.return_distance));
  CHECK(rec.return_distance < 1e-8);
  // section convention: phi = 0 crossed upward
  REQUIRE(rec.cauchy_data.size() == 4);
  CHECK(std::fabs(rec.cauchy_data[0]) <= 1e-6 * rec.amplitude);
  CHECK(rec.cauchy_data[1] > 0.0);
}

TEST_CASE("periodic_even: amplitude is integrator-tolerance robust") {
  const OrbitRecord a = periodic_even(2, 1.0, 400.0, 1e-8, false, 1e-9);
  const OrbitRecord b = periodic_even(2, 1.0, 400.0, 1e-8, false, 1e-10);
  CHECK(std::fabs(a.amplitude - b.amplitude) <= 1e-6 * b.amplitude);
}

TEST_CASE("periodic_even: orbit family grows with n up to the sign limit") {
  const OrbitRecord r2 = periodic_even(2, 2.0);
  const OrbitRecord r4 = periodic_even(2, 4.0);
  const OrbitRecord ri = periodic_even(2, kInf);
  CHECK(r2.amplitude == doctest::Approx(2.0866e-5).epsilon(1e-3));
  CHECK(r2.period == doctest::Approx(1.4452481).epsilon(1e-3));
  CHECK(r4.amplitude == doctest::Approx(4.8976e-4).epsilon(1e-3));
  CHECK(r4.period == doctest::Approx(1.9028338).epsilon(1e-3));
  CHECK(ri.amplitude == doctest::Approx(1.0330019e-2).epsilon(1e-3));
  CHECK(ri.period == doctest::Approx(2.8366323).epsilon(1e-3));
  // amplitude and period both increase monotonically along n
  const OrbitRecord& r1 = orbit_m2_n1();
  CHECK(r1.amplitude < r2.amplitude);
  CHECK(r2.amplitude < r4.amplitude);
  CHECK(r4.amplitude < ri.amplitude);
  CHECK(r1.period < r2.period);
  CHECK(r2.period < r4.period);
  CHECK(r4.period < ri.period);
}

TEST_CASE("periodic_even: parity and argument contracts") {
  CHECK_THROWS_AS(periodic_even(3, 1.0), wrong_parity);
  CHECK_THROWS_AS(periodic_even(2, kInf, 400.0, 1e-8, /*scaled=*/true),
                  std::invalid_argument);
  CHECK_THROWS_AS(periodic_even(2, -1.0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// small-n limit: the binomial system and the exact change of variables
// ---------------------------------------------------------------------------

TEST_CASE("small-n limit: binomial-system orbit for m = 2") {
  const OrbitRecord rec = periodic_even(2, 0.2, 4000.0, 1e-8, /*scaled=*/true);
  CHECK(rec.scaled);
  // reference amplitude of the limit system, in its own units
  CHECK(rec.amplitude == doctest::Approx(2.985303e-4).epsilon(1e-3));
  // at this tiny amplitude the orbit hugs the linear center of the limit
  // operator, whose frequency is 1: period ~ 2 pi
  CHECK(std::fabs(rec.period - 2.0 * pi) < 0.02 * 2.0 * pi);
}

TEST_CASE("small-n limit: exact change of variables reproduces the direct orbit") {
  // phi(s) = A Phi(eta), eta = rho s with rho = 2m/n turns the tail system
  // at gamma into the constant-coefficient system with coefficients
  // c~_j = c_j(gamma) rho^{j-2m} and A = rho^{-2m/alpha}. Integrating that
  // transformed system is an independent route to the same orbit; mapping
  // its amplitude back must agree with the directly integrated one. (The
  // transformed coefficients approach the binomial row only as n -> 0; at
  // n = 0.2 they are still far from it, which is why the limit-form
  // amplitude only matches in logarithmic scale, checked below.)
  const int m = 2;
  const double n = 0.2;
  const double alpha = n / (n + 1.0);
  const double g = 2.0 * m * (n + 1.0) / n;
  const double rho = 2.0 * m / n;
  const auto pk = pk_build(2 * m);
  std::vector<double> ct(2 * m);
  for (int j = 0; j < 2 * m; ++j)
    ct[j] = pk[2 * m].eval_coeff(j, g) * std::pow(rho, j - 2 * m);
  // detect_tol 1e-10: the transformed orbit's amplitude is ~2e-5, so a
  // tighter gate would sit at the integrator's roundoff floor
  const OrbitRecord transformed =
      periodic_attractor(ct, alpha, /*rhs_sign=*/-1.0, 4000.0, 1e-10, 1e-10);
  const double a_scale = std::pow(rho, -2.0 * m / alpha);

  const OrbitRecord direct =
      periodic_even(m, n, 400.0, 1e-11, /*scaled=*/false, 1e-10);

  const double predicted = a_scale * transformed.amplitude;
  CHECK(std::fabs(direct.amplitude - predicted) <= 5e-4 * predicted);
  CHECK(std::fabs(direct.period - transformed.period / rho) <=
        1e-3 * direct.period);

  // The leading-order limit form: amplitude agreement holds on log scale
  // (the dropped algebraic factors are amplified through the 1/alpha power,
  // so the linear-scale ratio is far from 1 at n = 0.2).
  const ScaledEquation eq = scale_small_n(m, n);
  const OrbitRecord limit_orbit =
      periodic_even(m, n, 4000.0, 1e-8, /*scaled=*/true);
  const double log_direct = std::log(direct.amplitude);
  const double log_limit = std::log(eq.amplitude_factor * limit_orbit.amplitude);
  CHECK(std::fabs(log_direct - log_limit) <= 0.20 * std::fabs(log_direct));
}

// ---------------------------------------------------------------------------
// periodic_odd_shoot: unstable orbits for odd m
// ---------------------------------------------------------------------------

TEST_CASE("periodic_odd_shoot: m = 3, n = 15 critical curvature") {
  const OrbitRecord rec = periodic_odd_shoot(3, 15.0);
  CHECK(rec.stability == Stability::unstable);
  CHECK(rec.method == "shooting");
  CHECK(std::isnan(rec.return_distance));
  REQUIRE(rec.cauchy_data.size() == 6);
  // shooting ansatz: phi(0) small, only phi''(0) tuned, orders 1, 3, 4, 5 zero
  CHECK(rec.cauchy_data[0] == 1e-4);
  CHECK(rec.cauchy_data[1] == 0.0);
  CHECK(rec.cauchy_data[3] == 0.0);
  CHECK(rec.cauchy_data[4] == 0.0);
  CHECK(rec.cauchy_data[5] == 0.0);
  const double b = rec.cauchy_data[2];
  // reproducible to the shooting tolerance; the first nine digits also agree
  // with an independently published computation of this orbit
  CHECK(std::fabs(b - (-5.068083984777e-4)) <= 1e-9);
  CHECK(rec.amplitude == doctest::Approx(3.206e-6).epsilon(5e-2));
  CHECK(rec.period == doctest::Approx(0.9936).epsilon(2e-2));
}

TEST_CASE("periodic_odd_shoot: scaled m = 3 system and start-height dependence") {
  const OrbitRecord r4 =
      periodic_odd_shoot(3, 0.5, 1e-9, /*scaled=*/true, 1e-10, 1e-4);
  CHECK(r4.scaled);
  CHECK(std::fabs(r4.cauchy_data[2] - (-9.456771328114e-5)) <= 1e-9);

  // The tuned curvature is not proportional to the start height: lifting
  // phi(0) tenfold moves it by a factor ~7.25, not 10 (the orbit is not a
  // linear object). This pins the role of the start height in the record.
  const OrbitRecord r3 =
      periodic_odd_shoot(3, 0.5, 1e-9, /*scaled=*/true, 1e-10, 1e-3);
  CHECK(std::fabs(r3.cauchy_data[2] - (-6.859692970756e-4)) <= 1e-8);
  const double ratio = r3.cauchy_data[2] / r4.cauchy_data[2];
  CHECK(ratio > 7.0);
  CHECK(ratio < 7.5);
}

TEST_CASE("periodic_odd_shoot: m = 1 admits no closed orbits at all") {
  // The order-2 phase plane has divergence -c1 < 0 everywhere, which rules
  // out periodic solutions; this is why m = 1 tails are monotone.
  CHECK_THROWS_AS(periodic_odd_shoot(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(periodic_odd_shoot(2, 1.0), wrong_parity);
}

// ---------------------------------------------------------------------------
// stability dichotomy via the return map
// ---------------------------------------------------------------------------

TEST_CASE("perturbation of the even-m orbit decays under the return map") {
  const auto dist = perturbation_returns(orbit_m2_n1(), 1e-3, 5);
  REQUIRE(dist.size() == 5);
  CHECK(dist.front() > 0.0);
  CHECK(dist.back() < 0.25 * dist.front());
}

TEST_CASE("perturbation of the odd-m orbit grows under the return map") {
  const OrbitRecord rec = periodic_odd_shoot(3, 15.0);
  const auto dist = perturbation_returns(rec, 1e-3, 5);
  // the perturbed trajectory escapes quickly; whatever returns are
  // comparable must show growth
  REQUIRE(dist.size() >= 2);
  CHECK(dist.back() > 5.0 * dist.front());
}

TEST_CASE("perturbation_returns: argument contracts") {
  CHECK_THROWS_AS(perturbation_returns(orbit_m2_n1(), 1e-3, 0),
                  std::invalid_argument);
  OrbitRecord empty;
  CHECK_THROWS_AS(perturbation_returns(empty, 1e-3, 3), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// the full stationary equation: periodic orbits in y
// ---------------------------------------------------------------------------

TEST_CASE("full stationary orbit: shot through F(0) = 1.5") {
  const OrbitRecord rec =
      full_periodic_orbit_stationary(stationary_params(2, 1.0));
  CHECK(rec.equation == "stationary");
  CHECK(rec.stability == Stability::unstable);
  REQUIRE(rec.cauchy_data.size() == 4);
  // even ansatz preserved exactly
  CHECK(rec.cauchy_data[0] == 1.5);
  CHECK(rec.cauchy_data[1] == 0.0);
  CHECK(rec.cauchy_data[3] == 0.0);
  // the critical curvature, reproducible to the bisection tolerance
  CHECK(std::fabs(rec.cauchy_data[2] - (-0.3787329255)) <= 1e-6);
  // the orbit max is the shooting height itself; period from the maxima gaps
  CHECK(rec.amplitude == doctest::Approx(1.5).epsilon(1e-4));
  CHECK(rec.period == doctest::Approx(7.5797).epsilon(1e-3));

  // Independent verification with a fixed-step RK4: energy conservation and
  // the orbit maximum. E is the first integral of F'''' = F - psi(F).
  const double E0 = stationary_energy(rec.cauchy_data, 1.0);
  CHECK(E0 == doctest::Approx(0.028026).epsilon(1e-2));
  Rk4Stationary rk;
  double y[4] = {rec.cauchy_data[0], rec.cauchy_data[1], rec.cauchy_data[2],
                 rec.cauchy_data[3]};
  double fmax = 0.0, fmin = 10.0, edrift = 0.0;
  const double h = 1e-3;
  for (int i = 0; i < 8000; ++i) {  // just over one period
    rk.step(y, h);
    fmax = std::max(fmax, y[0]);
    fmin = std::min(fmin, y[0]);
    const double E = stationary_energy({y[0], y[1], y[2], y[3]}, 1.0);
    edrift = std::max(edrift, std::fabs(E - E0));
  }
  CHECK(edrift <= 1e-9);
  CHECK(fmax == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(fmin == doctest::Approx(0.42097).epsilon(1e-3));
}

TEST_CASE("full stationary orbit: energy changes sign across the family") {
  // The shot orbits form a one-parameter family over the shooting height;
  // their first integral E decreases through zero between 1.5 and 1.55.
  // Compact patterns live on E = 0 (E vanishes beyond the support), so the
  // zero-energy member is the one long interior oscillations settle onto --
  // checked against a computed pattern in the interior-maxima case below.
  const OrbitRecord lo =
      full_periodic_orbit_stationary(stationary_params(2, 1.0), 1.5);
  const OrbitRecord hi =
      full_periodic_orbit_stationary(stationary_params(2, 1.0), 1.55);
  CHECK(stationary_energy(lo.cauchy_data, 1.0) > 0.0);
  CHECK(stationary_energy(hi.cauchy_data, 1.0) < 0.0);
}

TEST_CASE("full stationary orbit: m = 1 rejected") {
  CHECK_THROWS_AS(full_periodic_orbit_stationary(stationary_params(1, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("stationary_energy: contracts and F''' independence at turning points") {
  CHECK_THROWS_AS(stationary_energy({1.0, 0.0}, 1.0), std::invalid_argument);
  // E couples F''' only through F'; at a turning point (F' = 0) it cannot
  // depend on F'''
  const double a = stationary_energy({1.3, 0.0, -0.4, 0.7}, 1.0);
  const double b = stationary_energy({1.3, 0.0, -0.4, 0.0}, 1.0);
  CHECK(a == b);
}

// ---------------------------------------------------------------------------
// interior oscillations of computed patterns vs the stationary orbits
// ---------------------------------------------------------------------------

TEST_CASE("pattern interior maxima sit on the stationary periodic structure") {
  const MultiIndex four = MultiIndex::parse("+4");
  const MultiIndex six = MultiIndex::parse("+6");
  const ProblemParams params = bvp::default_params({six}, 2, 1.0);

  bvp::NewtonOptions opt;
  opt.symmetry = bvp::Symmetry::even;
  const bvp::SolveReport rep4 = bvp::solve_classified(four, params, opt);
  const bvp::SolveReport rep6 = bvp::solve_classified(six, params, opt);
  REQUIRE(rep4.converged);
  REQUIRE(rep6.converged);
  REQUIRE(rep4.classified.str() == "+4");
  REQUIRE(rep6.classified.str() == "+6");

  const auto max4 = interior_maxima(rep4.profile);
  const auto max6 = interior_maxima(rep6.profile);
  REQUIRE(max4.size() == 2);
  REQUIRE(max6.size() == 3);

  // Humps adjacent to the support edges repeat a height near 1.5356 across
  // patterns; they lie within 0.01 of the 1.535 height of the periodic
  // structure these oscillations follow.
  for (double v : {max4[0], max4[1], max6[0], max6[2]}) {
    CHECK(v == doctest::Approx(1.53564).epsilon(5e-4));
    CHECK(std::fabs(v - 1.535) <= 0.01);
  }

  // The middle hump of the three-hump pattern is a step deeper into the
  // interior; it lands on the zero-energy member of the stationary-orbit
  // family, inside the energy sign-change bracket established above.
  CHECK(max6[1] == doctest::Approx(1.5455).epsilon(1e-3));
  CHECK(max6[1] > 1.5);
  CHECK(max6[1] < 1.55);

  // Directly confirm the pattern realizes E = 0 at that hump: recover the
  // derivatives by finite differences at the discrete argmax.
  const auto& F = rep6.profile.values;
  const double hgrid = rep6.profile.grid.h;
  std::size_t imax = 0;
  for (std::size_t i = 2; i + 2 < F.size(); ++i)
    if (F[i] > F[imax]) imax = i;
  const double d1 = (F[imax + 1] - F[imax - 1]) / (2.0 * hgrid);
  const double d2 = (F[imax + 1] - 2.0 * F[imax] + F[imax - 1]) / (hgrid * hgrid);
  const double d3 = (F[imax + 2] - 2.0 * F[imax + 1] + 2.0 * F[imax - 1] -
                     F[imax - 2]) /
                    (2.0 * hgrid * hgrid * hgrid);
  const double E = stationary_energy({F[imax], d1, d2, d3}, 1.0);
  CHECK(std::fabs(E) <= 2e-3);
}

TEST_CASE("interior_maxima: explicit one-bump pattern has a single refined peak") {
  const double w = bvp::bump_half_width(1.0);
  const Grid grid = Grid::uniform(1.5 * w, 301);
  const Profile p = explicit_pattern_m1(1.0, grid);
  const auto peaks = interior_maxima(p);
  REQUIRE(peaks.size() == 1);
  // closed-form maximum [2(n+1)/(n+2)]^{(n+1)/n} = (4/3)^2 at n = 1
  CHECK(peaks[0] == doctest::Approx(16.0 / 9.0).epsilon(1e-6));
}

// ---------------------------------------------------------------------------
// envelope decomposition of computed profiles
// ---------------------------------------------------------------------------

TEST_CASE("envelope of the m = 1 explicit pattern: constant, single-signed tail") {
  const double w = bvp::bump_half_width(1.0);
  const Grid grid = Grid::uniform(1.5 * w, 301);
  const Profile p = explicit_pattern_m1(1.0, grid);
  // the interface position is known in closed form here
  const EnvelopeSamples env = envelope_decompose(p, -w, 40);
  REQUIRE(!env.s.empty());
  CHECK(!env.tail_below_floor);
  // no oscillation: the envelope-stripped tail keeps one sign throughout
  for (double v : env.phi) CHECK(v > 0.0);
  // and it tends to the constant tail state of the odd-m equation: the
  // explicit pattern's edge expansion gives exactly phi0 = 1/144 at n = 1
  const double phi0 = equilibria_odd(1, 1.0).phi0;
  for (std::size_t i = 0; i < env.s.size(); ++i)
    if (env.s[i] < std::log(0.3))  // close to the interface
      CHECK(env.phi[i] == doctest::Approx(phi0).epsilon(1e-2));
}

TEST_CASE("envelope_decompose recovers the orbit from a synthetic tail profile") {
  // Build F(y) = y^gamma phi(ln y) with phi integrated along the found
  // orbit by an independent fixed-step RK4, then check the decomposition
  // hands the orbit amplitude back.
  const OrbitRecord& orb = orbit_m2_n1();
  const double s_lo = -3.0, s_hi = 0.5, hs = 2e-4;
  std::vector<double> ss, ph;
  std::vector<double> y = orb.cauchy_data;
  // shift the launch so the stored span covers [s_lo, s_hi] when relabeled
  auto deriv = [&](const std::vector<double>& st) {
    return rhs_autonomous(st, 2, 1.0, 0.0);
  };
  double s = s_lo;
  while (s <= s_hi) {
    ss.push_back(s);
    ph.push_back(y[0]);
    const auto k1 = deriv(y);
    std::vector<double> t(4);
    for (int i = 0; i < 4; ++i) t[i] = y[i] + 0.5 * hs * k1[i];
    const auto k2 = deriv(t);
    for (int i = 0; i < 4; ++i) t[i] = y[i] + 0.5 * hs * k2[i];
    const auto k3 = deriv(t);
    for (int i = 0; i < 4; ++i) t[i] = y[i] + hs * k3[i];
    const auto k4 = deriv(t);
    for (int i = 0; i < 4; ++i)
      y[i] += hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    s += hs;
  }

  Profile p;
  p.params = stationary_params(2, 1.0);
  const int npts = 1201;
  const double y_hi = std::exp(s_hi);
  p.grid = Grid::uniform(y_hi, npts);  // nodes in [-y_hi, y_hi]
  p.params.R = y_hi;
  p.params.npts = npts;
  p.values.assign(npts, 0.0);
  for (int i = 0; i < npts; ++i) {
    const double yy = p.grid.nodes[i];
    if (yy <= std::exp(s_lo)) continue;
    const double si = std::log(yy);
    // linear interpolation in the stored table
    const std::size_t k =
        std::min(ss.size() - 2, static_cast<std::size_t>((si - s_lo) / hs));
    const double t = (si - ss[k]) / hs;
    const double phi = (1.0 - t) * ph[k] + t * ph[k + 1];
    p.values[i] = std::pow(yy, 8.0) * phi;
  }

  const EnvelopeSamples env = envelope_decompose(p, 0.0, npts);
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < env.phi.size(); ++i) {
    const double a = std::fabs(env.phi[i]);
    if (a > std::fabs(env.phi[i - 1]) && a >= std::fabs(env.phi[i + 1]) &&
        env.s[i] > s_lo + 0.2)
      peaks.push_back(a);
  }
  REQUIRE(peaks.size() >= 2);
  for (double v : peaks)
    CHECK(v == doctest::Approx(orb.amplitude).epsilon(1e-3));
}

TEST_CASE("envelope of a computed m = 2 pattern oscillates at the orbit scale") {
  // The resolvable tail band of a discrete pattern is bounded below by the
  // continuation epsilon (under ~50 eps the regularized equation takes over
  // with its own artificial wavelength) and above by the loss of the
  // envelope asymptotics, so a deep schedule and a fine mesh are needed to
  // expose a couple of genuine oscillations.
  const MultiIndex two = MultiIndex::parse("+2");
  ProblemParams params = bvp::default_params({two}, 2, 1.0);
  params.npts = ((params.npts - 1) * 2 + 1);  // twice the default density
  bvp::NewtonOptions opt;
  opt.symmetry = bvp::Symmetry::even;
  opt.schedule = {1e-2, 1e-3, 1e-4, 1e-7, 1e-8, 1e-9, 1e-10};
  const double eps_final = opt.schedule.back();
  const bvp::SolveReport rep = bvp::solve_classified(two, params, opt);
  REQUIRE(rep.converged);

  const auto& F = rep.profile.values;
  const auto& x = rep.profile.grid.nodes;
  double fmax = 0.0;
  for (double v : F) fmax = std::max(fmax, std::fabs(v));

  // The interface is not at the threshold-based support edge: the tail
  // keeps oscillating below it. Estimate it from the zero crossings inside
  // the genuine band, whose offsets form a geometric sequence with ratio
  // e^{P/2} (two crossings per period of the orbit): Aitken extrapolation
  // of three successive crossings converges to the accumulation point.
  std::vector<double> cross;
  for (int i = 1; i < rep.profile.grid.npts / 2; ++i) {
    const double band = std::max(std::fabs(F[i - 1]), std::fabs(F[i]));
    if ((F[i - 1] < 0.0) != (F[i] < 0.0) && band > 50.0 * eps_final &&
        band < 1e-2 * fmax) {
      const double t = F[i - 1] / (F[i - 1] - F[i]);
      cross.push_back(x[i - 1] + t * (x[i] - x[i - 1]));
    }
  }
  REQUIRE(cross.size() >= 3);
  const double c0 = cross[0], c1 = cross[1], c2 = cross[2];
  const double a = c0 - (c1 - c0) * (c1 - c0) / (c2 - 2.0 * c1 + c0);
  // consecutive crossing gaps grow by e^{P/2}
  const double r = (c2 - c1) / (c1 - c0);
  CHECK(r == doctest::Approx(std::exp(0.5 * orbit_m2_n1().period)).epsilon(0.05));

  const EnvelopeSamples env = envelope_decompose(rep.profile, a, 500);
  CHECK(!env.tail_below_floor);
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < env.phi.size(); ++i) {
    const double v = std::fabs(env.phi[i]);
    const double Fv = std::fabs(env.phi[i] * std::pow(std::exp(env.s[i]), 8.0));
    if (v > std::fabs(env.phi[i - 1]) && v >= std::fabs(env.phi[i + 1]) &&
        Fv > 10.0 * eps_final && Fv < 0.05 * fmax)
      peaks.push_back(v);
  }
  REQUIRE(peaks.size() >= 3);
  const double amp = orbit_m2_n1().amplitude;
  for (double v : peaks) {
    CHECK(v >= 0.5 * amp);
    CHECK(v <= 2.0 * amp);
  }
  // the mid-band oscillations, clear of both cutoffs, sit much closer
  CHECK(peaks[peaks.size() / 2] == doctest::Approx(amp).epsilon(0.15));
}

TEST_CASE("envelope_decompose: zero tail is flagged, bad arguments throw") {
  Profile p;
  p.grid = Grid::uniform(5.0, 51);
  p.params = stationary_params(2, 1.0);
  p.params.R = 5.0;
  p.params.npts = 51;
  p.values.assign(51, 0.0);
  const EnvelopeSamples env = envelope_decompose(p, 0.0, 10);
  CHECK(env.tail_below_floor);
  CHECK_THROWS_AS(envelope_decompose(p, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(envelope_decompose(p, 10.0, 5), std::invalid_argument);
}
