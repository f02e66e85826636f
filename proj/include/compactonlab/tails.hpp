#pragma once
// Oscillatory structure of pattern tails. Near a support edge every pattern
// factors as F(y) = y^gamma phi(ln y) with y measured from the interface;
// the bounded component phi then satisfies an autonomous ODE built from the
// P_k operator ladder. This module integrates that ODE: constant equilibria
// (odd m), periodic orbits (stable for even m, found as forward attractors;
// unstable for odd m, found by shooting), the small-n and infinite-n limit
// forms, the analogous periodic orbit of the full stationary equation, and
// the envelope decomposition of computed profiles for cross-checks.

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "compactonlab/core.hpp"

namespace clab::tails {

// forward integration exhausted its span before the Poincare returns settled
class no_convergence : public std::runtime_error {
 public:
  explicit no_convergence(const std::string& what) : std::runtime_error(what) {}
};

// no sign flip of the escape side was found over the scanned parameter range
class bracket_failed : public std::runtime_error {
 public:
  explicit bracket_failed(const std::string& what) : std::runtime_error(what) {}
};

enum class Stability { stable, unstable };

struct OrbitRecord {
  int m = 0;
  double n = 0.0;       // may be infinity (sign-nonlinearity limit)
  bool scaled = false;  // orbit of the binomial limit system in eta = 2m s/n
  double amplitude = 0.0;  // max |phi| over one period
  double period = 0.0;     // in s (eta for scaled systems, y for the full ODE)
  Stability stability = Stability::stable;
  // inf-norm distance (phi units) between the last two section states when
  // the forward-attractor search declared convergence; NaN for shooting
  // records, which do not iterate a return map
  double return_distance = std::numeric_limits<double>::quiet_NaN();
  // state (phi, phi', ..., phi^(2m-1)) at the recorded section point
  std::vector<double> cauchy_data;
  std::string method;    // "forward-attractor" or "shooting"
  std::string equation;  // "tail" or "stationary"
};

struct Equilibria {
  double phi0 = 0.0;  // phi = +-phi0 solve the autonomous equation (odd m)
};

// Descriptor of the small-n limit form: phi(s) = amplitude_factor * Phi(eta),
// eta = argument_factor * s, where Phi satisfies the binomial-operator
// equation sum_j C(2m,j) Phi^(j) = -(-1)^m |Phi|^{-n/(n+1)} Phi.
struct ScaledEquation {
  int m = 0;
  double n = 0.0;
  std::vector<double> coefficients;  // C(2m,j), j = 0..2m
  double amplitude_factor = 0.0;     // (n/2m)^{2m/n}
  double argument_factor = 0.0;      // 2m/n
};

// First-order form of the autonomous tail equation: state is
// (phi, phi', ..., phi^(2m-1)); the top derivative balances
// (-1)^{m+1}|phi|^{-alpha}phi against the P_{2m} ladder evaluated at
// gamma(m, n). The singular factor is regularized exactly as in the
// collocation residual, with the given epsilon.
std::vector<double> rhs_autonomous(const std::vector<double>& state, int m,
                                   double n, double epsilon);

// phi0 = [gamma (gamma-1) ... (gamma-2m+1)]^{-1/alpha}; odd m only.
Equilibria equilibria_odd(int m, double n);

// Forward-integrate from small data until two successive returns to the
// section {phi = 0, phi' > 0} agree to detect_tol relative to the
// return-state norm. Even m only (the orbit is an attractor there).
// n may be infinity; scaled selects the binomial limit system.
OrbitRecord periodic_even(int m, double n, double s_span = 400.0,
                          double detect_tol = 1e-8, bool scaled = false,
                          double rtol = 1e-10);

// Same attractor search for a caller-supplied constant-coefficient system
//     phi^(2m) + sum_j coefficients[j] phi^(j) = rhs_sign |phi|^{-alpha} phi
// (coefficients[j] multiplies phi^(j), j = 0..2m-1; the leading coefficient
// is 1). This is how exact changes of variables are cross-checked: the
// transformed system must reproduce the original orbit under the inverse
// scaling to integrator accuracy.
OrbitRecord periodic_attractor(const std::vector<double>& coefficients,
                               double alpha, double rhs_sign,
                               double s_span = 400.0, double detect_tol = 1e-8,
                               double rtol = 1e-10);

// One-parameter shooting in phi''(0) with phi(0) = a0 and all other data
// through order 2m-1 zero; the critical value separates trajectories locked
// onto the +phi0 and -phi0 equilibria and brackets the unstable orbit.
// Odd m >= 3 only: the order-2 system (m = 1) has strictly negative
// divergence in the phase plane, so it admits no closed orbits at all.
OrbitRecord periodic_odd_shoot(int m, double n, double shoot_tol = 1e-9,
                               bool scaled = false, double rtol = 1e-10,
                               double a0 = 1e-4);

// Binomial limit descriptor; the only cases worked out are m = 2 and m = 3.
ScaledEquation scale_small_n(int m, double n);

// Periodic solution of the full stationary equation in y (not the tail
// variable), shot from F(0) = f0 with F'(0) = F'''(0) = 0 over F''(0).
// Implemented for m = 2; amplitude reports the orbit maximum. The orbit
// stays away from F = 0, so params.epsilon only perturbs it at O(eps^2).
OrbitRecord full_periodic_orbit_stationary(const ProblemParams& params,
                                           double f0 = 1.5,
                                           double shoot_tol = 1e-10);

// Pointwise invariant of the m = 2 stationary equation in its sharp eps = 0
// form F'''' = F - |F|^{-alpha}F:
//     E = F''' F' - (F'')^2/2 - F^2/2 + |F|^{2-alpha}/(2-alpha),
// constant along every solution (multiply the equation by F' and integrate).
// Compact patterns have E = 0, since E vanishes identically beyond the
// support; that singles out one member of the one-parameter family of
// periodic orbits as the structure long interior oscillations settle onto.
// state is (F, F', F'', F''').
double stationary_energy(const std::vector<double>& state, double n);

// Refined heights of the local maxima of a profile that exceed `level`
// (parabolic fit through each discrete peak): the interior oscillation
// structure of a computed pattern, comparable against the periodic
// solutions of the stationary equation.
std::vector<double> interior_maxima(const Profile& p, double level = 1.0);

struct EnvelopeSamples {
  std::vector<double> s;    // ln(y - interface)
  std::vector<double> phi;  // F(y) / (y - interface)^gamma
  // set when most sampled |F| sit at the floating-point noise floor, where
  // the quotient by the tiny envelope is meaningless (reported, not fatal)
  bool tail_below_floor = false;
};

// Strip the envelope from the first `window` grid nodes to the right of
// interface_y. gamma comes from p.params.
EnvelopeSamples envelope_decompose(const Profile& p, double interface_y,
                                   int window);

// Distance from the unperturbed trajectory at each of `returns` successive
// section crossings after a relative perturbation of the orbit's section
// state; decaying for even m, growing for odd m.
std::vector<double> perturbation_returns(const OrbitRecord& orbit,
                                         double rel_perturbation, int returns);

}  // namespace clab::tails
