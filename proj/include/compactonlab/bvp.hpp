#pragma once

#include <string>
#include <vector>

#include "compactonlab/core.hpp"
#include "compactonlab/operators.hpp"

// Damped-Newton solver for the regularized stationary problem
//
//     (-1)^m F^(2m) - F + (eps^2 + F^2)^{-alpha/2} F = 0
//
// on [-R, R] with the m-fold clamp at both ends. The sharp limit eps = 0 is
// approached by continuation over a decreasing epsilon schedule; eps = 0
// itself is never used inside Newton (the linearization is singular where
// F = 0) and only enters as a diagnostic residual on the converged profile.

namespace clab::bvp {

class singular_linearization : public std::runtime_error {
public:
  explicit singular_linearization(const std::string& what)
      : std::runtime_error(what) {}
};

// Reflection class of a pattern. Newton can optionally project each iterate
// onto the even or odd subspace: the continuum problem is translation
// invariant, so a discrete pattern has a near-null drift mode that roundoff
// (notably the unsymmetric pivoting of the banded solver) excites; pinning
// the known reflection symmetry removes it.
enum class Symmetry { none, even, odd };

// even for palindromic token strings, odd for sign-flipped palindromes,
// none otherwise.
Symmetry sigma_symmetry(const MultiIndex& sigma);

struct NewtonOptions {
  double tol = 1e-10;       // inf-norm residual target per continuation stage
  int max_iter = 60;        // Newton iterations per stage
  int max_halvings = 40;    // line-search halvings before declaring divergence
  std::vector<double> schedule = {1e-2, 1e-3, 1e-4, 1e-7};
  double dedup_tol = 1e-3;        // relative L2 distance identifying profiles
  double tail_threshold = 1e-6;   // |F| below this (relative to max) is "zero"
  double trivial_threshold = 0.05;  // max|F| below this means collapsed to 0
  // The inf-norm of the residual cannot be evaluated below the roundoff of
  // the 2m-th derivative, about 4^m/h^{2m} * DBL_EPSILON * |F|; each stage
  // targets max(tol, floor_slack * that floor). For m = 1 meshes the literal
  // tol wins; for m >= 2 the floor does.
  double floor_slack = 50.0;
  Symmetry symmetry = Symmetry::none;  // project iterates onto a parity class
};

enum class SolveStatus {
  converged,
  trivial,            // converged, but onto F == 0 (flagged, not a pattern)
  newton_diverged,    // line search found no decreasing step
  linear_solve_failed,
  max_iter_exceeded,
};

struct SolveReport {
  bool converged = false;
  SolveStatus status = SolveStatus::max_iter_exceeded;
  int iterations = 0;             // Newton steps summed over the schedule
  double residual_inf = 0.0;      // at the final schedule epsilon
  double residual_eps0_inf = 0.0; // diagnostic: same profile, eps = 0
  double tol_effective = 0.0;     // the floored target actually enforced
  std::vector<double> epsilon_path;
  Profile profile;
  int sign_changes = 0;           // zero crossings between major excursions
  double support_lo = 0.0;        // interval where |F| > tail threshold
  double support_hi = 0.0;
  std::string message;
  MultiIndex classified;          // empty when trivial or failed
};

struct GuessSpec {
  MultiIndex sigma;
  double bump_half_width = 0.0;  // 0: default (n+1)pi/n, the m=1 half-width
  double separation = 0.0;       // gap spacing per crossing; 0: half-width/2
  double amplitude = 0.0;        // 0: default [2(n+1)/(n+2)]^{(n+1)/n}
  double micro_amplitude = 0.0;  // gap-seed bumps, relative; 0: default 0.25
};

// Support half-width of the explicit m=1 pattern, the length scale all
// guesses are built from.
double bump_half_width(double n);

// Domain half-width sized for a pattern with the given bump count: five
// half-widths per bump. Oversized domains are harmless (tails vanish).
double default_domain(const MultiIndex& sigma, double n);

// Parameters sized for a whole family batch (domain from the widest sigma,
// mesh spacing ~ half-width / 200 rounded to an odd point count).
ProblemParams default_params(const std::vector<MultiIndex>& sigmas, int m,
                             double n);

// Pointwise residual (-1)^m F^(2m) - F + (eps^2+F^2)^{-alpha/2} F at the
// interior nodes (length npts - 2).
std::vector<double> residual(const Profile& p);

// Same, evaluated with eps = 0 regardless of p.params.epsilon.
std::vector<double> residual_eps0(const Profile& p);

// Banded linearization L - I + diag(psi_eps'(F)) at the interior nodes.
// Throws singular_linearization if eps = 0 and F vanishes at a node.
BandedMatrix jacobian(const Profile& p);

// Sum of signed cosine-power bumps laid out left to right: each signed token
// +-2k becomes k same-sign bumps spaced one half-width apart (they merge),
// each gap token g pushes the next group g * separation further out and
// seeds g - 1 small alternating bumps in between (the zero-crossing
// structure the gap encodes). The layout is centered. Throws
// domain_too_small if it does not fit.
Profile guess_from_multiindex(const GuessSpec& spec, const Grid& grid,
                              const ProblemParams& params);

// Damped Newton with epsilon continuation, warm-starting each stage from the
// previous one. Never throws on non-convergence: the report carries status
// and diagnostics.
SolveReport solve(const Profile& guess, const NewtonOptions& opt = {});

// Batch solve: synthesize a guess per sigma on shared parameters, solve,
// classify, and drop converged duplicates (relative L2 within dedup_tol).
// Failed items stay in the list with their status.
std::vector<SolveReport> solve_family(const std::vector<MultiIndex>& sigmas,
                                      const ProblemParams& params,
                                      const NewtonOptions& opt = {});

// Scan guess separations until a converged profile classifies as the
// requested sigma (the basin of each gap count is an empirical window).
// Separations are per-crossing spacings in units of the bump half-width;
// when empty a default ladder 0.15, 0.2, ..., 1.2 is used. Returns the first
// match; if none matches, the last converged report, else the last report.
SolveReport solve_classified(const MultiIndex& sigma,
                             const ProblemParams& params,
                             const NewtonOptions& opt = {},
                             std::vector<double> separations = {});

// Read the multiindex back off a profile: major excursions (|F| reaching
// past 0.5) become signed tokens counting their crossings of the level
// sign(F)*1; zero crossings between consecutive major excursions become gap
// tokens. Oscillations outside the outermost major excursions (the support
// edge tails) are not part of the classification.
MultiIndex classify(const Profile& p, double tail_threshold = 1e-6);

// || a - b ||_2 / max(||a||_2, ||b||_2) on a shared grid.
double relative_l2_distance(const Profile& a, const Profile& b);

// Zero every node with |F| < rel_floor * max|F| and return how many were
// cleared. Converged profiles carry sub-floor tails everywhere (a remnant of
// the epsilon regularization, not of the sharp-limit pattern, which vanishes
// identically outside its support); glue_disjoint reads exact zeros as
// "outside the support", so truncate before gluing.
int truncate_tails(Profile& p, double rel_floor = 1e-6);

// Place copies of a single-pattern profile at the given centers (sign taken
// from the center's sign slot) onto one wide grid. Supports must not
// overlap. Used for the exact disjoint-gluing identities.
Profile glue_disjoint(const Profile& base, const std::vector<double>& centers,
                      const std::vector<int>& signs, const Grid& grid);

}  // namespace clab::bvp
