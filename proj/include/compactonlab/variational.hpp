#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "compactonlab/bvp.hpp"
#include "compactonlab/core.hpp"

// Energy bookkeeping for patterns: the quadrature breakdown of
//
//     E(F) = -1/2 int |D~^m F|^2 + 1/2 int F^2 - 1/beta int |F|^beta,
//
// the fibering ratio c_F whose ordering ranks patterns of equal bump count,
// the Dirichlet spectrum of (-1)^m d^{2m} (whose eigenvalue count below 1
// bounds how many distinct patterns a window of radius R supports), and the
// non-local model whose critical points are plain scaled eigenfunctions --
// the one member of the family where every critical value is explicit.

namespace clab::variational {

// Quadrature pieces of the energy, and the fibering ratio
//
//     c_F = int |F|^beta / (-int |D~^m F|^2 + int F^2)^{beta/2},
//
// which is scale-invariant (degree-0 homogeneous) and defined only while the
// quadratic part H0 = -dm2 + l2 is positive. On an exact stationary profile
// H0 equals lbeta (multiply the equation by F and integrate by parts), which
// the tests use as an oracle.
struct EnergyBreakdown {
  double dm2 = 0.0;    // int |D~^m F|^2
  double l2 = 0.0;     // int F^2
  double lbeta = 0.0;  // int |F|^beta
  double E = 0.0;      // -dm2/2 + l2/2 - lbeta/beta
  double H0 = 0.0;     // -dm2 + l2
  double cF = std::numeric_limits<double>::quiet_NaN();
  bool cf_defined = false;  // false when H0 <= 0 (cF left NaN)
};

EnergyBreakdown energy(const Profile& p);

// Critical value of k non-interacting copies of a pattern with value cF1:
// k^{(2-beta)/2} * cF1. Disjoint supports make every integral additive, and
// c_F is homogeneous of degree (2-beta)/2 in that common factor k.
double cf_scaling_check(double cF1, int k, double beta);

// Lowest eigenvalues of (-1)^m d^{2m}/dy^{2m} on [-R, R], discretized with
// the same interior stencils and clamp closure as the pattern solver (for
// m <= 2 this is the textbook fixed/clamped scheme). Eigenvalues ascend;
// eigenvectors (optional) live on the interior nodes, normalized to
// h * sum(psi^2) = 1 with a positive leading component.
struct Spectrum {
  int m = 0;
  double R = 0.0;
  int npts = 0;
  int count = 0;
  std::vector<double> eigenvalues;
  std::vector<std::vector<double>> eigenvectors;  // filled on request
};

Spectrum polyharmonic_spectrum(int m, double R, int npts, int kmax,
                               bool want_vectors = false);

// #{lambda_k < 1 - boundary_tol}. The count controls how many explicit
// non-local modes exist and grows without bound as R grows. boundary_tol
// guards the razor-edge case lambda_k == 1 in the continuum, which the
// discrete eigenvalue approaches from below; ~10 h^2 is a safe margin.
// Throws insufficient_spectrum when the computed window never reaches 1, so
// the count could be an undercount.
int ls_category(const Spectrum& s, double boundary_tol = 0.0);

// Explicit critical points of the non-local variant of the energy, in which
// the |F|^beta term is replaced by (int F^2)^{beta/2}. Its Euler equation
//
//     -(-1)^m F^(2m) + F - F (int F^2)^{(beta-2)/2} = 0
//
// is solved exactly by F_l = c_l psi_l for every eigenvalue lambda_l < 1,
// with |c_l|^{beta-2} = 1 - lambda_l. Requires beta in (1,2).
struct NonlocalMode {
  int l = 0;           // index into the spectrum (0-based)
  double lambda = 0.0;
  double c = 0.0;      // positive root; -c solves as well
};

std::vector<NonlocalMode> nonlocal_explicit(const Spectrum& s, double beta);

// Half the total crossing count of a multiindex: the number of bumps, which
// is the dimension of the linking sets a pattern of that shape calibrates.
int genus(const MultiIndex& sigma);

// The alternating chain +-2,1,-+2,...: all excursions simple, all gaps a
// single transversal crossing. These are the patterns conjectured to attain
// the minimal c_F within their genus.
bool is_basic_pattern(const MultiIndex& sigma);

// c_F ranking of converged patterns, grouped by genus. Rows sort by
// (genus, c_F); the minimum row of each genus class is flagged, and
// basic_attains_minimum records, for every genus that contains a basic
// chain, whether that chain is the class minimum (the conjecture under
// audit -- an empirical check, not a proof).
struct OrderingRow {
  std::string sigma;
  int genus = 0;
  double cF = 0.0;
  bool cf_defined = false;
  bool basic = false;
  bool class_minimum = false;
};

struct OrderingAudit {
  std::vector<OrderingRow> rows;
  std::map<int, bool> basic_attains_minimum;
};

OrderingAudit frc_ordering_audit(const std::vector<bvp::SolveReport>& reports);

// One row of the critical-value tables: the pattern is solved on meshes of
// spacing h and h/2 (same window), sub-floor tails are truncated, and c_F is
// Richardson-extrapolated. Multiindices with "inf" gaps are realized by
// solving each finite segment alone and gluing the copies, fully disjoint,
// into one wide window.
struct CfTableRow {
  std::string label;   // F0/F1/F2 for basic chains, else F_{sigma}
  std::string sigma;   // as requested (glued rows keep their "inf" tokens)
  int genus = 0;
  double cF = 0.0;     // Richardson value, or cF_h when the fine leg is lost
  double cF_h = 0.0;   // coarse mesh
  double cF_h2 = 0.0;  // fine mesh; NaN when that mesh loses the class
  double max_abs = 0.0;
  bool converged = false;
  std::string message;
};

std::vector<CfTableRow> cf_table(const std::vector<std::string>& sigmas,
                                 int m, double n,
                                 const bvp::NewtonOptions& opt = {},
                                 int points_per_half_width = 200);

}  // namespace clab::variational
