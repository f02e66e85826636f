#pragma once

#include <stdexcept>
#include <string>
#include <vector>

// Shared domain types for the pattern laboratory.
//
// The stationary equation solved throughout is
//
//     (-1)^{m+1} F^(2m) + F - |F|^{-alpha} F = 0,   alpha = n/(n+1),
//
// on a symmetric interval [-R, R] with the clamp F = F' = ... = F^(m-1) = 0
// at both ends. Everything downstream (solvers, flows, orbit analysis)
// derives its exponents and grids from here.

namespace clab {

inline constexpr double pi = 3.14159265358979323846;

class domain_too_small : public std::runtime_error {
public:
  explicit domain_too_small(const std::string& what) : std::runtime_error(what) {}
};

class wrong_parity : public std::runtime_error {
public:
  explicit wrong_parity(const std::string& what) : std::runtime_error(what) {}
};

class insufficient_spectrum : public std::runtime_error {
public:
  explicit insufficient_spectrum(const std::string& what) : std::runtime_error(what) {}
};

struct ProblemParams {
  int m = 1;            // half of the derivative order: the equation is of order 2m
  double n = 1.0;       // nonlinearity exponent, n > 0
  double epsilon = 1e-4;  // regularization of |F|^{-alpha}F; 0 means the sharp limit
  double R = 2.0 * pi;  // half-width of the domain [-R, R]
  int npts = 1001;      // grid points, odd so y = 0 is a node

  void validate() const;
};

struct DerivedExponents {
  double alpha;  // n/(n+1), in (0,1)
  double beta;   // (n+2)/(n+1), in (1,2)
  double gamma;  // 2m(n+1)/n = 2m/alpha
};

DerivedExponents derive_exponents(int m, double n);
DerivedExponents derive_exponents(const ProblemParams& p);

struct Grid {
  double R = 0.0;
  int npts = 0;
  double h = 0.0;
  std::vector<double> nodes;  // y_i = -R + i h, strictly increasing, symmetric

  static Grid uniform(double R, int npts);
  int center() const { return (npts - 1) / 2; }
  int interior() const { return npts - 2; }
};

struct Profile {
  Grid grid;
  std::vector<double> values;  // F at the nodes, length grid.npts
  ProblemParams params;
};

// Largest violation of the boundary clamp: max over both ends of
// |F|, |F'|, ..., |F^(m-1)| evaluated by one-sided differences.
double boundary_defect(const Profile& p);

// Signed pattern classifier sigma = {±s1, s2, ±s3, ...}: signed tokens count
// intersections with the levels ±1 (so they are even and nonzero), unsigned
// tokens count zero crossings between bump groups. The token "inf" marks a
// gap wide enough that the groups do not interact.
struct MultiIndex {
  struct Token {
    int value = 0;        // |value| for signed tokens; crossing count for gaps
    bool is_signed = false;
    bool infinite = false;  // only valid on gap tokens
  };
  std::vector<Token> tokens;

  static MultiIndex parse(const std::string& text);
  std::string str() const;
  void validate() const;

  int groups() const;       // number of signed tokens
  int total_bumps() const;  // sum of |signed|/2
  bool has_infinite_gap() const;
};

// Explicit compactly supported solution for m = 1 of the separable-profile
// equation (1/n) f = (f^{n+1})'' + f^{n+1}:
//
//     f(x) = [ 2(n+1)/(n(n+2)) cos^2( n x / (2(n+1)) ) ]^{1/n},  |x| <= (n+1)pi/n,
//
// extended by zero. Throws domain_too_small if the grid cannot hold the support.
Profile explicit_profile_m1(double n, const Grid& grid);

// The same profile rescaled to the unit-coefficient stationary form
// F'' + F - |F|^{-alpha}F = 0:  F = n^{(n+1)/n} f^{n+1}, i.e.
//
//     F(x) = [ 2(n+1)/(n+2) cos^2( n x / (2(n+1)) ) ]^{(n+1)/n}.
//
// At n = 1 this is (16/9) cos^4(x/4) on |x| <= 2pi.
Profile explicit_pattern_m1(double n, const Grid& grid);

// Scale between the unit-coefficient form and the 1/n-form used by the
// gradient flow: w = n^{-(n+1)/n} F and back.
Profile to_flow_form(const Profile& pattern);
Profile to_pattern_form(const Profile& flow_state);

// Transversal sign changes: zero crossings where |F| exceeds the threshold on
// both sides. Sub-threshold tail wiggles are ignored (near the support edge
// the raw zero count is unbounded).
int count_sign_changes(const Profile& p, double threshold);
int count_sign_changes(const std::vector<double>& values, double threshold);

}  // namespace clab
