#include "compactonlab/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace clab {

void ProblemParams::validate() const {
  if (m < 1) throw std::invalid_argument("ProblemParams: m must be >= 1");
  if (!(n > 0.0)) throw std::invalid_argument("ProblemParams: n must be > 0");
  if (epsilon < 0.0) throw std::invalid_argument("ProblemParams: epsilon must be >= 0");
  if (!(R > 0.0)) throw std::invalid_argument("ProblemParams: R must be > 0");
  if (npts < 2 * m + 3) throw std::invalid_argument("ProblemParams: npts must be >= 2m+3");
  if (npts % 2 == 0) throw std::invalid_argument("ProblemParams: npts must be odd");
}

DerivedExponents derive_exponents(int m, double n) {
  if (m < 1 || !(n > 0.0)) throw std::invalid_argument("derive_exponents: need m >= 1, n > 0");
  DerivedExponents d;
  d.alpha = n / (n + 1.0);
  d.beta = (n + 2.0) / (n + 1.0);
  d.gamma = 2.0 * m * (n + 1.0) / n;
  return d;
}

DerivedExponents derive_exponents(const ProblemParams& p) {
  p.validate();
  return derive_exponents(p.m, p.n);
}

Grid Grid::uniform(double R, int npts) {
  if (!(R > 0.0) || npts < 3 || npts % 2 == 0)
    throw std::invalid_argument("Grid::uniform: need R > 0 and odd npts >= 3");
  Grid g;
  g.R = R;
  g.npts = npts;
  g.h = 2.0 * R / (npts - 1);
  g.nodes.resize(npts);
  for (int i = 0; i < npts; ++i) g.nodes[i] = -R + i * g.h;
  g.nodes[(npts - 1) / 2] = 0.0;  // pin the center exactly
  g.nodes[npts - 1] = R;
  return g;
}

double boundary_defect(const Profile& p) {
  const int m = p.params.m;
  const int N = p.grid.npts;
  const double h = p.grid.h;
  const auto& F = p.values;
  double worst = std::max(std::abs(F[0]), std::abs(F[N - 1]));
  // one-sided differences of order k at both ends, k = 1..m-1
  for (int k = 1; k < m; ++k) {
    double dl = 0.0, dr = 0.0;
    for (int j = 0; j <= k; ++j) {
      // forward/backward difference with binomial weights
      double w = 1.0;
      for (int t = 0; t < j; ++t) w *= double(k - t) / double(t + 1);
      if ((k - j) % 2 == 1) w = -w;
      dl += w * F[j];
      dr += w * F[N - 1 - j];
    }
    double hk = std::pow(h, k);
    worst = std::max({worst, std::abs(dl / hk), std::abs(dr / hk)});
  }
  return worst;
}

MultiIndex MultiIndex::parse(const std::string& text) {
  MultiIndex mi;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    // trim
    size_t a = tok.find_first_not_of(" \t");
    size_t b = tok.find_last_not_of(" \t");
    if (a == std::string::npos) throw std::invalid_argument("MultiIndex: empty token in '" + text + "'");
    tok = tok.substr(a, b - a + 1);
    Token t;
    if (tok == "inf") {
      t.infinite = true;
    } else if (tok[0] == '+' || tok[0] == '-') {
      t.is_signed = true;
      t.value = std::stoi(tok);
    } else {
      t.value = std::stoi(tok);
    }
    mi.tokens.push_back(t);
  }
  mi.validate();
  return mi;
}

std::string MultiIndex::str() const {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ",";
    const Token& t = tokens[i];
    if (t.infinite) {
      out += "inf";
    } else if (t.is_signed) {
      out += (t.value > 0 ? "+" : "") + std::to_string(t.value);
    } else {
      out += std::to_string(t.value);
    }
  }
  return out;
}

void MultiIndex::validate() const {
  if (tokens.empty()) throw std::invalid_argument("MultiIndex: empty");
  for (size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    const bool gap_slot = (i % 2 == 1);
    if (!gap_slot) {
      if (!t.is_signed || t.infinite)
        throw std::invalid_argument("MultiIndex: position " + std::to_string(i) + " must be a signed token");
      if (t.value == 0 || t.value % 2 != 0)
        throw std::invalid_argument("MultiIndex: signed tokens must be nonzero even integers");
    } else {
      if (t.is_signed)
        throw std::invalid_argument("MultiIndex: position " + std::to_string(i) + " must be an unsigned gap token");
      if (!t.infinite && t.value < 0)
        throw std::invalid_argument("MultiIndex: gap tokens must be nonnegative");
    }
  }
  if (tokens.size() % 2 == 0)
    throw std::invalid_argument("MultiIndex: must end on a signed token");
}

int MultiIndex::groups() const {
  return int((tokens.size() + 1) / 2);
}

int MultiIndex::total_bumps() const {
  int b = 0;
  for (size_t i = 0; i < tokens.size(); i += 2) b += std::abs(tokens[i].value) / 2;
  return b;
}

bool MultiIndex::has_infinite_gap() const {
  for (const Token& t : tokens)
    if (t.infinite) return true;
  return false;
}

namespace {

double support_halfwidth_m1(double n) { return (n + 1.0) * pi / n; }

Profile sample_m1(double n, const Grid& grid, double amp, double expo) {
  if (grid.R < support_halfwidth_m1(n))
    throw domain_too_small("explicit m=1 profile: support half-width " +
                           std::to_string(support_halfwidth_m1(n)) + " exceeds R = " +
                           std::to_string(grid.R));
  Profile p;
  p.grid = grid;
  p.params.m = 1;
  p.params.n = n;
  p.params.epsilon = 0.0;
  p.params.R = grid.R;
  p.params.npts = grid.npts;
  p.values.resize(grid.npts, 0.0);
  const double half = support_halfwidth_m1(n);
  for (int i = 0; i < grid.npts; ++i) {
    const double x = grid.nodes[i];
    if (std::abs(x) >= half) continue;
    const double c = std::cos(n * x / (2.0 * (n + 1.0)));
    p.values[i] = std::pow(amp * c * c, expo);
  }
  return p;
}

}  // namespace

Profile explicit_profile_m1(double n, const Grid& grid) {
  if (!(n > 0.0)) throw std::invalid_argument("explicit_profile_m1: n must be > 0");
  return sample_m1(n, grid, 2.0 * (n + 1.0) / (n * (n + 2.0)), 1.0 / n);
}

Profile explicit_pattern_m1(double n, const Grid& grid) {
  if (!(n > 0.0)) throw std::invalid_argument("explicit_pattern_m1: n must be > 0");
  return sample_m1(n, grid, 2.0 * (n + 1.0) / (n + 2.0), (n + 1.0) / n);
}

namespace {
Profile scale_profile(const Profile& p, double factor) {
  Profile out = p;
  for (double& v : out.values) v *= factor;
  return out;
}
}  // namespace

Profile to_flow_form(const Profile& pattern) {
  const double n = pattern.params.n;
  return scale_profile(pattern, std::pow(n, -(n + 1.0) / n));
}

Profile to_pattern_form(const Profile& flow_state) {
  const double n = flow_state.params.n;
  return scale_profile(flow_state, std::pow(n, (n + 1.0) / n));
}

int count_sign_changes(const std::vector<double>& values, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("count_sign_changes: threshold must be > 0");
  int count = 0;
  int last_sign = 0;
  for (double v : values) {
    if (std::abs(v) <= threshold) continue;
    const int s = v > 0.0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++count;
    last_sign = s;
  }
  return count;
}

int count_sign_changes(const Profile& p, double threshold) {
  return count_sign_changes(p.values, threshold);
}

}  // namespace clab
