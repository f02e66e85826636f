#include "compactonlab/variational.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "compactonlab/operators.hpp"

namespace clab::variational {

EnergyBreakdown energy(const Profile& p) {
  const DerivedExponents ex = derive_exponents(p.params);
  EnergyBreakdown e;
  e.dm2 = tilde_dm_quadratic(p);
  const std::size_t N = p.values.size();
  std::vector<double> f2(N), fb(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double v = p.values[i];
    f2[i] = v * v;
    fb[i] = std::pow(std::fabs(v), ex.beta);
  }
  e.l2 = integrate(f2, p.grid.h);
  e.lbeta = integrate(fb, p.grid.h);
  e.H0 = -e.dm2 + e.l2;
  e.E = -0.5 * e.dm2 + 0.5 * e.l2 - e.lbeta / ex.beta;
  if (e.H0 > 0.0) {
    e.cF = e.lbeta / std::pow(e.H0, 0.5 * ex.beta);
    e.cf_defined = true;
  }
  return e;
}

double cf_scaling_check(double cF1, int k, double beta) {
  if (k < 1) throw std::invalid_argument("cf_scaling_check: k must be >= 1");
  return std::pow(static_cast<double>(k), 0.5 * (2.0 - beta)) * cF1;
}

Spectrum polyharmonic_spectrum(int m, double R, int npts, int kmax,
                               bool want_vectors) {
  ProblemParams pp;
  pp.m = m;
  pp.R = R;
  pp.npts = npts;
  pp.validate();
  const Grid grid = Grid::uniform(R, npts);
  const BandedMatrix L = derivative_matrix_2m(m, grid);
  const int nn = L.dim;
  const int kd = L.kd;
  if (kmax < 1) throw std::invalid_argument("polyharmonic_spectrum: kmax < 1");
  const int nev = std::min(kmax, nn);

  // LAPACK symmetric-band storage, lower, column-major:
  // ab[j*ldab + (i-j)] = A(i,j) for j <= i <= j+kd.
  const int ldab = kd + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * nn, 0.0);
  for (int j = 0; j < nn; ++j)
    for (int i = j; i <= std::min(nn - 1, j + kd); ++i)
      ab[static_cast<std::size_t>(j) * ldab + (i - j)] = L.get(i, j);

  const double abstol = 2.0 * LAPACKE_dlamch('S');
  lapack_int found = 0;
  std::vector<double> w(nn, 0.0);
  std::vector<double> z, q;
  std::vector<lapack_int> ifail;
  double zdummy = 0.0, qdummy = 0.0;
  lapack_int ldz = 1, ldq = 1;
  char jobz = 'N';
  if (want_vectors) {
    jobz = 'V';
    ldz = nn;
    ldq = nn;
    z.resize(static_cast<std::size_t>(nn) * nev);
    q.resize(static_cast<std::size_t>(nn) * nn);
    ifail.resize(nn);
  }
  const lapack_int info = LAPACKE_dsbevx(
      LAPACK_COL_MAJOR, jobz, 'I', 'L', nn, kd, ab.data(), ldab,
      want_vectors ? q.data() : &qdummy, ldq, 0.0, 0.0, 1, nev, abstol, &found,
      w.data(), want_vectors ? z.data() : &zdummy, ldz,
      want_vectors ? ifail.data() : nullptr);
  if (info != 0)
    throw std::runtime_error("polyharmonic_spectrum: dsbevx failed, info = " +
                             std::to_string(info));

  Spectrum s;
  s.m = m;
  s.R = R;
  s.npts = npts;
  s.count = found;
  s.eigenvalues.assign(w.begin(), w.begin() + found);
  if (want_vectors) {
    const double scale = 1.0 / std::sqrt(grid.h);
    s.eigenvectors.resize(found);
    for (int k = 0; k < found; ++k) {
      std::vector<double>& v = s.eigenvectors[k];
      v.assign(z.begin() + static_cast<std::size_t>(k) * nn,
               z.begin() + static_cast<std::size_t>(k + 1) * nn);
      int imax = 0;
      for (int i = 1; i < nn; ++i)
        if (std::fabs(v[i]) > std::fabs(v[imax])) imax = i;
      const double flip = v[imax] < 0.0 ? -scale : scale;
      for (double& x : v) x *= flip;
    }
  }
  return s;
}

int ls_category(const Spectrum& s, double boundary_tol) {
  if (s.eigenvalues.empty() || s.eigenvalues.back() < 1.0)
    throw insufficient_spectrum(
        "ls_category: spectrum tops out at " +
        (s.eigenvalues.empty() ? std::string("nothing")
                               : std::to_string(s.eigenvalues.back())) +
        " < 1; the count below 1 could be an undercount -- raise kmax");
  int count = 0;
  for (double lam : s.eigenvalues)
    if (lam < 1.0 - boundary_tol) ++count;
  return count;
}

std::vector<NonlocalMode> nonlocal_explicit(const Spectrum& s, double beta) {
  if (!(beta > 1.0 && beta < 2.0))
    throw std::invalid_argument("nonlocal_explicit: beta must lie in (1,2)");
  std::vector<NonlocalMode> out;
  for (int l = 0; l < static_cast<int>(s.eigenvalues.size()); ++l) {
    const double lam = s.eigenvalues[l];
    if (!(lam < 1.0)) continue;
    NonlocalMode mode;
    mode.l = l;
    mode.lambda = lam;
    mode.c = std::pow(1.0 - lam, 1.0 / (beta - 2.0));
    out.push_back(mode);
  }
  return out;
}

int genus(const MultiIndex& sigma) { return sigma.total_bumps(); }

bool is_basic_pattern(const MultiIndex& sigma) {
  if (sigma.tokens.empty()) return false;
  int prev = 0;
  for (const MultiIndex::Token& t : sigma.tokens) {
    if (t.is_signed) {
      if (std::abs(t.value) != 2) return false;
      const int s = t.value > 0 ? 1 : -1;
      if (prev != 0 && s == prev) return false;
      prev = s;
    } else {
      if (t.infinite || t.value != 1) return false;
    }
  }
  return true;
}

OrderingAudit frc_ordering_audit(const std::vector<bvp::SolveReport>& reports) {
  std::vector<const bvp::SolveReport*> keep;
  for (const bvp::SolveReport& rep : reports)
    if (rep.converged && !rep.classified.tokens.empty()) keep.push_back(&rep);

  std::vector<OrderingRow> rows(keep.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(keep.size()); ++i) {
    const bvp::SolveReport& rep = *keep[i];
    OrderingRow row;
    row.sigma = rep.classified.str();
    row.genus = genus(rep.classified);
    row.basic = is_basic_pattern(rep.classified);
    const EnergyBreakdown e = energy(rep.profile);
    row.cF = e.cF;
    row.cf_defined = e.cf_defined;
    rows[i] = row;
  }

  std::sort(rows.begin(), rows.end(),
            [](const OrderingRow& a, const OrderingRow& b) {
              if (a.genus != b.genus) return a.genus < b.genus;
              if (a.cf_defined != b.cf_defined) return a.cf_defined;
              return a.cF < b.cF;
            });

  OrderingAudit audit;
  audit.rows = std::move(rows);
  for (std::size_t i = 0; i < audit.rows.size(); ++i) {
    const bool first_of_class =
        i == 0 || audit.rows[i - 1].genus != audit.rows[i].genus;
    if (first_of_class && audit.rows[i].cf_defined)
      audit.rows[i].class_minimum = true;
  }
  for (const OrderingRow& row : audit.rows)
    if (row.basic)
      audit.basic_attains_minimum[row.genus] =
          audit.basic_attains_minimum.count(row.genus)
              ? audit.basic_attains_minimum[row.genus]
              : row.class_minimum;
  return audit;
}

namespace {

std::string canonical_label(const MultiIndex& sig) {
  if (is_basic_pattern(sig)) return "F" + std::to_string(genus(sig) - 1);
  return "F_{" + sig.str() + "}";
}

MultiIndex flip_signs(const MultiIndex& sig) {
  MultiIndex out = sig;
  for (MultiIndex::Token& t : out.tokens)
    if (t.is_signed) t.value = -t.value;
  return out;
}

int leading_sign(const MultiIndex& sig) {
  for (const MultiIndex::Token& t : sig.tokens)
    if (t.is_signed) return t.value > 0 ? 1 : -1;
  return 1;
}

ProblemParams params_for(const MultiIndex& sig, int m, double n, double h) {
  ProblemParams pp;
  pp.m = m;
  pp.n = n;
  pp.R = bvp::default_domain(sig, n);
  pp.npts = static_cast<int>(std::lround(2.0 * pp.R / h)) + 1;
  if (pp.npts % 2 == 0) ++pp.npts;
  return pp;
}

struct MeshedCf {
  double cF = 0.0;
  double maxabs = 0.0;
  bool ok = false;
  std::string message;
};

MeshedCf fail(const std::string& why) {
  MeshedCf out;
  out.message = why;
  return out;
}

MeshedCf score(Profile profile, double tail_threshold) {
  bvp::truncate_tails(profile, tail_threshold);
  const EnergyBreakdown e = energy(profile);
  if (!e.cf_defined) return fail("H0 <= 0, c_F undefined");
  MeshedCf out;
  out.ok = true;
  out.cF = e.cF;
  for (double v : profile.values) out.maxabs = std::max(out.maxabs, std::fabs(v));
  return out;
}

// Solve one multiindex on mesh spacing h and score c_F on the tail-truncated
// profile. "inf" gaps: solve the (identical) finite segments once and glue
// fully disjoint copies, spaced five half-widths apart, into a wide window.
MeshedCf cf_on_mesh(const MultiIndex& sig, int m, double n, double h,
                    const bvp::NewtonOptions& opt) try {
  if (!sig.has_infinite_gap()) {
    bvp::SolveReport rep = bvp::solve_classified(sig, params_for(sig, m, n, h), opt);
    if (!rep.converged)
      return fail("solve failed: " + rep.message);
    if (rep.classified.str() != sig.str())
      return fail("converged onto '" + rep.classified.str() + "' instead");
    return score(std::move(rep.profile), opt.tail_threshold);
  }

  // Split on the infinite gaps.
  std::vector<MultiIndex> segments(1);
  for (const MultiIndex::Token& t : sig.tokens) {
    if (t.infinite)
      segments.emplace_back();
    else
      segments.back().tokens.push_back(t);
  }
  std::vector<int> signs;
  MultiIndex base_sig;
  for (std::size_t q = 0; q < segments.size(); ++q) {
    if (segments[q].tokens.empty())
      return fail("empty segment between inf gaps");
    const int s = leading_sign(segments[q]);
    const MultiIndex norm = s < 0 ? flip_signs(segments[q]) : segments[q];
    if (q == 0)
      base_sig = norm;
    else if (norm.str() != base_sig.str())
      throw std::invalid_argument(
          "cf_table: inf gaps require identical segments, got '" +
          base_sig.str() + "' vs '" + norm.str() + "'");
    signs.push_back(s);
  }

  bvp::SolveReport rep =
      bvp::solve_classified(base_sig, params_for(base_sig, m, n, h), opt);
  if (!rep.converged)
    return fail("segment solve failed: " + rep.message);
  if (rep.classified.str() != base_sig.str())
    return fail("segment converged onto '" + rep.classified.str() + "' instead");
  bvp::truncate_tails(rep.profile, opt.tail_threshold);

  const int S = static_cast<int>(segments.size());
  const double w = bvp::bump_half_width(n);
  const double delta = 5.0 * w;
  const double Rwide = delta * S;
  const int nwide = static_cast<int>(std::lround(2.0 * Rwide / h)) + 1;
  const Grid wide = Grid::uniform(Rwide, nwide % 2 ? nwide : nwide + 1);
  std::vector<double> centers(S);
  for (int q = 0; q < S; ++q) centers[q] = (q - 0.5 * (S - 1)) * delta;
  Profile glued = bvp::glue_disjoint(rep.profile, centers, signs, wide);
  return score(std::move(glued), opt.tail_threshold);
} catch (const std::exception& err) {
  return fail(err.what());
}

}  // namespace

std::vector<CfTableRow> cf_table(const std::vector<std::string>& sigmas,
                                 int m, double n,
                                 const bvp::NewtonOptions& opt,
                                 int points_per_half_width) {
  if (points_per_half_width < 16)
    throw std::invalid_argument("cf_table: points_per_half_width too small");
  // Even counts keep glued centers on the mesh.
  const int ppw = points_per_half_width + points_per_half_width % 2;
  const double w = bvp::bump_half_width(n);

  std::vector<CfTableRow> rows;
  for (const std::string& text : sigmas) {
    const MultiIndex sig = MultiIndex::parse(text);
    CfTableRow row;
    row.sigma = sig.str();
    row.label = canonical_label(sig);
    row.genus = genus(sig);
    const MeshedCf coarse = cf_on_mesh(sig, m, n, w / ppw, opt);
    row.converged = coarse.ok;
    if (!coarse.ok) {
      row.message = coarse.message;
      rows.push_back(row);
      continue;
    }
    row.cF_h = coarse.cF;
    row.max_abs = coarse.maxabs;
    // A few members only have a Newton basin on some meshes; when the
    // halved mesh loses the class, keep the coarse value instead of
    // extrapolating across two different patterns.
    const MeshedCf fine = cf_on_mesh(sig, m, n, w / (2 * ppw), opt);
    if (fine.ok) {
      row.cF_h2 = fine.cF;
      row.cF = richardson(coarse.cF, fine.cF);
      row.max_abs = fine.maxabs;
    } else {
      row.cF_h2 = std::numeric_limits<double>::quiet_NaN();
      row.cF = coarse.cF;
      row.message = "fine mesh: " + fine.message;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace clab::variational
