#include "compactonlab/tails.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "compactonlab/operators.hpp"

namespace clab::tails {

namespace {

// First-order form phi^(order) = sign * psi_eps(phi) - sum_j c[j] phi^(j)
// shared by the tail equation (c from the P_{2m} ladder), its binomial limit
// (c from the binomial row), and the full stationary equation (c = {-1,0,...}).
//
// Internally the state is conjugated to z_j = phi^(j) / omega^j with omega
// the characteristic rate (gamma for the raw tail system, whose derivative
// orders otherwise span gamma^{2m-1} in magnitude and would defeat
// norm-based error control). z_0 = phi, and z_1 has the sign of phi', so
// event detection is unaffected.
struct System {
  int order = 0;
  std::vector<double> c;  // c[j] multiplies phi^(j), j < order; leading term 1
  double alpha = 0.5;
  double sign = 1.0;
  double eps = 0.0;
  double omega = 1.0;

  // conjugated coefficients, built by finalize()
  std::vector<double> cz;
  double psi_scale = 1.0;

  void finalize() {
    cz.resize(order);
    for (int j = 0; j < order; ++j)
      cz[j] = c[j] * std::pow(omega, j + 1 - order);
    psi_scale = std::pow(omega, 1 - order);
  }

  void rhs(const double* z, double* dz) const {
    for (int j = 0; j + 1 < order; ++j) dz[j] = omega * z[j + 1];
    double top = sign * psi_scale * root_term(z[0], eps, alpha);
    for (int j = 0; j < order; ++j) top -= cz[j] * z[j];
    dz[order - 1] = top;
  }

  std::vector<double> to_phi_units(const std::vector<double>& z) const {
    std::vector<double> y(z.size());
    double p = 1.0;
    for (std::size_t j = 0; j < z.size(); ++j, p *= omega) y[j] = z[j] * p;
    return y;
  }
  std::vector<double> to_z_units(const std::vector<double>& y) const {
    std::vector<double> z(y.size());
    double p = 1.0;
    for (std::size_t j = 0; j < y.size(); ++j, p *= omega) z[j] = y[j] / p;
    return z;
  }
};

double resolve_alpha(double n) { return std::isinf(n) ? 1.0 : n / (n + 1.0); }

double resolve_gamma(int m, double n) {
  return std::isinf(n) ? 2.0 * m : 2.0 * m * (n + 1.0) / n;
}

void check_mn(int m, double n) {
  if (m < 1) throw std::invalid_argument("tails: m must be >= 1");
  if (!(n > 0.0)) throw std::invalid_argument("tails: n must be positive");
}

System tail_system(int m, double n, bool scaled, double eps) {
  System sys;
  sys.order = 2 * m;
  sys.alpha = resolve_alpha(n);
  sys.sign = (m % 2 == 0) ? -1.0 : 1.0;
  sys.eps = eps;
  sys.c.resize(sys.order);
  if (scaled) {
    long long binom = 1;  // C(2m, j) built by the multiplicative recurrence
    for (int j = 0; j < sys.order; ++j) {
      sys.c[j] = static_cast<double>(binom);
      binom = binom * (sys.order - j) / (j + 1);
    }
  } else {
    const double g = resolve_gamma(m, n);
    const auto pk = pk_build(sys.order);
    for (int j = 0; j < sys.order; ++j)
      sys.c[j] = pk[sys.order].eval_coeff(j, g);
    sys.omega = g;  // both the decay rates and the oscillation frequency
                    // sit at this scale
  }
  return sys;
}

// ---- Dormand-Prince 5(4) with step-size control -------------------------

constexpr double kA[7][6] = {
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656,
     0},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kB4[7] = {5179.0 / 57600,    0,           7571.0 / 16695,
                           393.0 / 640,       -92097.0 / 339200,
                           187.0 / 2100,      1.0 / 40};

class Integrator {
 public:
  // y0 is in conjugated z-units; the integrator owns a finalized copy of the
  // system so callers never have to remember to call finalize().
  Integrator(System sys, std::vector<double> y0, double rtol)
      : sys_own_(std::move(sys)), sys_(&sys_own_), y_(std::move(y0)),
        rtol_(rtol) {
    sys_own_.finalize();
    const int d = sys_->order;
    for (auto& k : k_) k.resize(d);
    stage_.resize(d);
    trial_.resize(d);
    k7_.resize(d);
    h_ = 1e-4;
  }

  double s() const { return s_; }
  const std::vector<double>& y() const { return y_; }

  // One accepted adaptive step of size at most hmax; returns the size taken.
  double step(double hmax) {
    const int d = sys_->order;
    for (int attempt = 0; attempt < 200; ++attempt) {
      const double h = std::min(h_, hmax);
      sys_->rhs(y_.data(), k_[0].data());
      for (int i = 1; i < 7; ++i) {
        for (int j = 0; j < d; ++j) {
          double acc = y_[j];
          for (int l = 0; l < i; ++l) acc += h * kA[i][l] * k_[l][j];
          stage_[j] = acc;
        }
        sys_->rhs(stage_.data(), k_[i].data());
      }
      // the 7th stage is the 5th-order solution itself
      for (int j = 0; j < d; ++j) {
        double acc = y_[j];
        for (int l = 0; l < 6; ++l) acc += h * kA[6][l] * k_[l][j];
        trial_[j] = acc;
      }
      sys_->rhs(trial_.data(), k7_.data());
      double ynorm = 0.0;
      for (int j = 0; j < d; ++j)
        ynorm = std::max(ynorm, std::max(std::fabs(y_[j]), std::fabs(trial_[j])));
      double err = 0.0;
      for (int j = 0; j < d; ++j) {
        double y4 = y_[j];
        for (int l = 0; l < 6; ++l) y4 += h * kB4[l] * k_[l][j];
        y4 += h * kB4[6] * k7_[j];
        // automatic absolute floor: the state norm keeps the weight finite
        // at zero crossings of individual components
        const double w =
            rtol_ * (ynorm + std::max(std::fabs(y_[j]), std::fabs(trial_[j]))) +
            1e-300;
        const double e = (trial_[j] - y4) / w;
        err += e * e;
      }
      err = std::sqrt(err / d);
      if (err <= 1.0 || h <= 1e-14 * (1.0 + std::fabs(s_))) {
        s_ += h;
        y_.swap(trial_);
        const double grow =
            err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h_ = h * std::clamp(grow, 0.2, 5.0);
        return h;
      }
      h_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
    }
    throw no_convergence("adaptive step size underflow");
  }

  // Advance exactly to s_target (> current s).
  void advance_to(double s_target) {
    while (s_ < s_target - 1e-14 * (1.0 + std::fabs(s_target)))
      step(s_target - s_);
  }

 private:
  System sys_own_;
  const System* sys_;
  std::vector<double> y_;
  double s_ = 0.0;
  double h_ = 1e-4;
  double rtol_ = 1e-10;
  std::vector<double> k_[7];
  std::vector<double> stage_;
  std::vector<double> trial_;
  std::vector<double> k7_;
};

double inf_norm(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::fabs(x));
  return r;
}

double state_distance(const std::vector<double>& a,
                      const std::vector<double>& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    r = std::max(r, std::fabs(a[i] - b[i]));
  return r;
}

struct Event {
  double s = 0.0;
  std::vector<double> y;
};

// Refine a sign change of component `comp` inside the step [s0, s0+ds] by
// bisection on re-integrated sub-spans from the stored pre-step state.
Event refine_crossing(const System& sys, const std::vector<double>& y0,
                      double s0, double ds, int comp, double rtol) {
  double lo = 0.0, hi = ds;
  const double f_lo_sign = y0[comp] >= 0.0 ? 1.0 : -1.0;
  Event ev;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    Integrator probe(sys, y0, rtol);
    probe.advance_to(mid);
    const double val = probe.y()[comp];
    if ((val >= 0.0 ? 1.0 : -1.0) == f_lo_sign)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-13 * (1.0 + ds)) {
      ev.s = s0 + mid;
      ev.y = probe.y();
      return ev;
    }
  }
  Integrator probe(sys, y0, rtol);
  probe.advance_to(0.5 * (lo + hi));
  ev.s = s0 + 0.5 * (lo + hi);
  ev.y = probe.y();
  return ev;
}

// Walk the trajectory, reporting refined events: upward zero crossings of
// phi (kind 0), maxima (kind 1), and minima (kind 2). The callback returns
// false to stop.
template <typename Callback>
void walk(const System& sys, Integrator& integ, double s_limit, Callback&& cb) {
  std::vector<double> y_prev = integ.y();
  double s_prev = integ.s();
  while (integ.s() < s_limit) {
    const double ds = integ.step(s_limit - integ.s());
    const auto& y_now = integ.y();
    bool keep_going = true;
    if (y_prev[0] < 0.0 && y_now[0] >= 0.0) {
      Event ev = refine_crossing(sys, y_prev, s_prev, ds, 0, 1e-10);
      if (ev.y.size() > 1 && ev.y[1] > 0.0) keep_going = cb(0, ev);
    }
    if (keep_going && y_prev[1] != 0.0 &&
        ((y_prev[1] > 0.0) != (y_now[1] > 0.0))) {
      Event ev = refine_crossing(sys, y_prev, s_prev, ds, 1, 1e-10);
      keep_going = cb(y_prev[1] > 0.0 ? 1 : 2, ev);
    }
    if (!keep_going) return;
    y_prev = y_now;
    s_prev = integ.s();
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

}  // namespace

std::vector<double> rhs_autonomous(const std::vector<double>& state, int m,
                                   double n, double epsilon) {
  check_mn(m, n);
  if (static_cast<int>(state.size()) != 2 * m) {
    std::ostringstream os;
    os << "rhs_autonomous: state must have 2m = " << 2 * m << " components, got "
       << state.size();
    throw std::invalid_argument(os.str());
  }
  System sys = tail_system(m, n, /*scaled=*/false, epsilon);
  sys.omega = 1.0;  // public contract: the state is in plain phi units
  sys.finalize();
  std::vector<double> dy(state.size());
  sys.rhs(state.data(), dy.data());
  return dy;
}

Equilibria equilibria_odd(int m, double n) {
  check_mn(m, n);
  if (m % 2 == 0)
    throw wrong_parity(
        "equilibria_odd: constant tail states exist only for odd m (for even "
        "m the signs of the falling factorial and the root term clash)");
  const double g = resolve_gamma(m, n);
  double prod = 1.0;
  for (int k = 0; k < 2 * m; ++k) prod *= g - k;
  Equilibria eq;
  eq.phi0 = std::pow(prod, -1.0 / resolve_alpha(n));
  return eq;
}

ScaledEquation scale_small_n(int m, double n) {
  check_mn(m, n);
  if (std::isinf(n))
    throw std::invalid_argument("scale_small_n: n must be finite");
  if (m != 2 && m != 3)
    throw std::invalid_argument(
        "scale_small_n: the binomial limit form is worked out for m = 2 and "
        "m = 3 only");
  ScaledEquation eq;
  eq.m = m;
  eq.n = n;
  long long binom = 1;
  for (int j = 0; j <= 2 * m; ++j) {
    eq.coefficients.push_back(static_cast<double>(binom));
    binom = binom * (2 * m - j) / (j + 1);
  }
  eq.argument_factor = 2.0 * m / n;
  eq.amplitude_factor = std::pow(n / (2.0 * m), 2.0 * m / n);
  return eq;
}

namespace {

// Forward-attractor search shared by periodic_even and periodic_attractor.
OrbitRecord find_attractor(System sys, double s_span, double detect_tol,
                           double rtol, const std::string& label) {
  // Seed amplitude from the balance c0 |phi| ~ |phi|^{1-alpha}; the orbit is
  // within a few orders of magnitude of this scale and the attractor basin
  // covers the gap.
  const double scale = std::pow(std::fabs(sys.c[0]), -1.0 / sys.alpha);
  sys.eps = 1e-14 * scale;

  std::vector<double> y0(sys.order, 0.0);
  y0[0] = 0.5 * scale;
  Integrator integ(sys, y0, rtol);

  std::vector<Event> returns;
  bool settled = false;
  double return_dist = std::numeric_limits<double>::quiet_NaN();
  walk(sys, integ, s_span, [&](int kind, const Event& ev) {
    if (kind != 0) return true;
    if (!returns.empty()) {
      const double d = state_distance(ev.y, returns.back().y);
      const double ref = std::max(inf_norm(ev.y), 1e-30);
      if (d <= detect_tol * ref) {
        return_dist = state_distance(sys.to_phi_units(ev.y),
                                     sys.to_phi_units(returns.back().y));
        returns.push_back(ev);
        settled = true;
        return false;
      }
    }
    returns.push_back(ev);
    return true;
  });
  if (!settled) {
    std::ostringstream os;
    os << label << ": section returns did not settle to " << detect_tol
       << " within s = " << s_span << " (" << returns.size()
       << " returns seen)";
    throw no_convergence(os.str());
  }

  OrbitRecord rec;
  rec.stability = Stability::stable;
  rec.method = "forward-attractor";
  rec.equation = "tail";
  rec.return_distance = return_dist;
  rec.cauchy_data = sys.to_phi_units(returns.back().y);
  rec.period = returns.back().s - returns[returns.size() - 2].s;

  // Two more loops from the settled state to measure max |phi| at refined
  // extrema.
  Integrator loop(sys, returns.back().y, rtol);
  double amp = 0.0;
  walk(sys, loop, 2.2 * rec.period, [&](int kind, const Event& ev) {
    if (kind != 0) amp = std::max(amp, std::fabs(ev.y[0]));
    return true;
  });
  rec.amplitude = amp;
  return rec;
}

}  // namespace

OrbitRecord periodic_even(int m, double n, double s_span, double detect_tol,
                          bool scaled, double rtol) {
  check_mn(m, n);
  if (m % 2 != 0)
    throw wrong_parity(
        "periodic_even: the tail orbit is a forward attractor only for even "
        "m; use periodic_odd_shoot for odd m");
  if (scaled && std::isinf(n))
    throw std::invalid_argument("periodic_even: scaled form needs finite n");

  std::ostringstream label;
  label << "periodic_even(m=" << m << ", n=" << n << ")";
  OrbitRecord rec = find_attractor(tail_system(m, n, scaled, 0.0), s_span,
                                   detect_tol, rtol, label.str());
  rec.m = m;
  rec.n = n;
  rec.scaled = scaled;
  return rec;
}

OrbitRecord periodic_attractor(const std::vector<double>& coefficients,
                               double alpha, double rhs_sign, double s_span,
                               double detect_tol, double rtol) {
  if (coefficients.empty() || coefficients.size() % 2 != 0)
    throw std::invalid_argument(
        "periodic_attractor: need an even number of coefficients (the system "
        "order is 2m)");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("periodic_attractor: alpha must be in (0, 1]");
  System sys;
  sys.order = static_cast<int>(coefficients.size());
  sys.c = coefficients;
  sys.alpha = alpha;
  sys.sign = rhs_sign;
  OrbitRecord rec = find_attractor(std::move(sys), s_span, detect_tol, rtol,
                                   "periodic_attractor");
  rec.m = static_cast<int>(coefficients.size()) / 2;
  rec.n = alpha / (1.0 - alpha);  // matches when alpha came from some n
  if (alpha == 1.0) rec.n = std::numeric_limits<double>::infinity();
  rec.scaled = true;
  return rec;
}

namespace {

// Outcome of following one shooting trajectory: which equilibrium branch it
// locks onto (+1 / -1), or 0 if undecided within the span.
struct ShotResult {
  int side = 0;
  std::vector<double> crossing_s;  // upward crossings while still oscillating
  std::vector<double> extremum_abs;
};

ShotResult follow_shot(const System& sys, const std::vector<double>& y0,
                       double s_limit, double rtol) {
  ShotResult res;
  Integrator integ(sys, y0, rtol);
  std::vector<double> y_prev = integ.y();
  double s_prev = integ.s();
  double s_last_cross = 0.0;
  double max_gap = 0.0;
  while (integ.s() < s_limit) {
    const double ds = integ.step(s_limit - integ.s());
    const auto& y_now = integ.y();
    const bool crossed = (y_prev[0] >= 0.0) != (y_now[0] >= 0.0);
    if (crossed) {
      max_gap = std::max(max_gap, integ.s() - s_last_cross);
      s_last_cross = integ.s();
      if (y_prev[0] < 0.0) {
        Event ev = refine_crossing(sys, y_prev, s_prev, ds, 0, rtol);
        if (ev.y[1] > 0.0) res.crossing_s.push_back(ev.s);
      }
    }
    if (y_prev[1] != 0.0 && ((y_prev[1] > 0.0) != (y_now[1] > 0.0))) {
      Event ev = refine_crossing(sys, y_prev, s_prev, ds, 1, rtol);
      res.extremum_abs.push_back(std::fabs(ev.y[0]));
    }
    const double dwell = std::max(5.0, 3.0 * max_gap);
    if (integ.s() - s_last_cross > dwell) {
      res.side = y_now[0] > 0.0 ? 1 : -1;
      return res;
    }
    y_prev = y_now;
    s_prev = integ.s();
  }
  return res;
}

}  // namespace

OrbitRecord periodic_odd_shoot(int m, double n, double shoot_tol, bool scaled,
                               double rtol, double a0) {
  check_mn(m, n);
  if (m % 2 == 0)
    throw wrong_parity(
        "periodic_odd_shoot: shooting applies to odd m; use periodic_even "
        "for even m");
  if (m == 1)
    throw std::invalid_argument(
        "periodic_odd_shoot: the order-2 tail system has phase-plane "
        "divergence -c1 < 0 everywhere, hence no closed orbits (this is why "
        "the m = 1 pattern tail is monotone)");
  if (scaled && std::isinf(n))
    throw std::invalid_argument("periodic_odd_shoot: scaled form needs finite n");
  if (!(a0 > 0.0))
    throw std::invalid_argument("periodic_odd_shoot: a0 must be positive");

  System sys = tail_system(m, n, scaled, 0.0);
  sys.eps = 1e-14 * a0;
  const double s_limit = 600.0;

  auto z_start = [&](double b) {
    std::vector<double> y0(sys.order, 0.0);
    y0[0] = a0;
    y0[2] = b;
    return sys.to_z_units(y0);
  };
  auto side_of = [&](double b) {
    return follow_shot(sys, z_start(b), s_limit, rtol).side;
  };

  // Bracket: scan curvatures on a log ladder (negative first; the branch
  // bending the small positive start back down is the interesting one).
  const double mags[] = {0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0,
                         3.0,  5.0,  7.0, 10.0, 20.0, 50.0, 100.0};
  double b_lo = 0.0, b_hi = 0.0;
  int side_lo = 0;
  bool bracketed = false;
  for (double dir : {-1.0, 1.0}) {
    double prev_b = 0.0;
    int prev_side = 0;
    for (double mag : mags) {
      const double b = dir * mag * a0;
      const int s = side_of(b);
      if (s != 0 && prev_side != 0 && s != prev_side) {
        b_lo = prev_b;
        b_hi = b;
        side_lo = prev_side;
        bracketed = true;
        break;
      }
      if (s != 0) {
        prev_b = b;
        prev_side = s;
      }
    }
    if (bracketed) break;
  }
  if (!bracketed)
    throw bracket_failed(
        "periodic_odd_shoot: no sign flip of the escape side over the "
        "scanned curvature range");

  for (int it = 0; it < 200; ++it) {
    if (std::fabs(b_hi - b_lo) <=
        shoot_tol * std::max(std::fabs(b_lo), std::fabs(b_hi)))
      break;
    const double mid = 0.5 * (b_lo + b_hi);
    const int s = side_of(mid);
    if (s == 0) break;  // trajectory tracks the orbit for the whole span
    if (s == side_lo)
      b_lo = mid;
    else
      b_hi = mid;
  }
  const double b_star = 0.5 * (b_lo + b_hi);

  // Measure the orbit on the critical trajectory; medians discard both the
  // launch transient and the eventual escape.
  ShotResult traj = follow_shot(sys, z_start(b_star), s_limit, rtol);

  OrbitRecord rec;
  rec.m = m;
  rec.n = n;
  rec.scaled = scaled;
  rec.stability = Stability::unstable;
  rec.method = "shooting";
  rec.equation = "tail";
  rec.cauchy_data = std::vector<double>(sys.order, 0.0);
  rec.cauchy_data[0] = a0;
  rec.cauchy_data[2] = b_star;
  if (traj.crossing_s.size() >= 2) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < traj.crossing_s.size(); ++i)
      gaps.push_back(traj.crossing_s[i] - traj.crossing_s[i - 1]);
    rec.period = median(gaps);
  }
  rec.amplitude = median(traj.extremum_abs);
  if (rec.amplitude == 0.0 && !traj.extremum_abs.empty())
    rec.amplitude = *std::max_element(traj.extremum_abs.begin(),
                                      traj.extremum_abs.end());
  return rec;
}

OrbitRecord full_periodic_orbit_stationary(const ProblemParams& params,
                                           double f0, double shoot_tol) {
  params.validate();
  if (params.m != 2)
    throw std::invalid_argument(
        "full_periodic_orbit_stationary: worked out for m = 2");
  System sys;
  sys.order = 4;
  sys.c = {-1.0, 0.0, 0.0, 0.0};  // F'''' = F - psi(F)
  sys.alpha = resolve_alpha(params.n);
  sys.sign = -1.0;
  sys.eps = params.epsilon;
  const double rtol = 1e-11;
  const double s_limit = 600.0;

  // Escape classifier. Upward escapes blow up through the linear part;
  // downward ones do not diverge but fall off the band around the F = 1
  // equilibrium into the small-amplitude oscillation nearzero, so the
  // down threshold sits between that band and zero.
  const double up_thr = f0 + 2.0;
  const double down_thr = 0.2;
  auto side_of = [&](double b) {
    std::vector<double> y0 = {f0, 0.0, b, 0.0};
    Integrator integ(sys, y0, rtol);
    while (integ.s() < s_limit) {
      integ.step(s_limit - integ.s());
      if (integ.y()[0] > up_thr) return 1;
      if (integ.y()[0] < down_thr) return -1;
    }
    return 0;
  };

  double b_lo = 0.0, b_hi = 0.0;
  int side_lo = 0;
  bool bracketed = false;
  double prev_b = 0.0;
  int prev_side = 0;
  for (double b = -0.05; b >= -1.0001; b -= 0.05) {
    const int s = side_of(b);
    if (s != 0 && prev_side != 0 && s != prev_side) {
      b_lo = prev_b;
      b_hi = b;
      side_lo = prev_side;
      bracketed = true;
      break;
    }
    if (s != 0) {
      prev_b = b;
      prev_side = s;
    }
  }
  if (!bracketed)
    throw bracket_failed(
        "full_periodic_orbit_stationary: no sign flip of the escape side for "
        "initial curvatures in [-1, 0)");
  for (int it = 0; it < 200; ++it) {
    if (std::fabs(b_hi - b_lo) <=
        shoot_tol * std::max(std::fabs(b_lo), std::fabs(b_hi)))
      break;
    const double mid = 0.5 * (b_lo + b_hi);
    const int s = side_of(mid);
    if (s == 0) break;
    if (s == side_lo)
      b_lo = mid;
    else
      b_hi = mid;
  }
  const double b_star = 0.5 * (b_lo + b_hi);

  // Collect per-cycle maxima of F on the critical trajectory (extrema with
  // F'' < 0) until it escapes.
  std::vector<double> y0 = {f0, 0.0, b_star, 0.0};
  Integrator integ(sys, y0, rtol);
  std::vector<double> maxima, max_s;
  std::vector<double> y_prev = integ.y();
  double s_prev = integ.s();
  while (integ.s() < s_limit) {
    const double ds = integ.step(s_limit - integ.s());
    const auto& y_now = integ.y();
    if (y_now[0] > up_thr || y_now[0] < down_thr) break;
    if (y_prev[1] > 0.0 && y_now[1] <= 0.0) {
      Event ev = refine_crossing(sys, y_prev, s_prev, ds, 1, rtol);
      maxima.push_back(ev.y[0]);
      max_s.push_back(ev.s);
    }
    y_prev = y_now;
    s_prev = integ.s();
  }

  OrbitRecord rec;
  rec.m = 2;
  rec.n = params.n;
  rec.scaled = false;
  rec.stability = Stability::unstable;
  rec.method = "shooting";
  rec.equation = "stationary";
  rec.cauchy_data = y0;
  rec.amplitude = median(maxima);
  if (max_s.size() >= 2) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < max_s.size(); ++i)
      gaps.push_back(max_s[i] - max_s[i - 1]);
    rec.period = median(gaps);
  }
  return rec;
}

double stationary_energy(const std::vector<double>& state, double n) {
  if (state.size() != 4)
    throw std::invalid_argument(
        "stationary_energy: state must be (F, F', F'', F''')");
  const double alpha = resolve_alpha(n);
  const double q = 2.0 - alpha;
  const double F = state[0];
  return state[3] * state[1] - 0.5 * state[2] * state[2] - 0.5 * F * F +
         std::pow(std::fabs(F), q) / q;
}

std::vector<double> interior_maxima(const Profile& p, double level) {
  std::vector<double> out;
  const auto& F = p.values;
  for (std::size_t i = 1; i + 1 < F.size(); ++i) {
    if (!(F[i] > level)) continue;
    if (!(F[i] > F[i - 1] && F[i] >= F[i + 1])) continue;
    const double a = F[i - 1], b = F[i], c = F[i + 1];
    const double den = 2.0 * (a - 2.0 * b + c);
    const double shift = den != 0.0 ? (a - c) / den : 0.0;
    out.push_back(b - 0.25 * (a - c) * shift);
  }
  return out;
}

EnvelopeSamples envelope_decompose(const Profile& p, double interface_y,
                                   int window) {
  if (window < 1)
    throw std::invalid_argument("envelope_decompose: window must be >= 1");
  const DerivedExponents ex = derive_exponents(p.params);
  EnvelopeSamples out;
  double fmax = 0.0;
  for (double v : p.values) fmax = std::max(fmax, std::fabs(v));
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * fmax;
  int below = 0;
  for (int i = 0; i < p.grid.npts && static_cast<int>(out.s.size()) < window;
       ++i) {
    const double dy = p.grid.nodes[i] - interface_y;
    if (dy <= 0.0) continue;
    out.s.push_back(std::log(dy));
    out.phi.push_back(p.values[i] * std::pow(dy, -ex.gamma));
    if (std::fabs(p.values[i]) <= floor) ++below;
  }
  if (out.s.empty())
    throw std::invalid_argument(
        "envelope_decompose: no grid nodes to the right of the interface");
  out.tail_below_floor = below > static_cast<int>(out.s.size()) / 2;
  return out;
}

std::vector<double> perturbation_returns(const OrbitRecord& orbit,
                                         double rel_perturbation, int returns) {
  if (returns < 1)
    throw std::invalid_argument("perturbation_returns: need returns >= 1");
  if (orbit.cauchy_data.empty())
    throw std::invalid_argument("perturbation_returns: empty orbit record");

  System sys;
  if (orbit.equation == "stationary") {
    sys.order = 4;
    sys.c = {-1.0, 0.0, 0.0, 0.0};
    sys.alpha = resolve_alpha(orbit.n);
    sys.sign = -1.0;
    sys.eps = 1e-14 * std::max(orbit.amplitude, 1.0);
  } else {
    sys = tail_system(orbit.m, orbit.n, orbit.scaled, 0.0);
    sys.eps = 1e-14 * std::max(orbit.amplitude, inf_norm(orbit.cauchy_data));
  }
  const double rtol = 1e-10;
  const double span = (orbit.period > 0.0 ? orbit.period : 10.0) *
                      (returns + 4) * 2.0;

  // The comparison is between section states (the proper return map), which
  // quotients out the neutral phase direction along the orbit; a time-based
  // comparison would keep a nondecaying phase offset even for even m. The
  // section is the phi = 0 upward crossing for tail orbits, and the maxima
  // sequence for the stationary orbit (which never crosses zero).
  const int want_kind = orbit.equation == "stationary" ? 1 : 0;
  auto section_states = [&](const std::vector<double>& z0) {
    std::vector<std::vector<double>> out;
    Integrator integ(sys, z0, rtol);
    walk(sys, integ, span, [&](int kind, const Event& ev) {
      if (kind == want_kind) out.push_back(ev.y);
      return static_cast<int>(out.size()) < returns;
    });
    return out;
  };

  const std::vector<double> z_ref = sys.to_z_units(orbit.cauchy_data);
  std::vector<double> z_per = z_ref;
  for (double& v : z_per) v *= 1.0 + rel_perturbation;

  const auto ref = section_states(z_ref);
  const auto per = section_states(z_per);
  const std::size_t k = std::min(ref.size(), per.size());
  if (k < 2)
    throw no_convergence(
        "perturbation_returns: fewer than two comparable section returns "
        "(a trajectory left the orbit immediately)");
  std::vector<double> dist;
  for (std::size_t i = 0; i < k; ++i)
    dist.push_back(state_distance(ref[i], per[i]));
  return dist;
}

}  // namespace clab::tails
