#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "charshock/errors.hpp"
#include "charshock/numerics.hpp"

namespace charshock {

// ---------------------------------------------------------------------------
// Problem description

struct BurgersProfile {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::optional<double> c_analytic;  // -min f' when known in closed form
};

/// f(x) = -(c/pi) sin(pi x), periodic on [-1, 1], steepest at x = 0.
inline BurgersProfile sine_profile(double c) {
  const double pi = std::numbers::pi;
  return {"sine", [c, pi](double x) { return -c / pi * std::sin(pi * x); },
          [c, pi](double x) { return -c * std::cos(pi * x); }, c};
}

/// f(x) = -c x (1 - x^2)^3 on |x| <= 1, zero outside. C^2, steepest at x = 0.
inline BurgersProfile polynomial_profile(double c) {
  return {"polynomial",
          [c](double x) {
            if (std::abs(x) >= 1.0) return 0.0;
            const double q = 1.0 - x * x;
            return -c * x * q * q * q;
          },
          [c](double x) {
            if (std::abs(x) >= 1.0) return 0.0;
            const double q = 1.0 - x * x;
            return -c * q * q * (1.0 - 7.0 * x * x);
          },
          c};
}

inline BurgersProfile zero_profile() {
  return {"zero", [](double) { return 0.0; }, [](double) { return 0.0; }, 0.0};
}

enum class BurgersBoundary { Outflow, Periodic };

struct BurgersProblem {
  BurgersProfile profile;
  double a = 0.0;
  double x_lo = -1.0;
  double x_hi = 1.0;
  BurgersBoundary boundary = BurgersBoundary::Outflow;

  /// -min f' from samples of the analytic derivative.
  double sampled_c(int n = 8192) const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) m = std::min(m, profile.df(x_lo + (x_hi - x_lo) * i / n));
    return -m;
  }

  double c() const { return profile.c_analytic ? *profile.c_analytic : sampled_c(); }
};

inline BurgersProblem make_sine_problem(double c, double a) {
  return {sine_profile(c), a, -1.0, 1.0, BurgersBoundary::Periodic};
}

inline BurgersProblem make_polynomial_problem(double c, double a) {
  return {polynomial_profile(c), a, -2.0, 2.0, BurgersBoundary::Outflow};
}

// ---------------------------------------------------------------------------
// Closed forms

enum class Classification { Global, Shock };
enum class ShockMethod { ClosedForm, MuVanishing, DirectSolver };

inline std::string to_string(Classification c) { return c == Classification::Global ? "Global" : "Shock"; }
inline std::string to_string(ShockMethod m) {
  switch (m) {
    case ShockMethod::ClosedForm: return "ClosedForm";
    case ShockMethod::MuVanishing: return "MuVanishing";
    case ShockMethod::DirectSolver: return "DirectSolver";
  }
  return "Unknown";
}

struct ShockReport {
  Classification classification = Classification::Global;
  std::optional<double> t_star;
  std::optional<double> x_star;
  ShockMethod method = ShockMethod::ClosedForm;
  double tolerance = 0.0;
};

/// (1 - e^{-a(t+1)})/a, the integrated decay factor; t + 1 when a = 0.
inline double decay_integral(double a, double t) {
  const double s = t + 1.0;
  if (a == 0.0) return s;
  return -std::expm1(-a * s) / a;
}

inline ShockReport burgers_shock_time(double a, double c) {
  if (!std::isfinite(a) || !std::isfinite(c))
    fail(ErrorKind::InvalidParameter, "damping and slope must be finite");
  ShockReport rep;
  rep.method = ShockMethod::ClosedForm;
  if (c <= 0.0 || (a > 0.0 && a >= c)) {
    rep.classification = Classification::Global;
    return rep;
  }
  rep.classification = Classification::Shock;
  // 1 - a/c * (1 - e^{-a(T+1)}) = 0
  rep.t_star = (a == 0.0) ? -1.0 + 1.0 / c : -std::log1p(-a / c) / a - 1.0;
  return rep;
}

inline double burgers_mu_from_slope(double slope, double a, double t) {
  return 1.0 + slope * decay_integral(a, t);
}

/// mu along the characteristic labelled x (its position at t = -1).
inline double burgers_mu(double x, double t, const BurgersProblem& p) {
  return burgers_mu_from_slope(p.profile.df(x), p.a, t);
}

struct CharacteristicPoint {
  double x;
  double phi;
  double mu;
};

inline CharacteristicPoint burgers_characteristic_solve(double x0, double t, const BurgersProblem& p) {
  if (t < -1.0) fail(ErrorKind::InvalidParameter, "characteristics start at t = -1");
  const auto rep = burgers_shock_time(p.a, p.c());
  if (rep.t_star && t > *rep.t_star) {
    std::ostringstream os;
    os << "t=" << t << " is past the first crossing at t*=" << *rep.t_star;
    fail(ErrorKind::PastShock, os.str());
  }
  const double f0 = p.profile.f(x0);
  const double E = decay_integral(p.a, t);
  return {x0 + f0 * E, f0 * std::exp(-p.a * (t + 1.0)), burgers_mu(x0, t, p)};
}

// ---------------------------------------------------------------------------
// Direct solver: WENO5 with Lax-Friedrichs flux splitting, SSP-RK3, Strang
// splitting of the damping term (integrated exactly).

struct BurgersSnapshot {
  double t;
  std::vector<double> phi;
  std::vector<double> label;  // advected eikonal label, empty unless tracked
};

struct BurgersRun {
  std::vector<double> x;
  double dx = 0.0;
  std::vector<double> times;
  std::vector<double> max_neg_slope;
  std::vector<BurgersSnapshot> snapshots;
  double t_final = -1.0;
};

struct BurgersSolveOptions {
  bool track_label = false;
  std::vector<double> snapshot_times;
};

namespace detail {

inline double weno5_face(double v0, double v1, double v2, double v3, double v4) {
  // reconstruction at i+1/2 from the left-biased stencil v0..v4 = v_{i-2}..v_{i+2}
  constexpr double eps = 1e-40;
  const double b0 = 13.0 / 12 * (v0 - 2 * v1 + v2) * (v0 - 2 * v1 + v2) + 0.25 * (v0 - 4 * v1 + 3 * v2) * (v0 - 4 * v1 + 3 * v2);
  const double b1 = 13.0 / 12 * (v1 - 2 * v2 + v3) * (v1 - 2 * v2 + v3) + 0.25 * (v1 - v3) * (v1 - v3);
  const double b2 = 13.0 / 12 * (v2 - 2 * v3 + v4) * (v2 - 2 * v3 + v4) + 0.25 * (3 * v2 - 4 * v3 + v4) * (3 * v2 - 4 * v3 + v4);
  const double a0 = 0.1 / ((eps + b0) * (eps + b0));
  const double a1 = 0.6 / ((eps + b1) * (eps + b1));
  const double a2 = 0.3 / ((eps + b2) * (eps + b2));
  const double q0 = (2 * v0 - 7 * v1 + 11 * v2) / 6;
  const double q1 = (-v1 + 5 * v2 + 2 * v3) / 6;
  const double q2 = (2 * v2 + 5 * v3 - v4) / 6;
  return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2);
}

// Hamilton-Jacobi WENO5 one-sided derivative from the five differences d0..d4.
inline double hj_weno5(double d0, double d1, double d2, double d3, double d4) {
  constexpr double eps = 1e-40;
  const double p0 = d0 / 3 - 7 * d1 / 6 + 11 * d2 / 6;
  const double p1 = -d1 / 6 + 5 * d2 / 6 + d3 / 3;
  const double p2 = d2 / 3 + 5 * d3 / 6 - d4 / 6;
  const double s0 = 13.0 / 12 * (d0 - 2 * d1 + d2) * (d0 - 2 * d1 + d2) + 0.25 * (d0 - 4 * d1 + 3 * d2) * (d0 - 4 * d1 + 3 * d2);
  const double s1 = 13.0 / 12 * (d1 - 2 * d2 + d3) * (d1 - 2 * d2 + d3) + 0.25 * (d1 - d3) * (d1 - d3);
  const double s2 = 13.0 / 12 * (d2 - 2 * d3 + d4) * (d2 - 2 * d3 + d4) + 0.25 * (3 * d2 - 4 * d3 + d4) * (3 * d2 - 4 * d3 + d4);
  const double a0 = 0.1 / ((eps + s0) * (eps + s0));
  const double a1 = 0.6 / ((eps + s1) * (eps + s1));
  const double a2 = 0.3 / ((eps + s2) * (eps + s2));
  return (a0 * p0 + a1 * p1 + a2 * p2) / (a0 + a1 + a2);
}

class BurgersGrid {
 public:
  static constexpr int ghosts = 3;

  BurgersGrid(int n, BurgersBoundary bc) : n_(n), bc_(bc), buf_(std::size_t(n + 2 * ghosts)) {}

  // fill ghost cells of v (interior in [ghosts, ghosts+n)); label ghosts are
  // extrapolated linearly since the label grows like x
  void fill(std::vector<double>& v, bool linear = false) const {
    const int g = ghosts;
    for (int k = 1; k <= g; ++k) {
      if (bc_ == BurgersBoundary::Periodic) {
        v[g - k] = v[g + n_ - k];
        v[g + n_ - 1 + k] = v[g + k - 1];
      } else if (linear) {
        v[g - k] = v[g] - k * (v[g + 1] - v[g]);
        v[g + n_ - 1 + k] = v[g + n_ - 1] + k * (v[g + n_ - 1] - v[g + n_ - 2]);
      } else {
        v[g - k] = v[g];
        v[g + n_ - 1 + k] = v[g + n_ - 1];
      }
    }
    if (bc_ == BurgersBoundary::Periodic && linear) {
      // labels on a periodic domain are continued by the period
      const double period = label_period_;
      for (int k = 1; k <= g; ++k) {
        v[g - k] -= period;
        v[g + n_ - 1 + k] += period;
      }
    }
  }

  void set_label_period(double p) { label_period_ = p; }

  // -d/dx (phi^2/2) into out (interior only)
  void flux_divergence(std::vector<double>& phi, double dx, std::vector<double>& out) {
    fill(phi);
    const int g = ghosts;
    double alpha = 0.0;
    for (double v : phi) alpha = std::max(alpha, std::abs(v));
    std::vector<double>& fh = buf_;
    // fh[i] is the flux at face i+1/2 for i in [g-1, g+n-1]
    for (int i = g - 1; i < g + n_; ++i) {
      auto fp = [&](int j) { return 0.5 * (0.5 * phi[j] * phi[j] + alpha * phi[j]); };
      auto fm = [&](int j) { return 0.5 * (0.5 * phi[j] * phi[j] - alpha * phi[j]); };
      const double plus = weno5_face(fp(i - 2), fp(i - 1), fp(i), fp(i + 1), fp(i + 2));
      const double minus = weno5_face(fm(i + 3), fm(i + 2), fm(i + 1), fm(i), fm(i - 1));
      fh[std::size_t(i)] = plus + minus;
    }
    for (int i = g; i < g + n_; ++i) out[std::size_t(i)] = -(fh[std::size_t(i)] - fh[std::size_t(i - 1)]) / dx;
  }

  // -phi * u_x with upwinded HJ-WENO derivatives
  void label_rate(const std::vector<double>& phi, std::vector<double>& u, double dx,
                  std::vector<double>& out) {
    fill(u, true);
    const int g = ghosts;
    for (int i = g; i < g + n_; ++i) {
      auto d = [&](int j) { return (u[std::size_t(j + 1)] - u[std::size_t(j)]) / dx; };
      double ux;
      if (phi[std::size_t(i)] >= 0.0)
        ux = hj_weno5(d(i - 3), d(i - 2), d(i - 1), d(i), d(i + 1));
      else
        ux = hj_weno5(d(i + 2), d(i + 1), d(i), d(i - 1), d(i - 2));
      out[std::size_t(i)] = -phi[std::size_t(i)] * ux;
    }
  }

 private:
  int n_;
  BurgersBoundary bc_;
  std::vector<double> buf_;
  double label_period_ = 0.0;
};

}  // namespace detail

/// Largest -d phi/dx over interior cells (second-order central differences).
inline double max_negative_slope(const std::vector<double>& phi, double dx, bool periodic) {
  const std::size_t n = phi.size();
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double left, right;
    if (periodic) {
      left = phi[(i + n - 1) % n];
      right = phi[(i + 1) % n];
    } else {
      if (i == 0 || i + 1 == n) continue;
      left = phi[i - 1];
      right = phi[i + 1];
    }
    m = std::max(m, -(right - left) / (2.0 * dx));
  }
  return m;
}

inline BurgersRun burgers_direct_solve(const BurgersProblem& p, int grid_n, double t_end, double cfl,
                                       const BurgersSolveOptions& opt = {}) {
  if (grid_n < 64) fail(ErrorKind::InvalidParameter, "grid_n must be at least 64");
  if (!(cfl > 0.0 && cfl <= 0.9)) fail(ErrorKind::CflViolation, "cfl must lie in (0, 0.9]");
  if (!(t_end >= -1.0)) fail(ErrorKind::InvalidParameter, "t_end must be at least -1");

  const int g = detail::BurgersGrid::ghosts;
  const bool periodic = p.boundary == BurgersBoundary::Periodic;
  BurgersRun run;
  run.dx = (p.x_hi - p.x_lo) / grid_n;
  run.x.resize(std::size_t(grid_n));
  for (int i = 0; i < grid_n; ++i) run.x[std::size_t(i)] = p.x_lo + (i + 0.5) * run.dx;

  const std::size_t total = std::size_t(grid_n + 2 * g);
  std::vector<double> phi(total, 0.0), label(total, 0.0);
  for (int i = 0; i < grid_n; ++i) {
    phi[std::size_t(i + g)] = p.profile.f(run.x[std::size_t(i)]);
    label[std::size_t(i + g)] = run.x[std::size_t(i)];
  }

  detail::BurgersGrid grid(grid_n, p.boundary);
  grid.set_label_period(p.x_hi - p.x_lo);
  std::vector<double> k(total, 0.0), q1(total), q2(total), ku(total, 0.0), u1(total), u2(total);

  auto interior = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + g, v.begin() + g + grid_n);
  };
  auto record = [&](double t) {
    const auto in = interior(phi);
    run.times.push_back(t);
    run.max_neg_slope.push_back(max_negative_slope(in, run.dx, periodic));
  };

  std::vector<double> snaps = opt.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;
  auto take_snapshots = [&](double t) {
    while (next_snap < snaps.size() && snaps[next_snap] <= t + 1e-12) {
      run.snapshots.push_back({t, interior(phi), opt.track_label ? interior(label) : std::vector<double>{}});
      ++next_snap;
    }
  };

  double t = -1.0;
  record(t);
  take_snapshots(t);

  auto ssp_stage = [&](std::vector<double>& src_phi, std::vector<double>& src_u) {
    grid.flux_divergence(src_phi, run.dx, k);
    if (opt.track_label) grid.label_rate(src_phi, src_u, run.dx, ku);
  };

  while (t < t_end - 1e-14) {
    double vmax = 0.0;
    for (int i = g; i < g + grid_n; ++i) vmax = std::max(vmax, std::abs(phi[std::size_t(i)]));
    double dt = cfl * run.dx / std::max(vmax, 1e-12);
    dt = std::min(dt, t_end - t);
    if (next_snap < snaps.size() && snaps[next_snap] > t) dt = std::min(dt, snaps[next_snap] - t);

    const double half_damp = std::exp(-0.5 * p.a * dt);
    for (auto& v : phi) v *= half_damp;

    ssp_stage(phi, label);
    for (std::size_t i = 0; i < total; ++i) {
      q1[i] = phi[i] + dt * k[i];
      u1[i] = label[i] + dt * ku[i];
    }
    ssp_stage(q1, u1);
    for (std::size_t i = 0; i < total; ++i) {
      q2[i] = 0.75 * phi[i] + 0.25 * (q1[i] + dt * k[i]);
      u2[i] = 0.75 * label[i] + 0.25 * (u1[i] + dt * ku[i]);
    }
    ssp_stage(q2, u2);
    for (std::size_t i = 0; i < total; ++i) {
      phi[i] = phi[i] / 3.0 + 2.0 / 3.0 * (q2[i] + dt * k[i]);
      label[i] = label[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dt * ku[i]);
    }

    for (auto& v : phi) v *= half_damp;
    t += dt;

    for (int i = g; i < g + grid_n; ++i) {
      if (!std::isfinite(phi[std::size_t(i)])) {
        std::ostringstream os;
        os << "non-finite field after t=" << run.t_final;
        fail(ErrorKind::NonFiniteField, os.str());
      }
    }
    run.t_final = t;
    record(t);
    take_snapshots(t);
  }
  run.t_final = t;
  return run;
}

// ---------------------------------------------------------------------------
// Blow-up time from a slope series

struct BlowupEstimate {
  double t_star_estimate;
  double window_lo;
  double window_hi;
  double residual_rms;
};

namespace detail {

// Root of the fitted model for rho(t) = r(t) e^{-a(t+1)} = alpha + beta X(t),
// X = e^{-a(t+1)} - 1 (or t + 1 when a = 0).
inline double fitted_root(const std::vector<double>& t, const std::vector<double>& slope, double a,
                          std::size_t lo, std::size_t hi, double* rms = nullptr) {
  std::vector<double> X, Y;
  for (std::size_t i = lo; i < hi; ++i) {
    const double s = t[i] + 1.0;
    const double r = 1.0 / slope[i];
    X.push_back(a == 0.0 ? s : std::expm1(-a * s));
    Y.push_back(a == 0.0 ? r : r * std::exp(-a * s));
  }
  const auto fit = numerics::fit_line(X, Y);
  if (rms) *rms = fit.residual_rms;
  if (!(fit.beta < 0.0 && a == 0.0) && !(a != 0.0 && fit.beta * a > 0.0))
    fail(ErrorKind::NoBlowupTrend, "reciprocal slope is not decreasing toward zero");
  if (a == 0.0) return -fit.alpha / fit.beta - 1.0;
  const double arg = 1.0 - fit.alpha / fit.beta;  // e^{-a(t+1)} at the root
  if (!(arg > 0.0)) fail(ErrorKind::NoBlowupTrend, "fitted reciprocal slope never reaches zero");
  return -std::log(arg) / a - 1.0;
}

}  // namespace detail

/// Fits the reciprocal of the max negative slope to the exact shape of the
/// closed-form mu and returns its zero. The window is the spread of the roots
/// fitted separately on the first and second halves of the series.
inline BlowupEstimate estimate_blowup_time(const std::vector<double>& times,
                                           const std::vector<double>& slopes, double a) {
  const std::size_t n = times.size();
  if (n < 10 || slopes.size() != n)
    fail(ErrorKind::NoBlowupTrend, "need at least 10 samples of the slope series");
  for (std::size_t i = 0; i < n; ++i)
    if (!(slopes[i] > 0.0) || !std::isfinite(slopes[i]))
      fail(ErrorKind::NoBlowupTrend, "slope series must be positive and finite");
  if (!(slopes.back() > slopes.front()))
    fail(ErrorKind::NoBlowupTrend, "slope series is not increasing");

  BlowupEstimate est{};
  est.t_star_estimate = detail::fitted_root(times, slopes, a, 0, n, &est.residual_rms);
  const double first = detail::fitted_root(times, slopes, a, 0, n / 2);
  const double second = detail::fitted_root(times, slopes, a, n / 2, n);
  est.window_lo = std::min({first, second, est.t_star_estimate});
  est.window_hi = std::max({first, second, est.t_star_estimate});
  return est;
}

/// Convenience: estimate from a direct run, keeping samples whose slope lies
/// in [lo_factor*c, hi_factor*c] so the fit sees the resolved steepening only.
inline BlowupEstimate estimate_from_run(const BurgersRun& run, double a, double c, double lo_factor,
                                        double hi_factor) {
  std::vector<double> t, s;
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    const double v = run.max_neg_slope[i];
    if (v >= lo_factor * c && v <= hi_factor * c) {
      t.push_back(run.times[i]);
      s.push_back(v);
    }
  }
  return estimate_blowup_time(t, s, a);
}

}  // namespace charshock
