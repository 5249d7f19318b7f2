#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "charshock/acoustic_geometry.hpp"
#include "charshock/eos.hpp"
#include "charshock/errors.hpp"
#include "charshock/numerics.hpp"
#include "charshock/shortpulse.hpp"

namespace charshock {

struct RadialSolverConfig {
  double cells_per_width = 256;  // grid cells across the annulus
  double cfl = 0.5;
  double pad = 1.0;              // grid extends to 2 + width + pad
  double r_min = 0.0;            // 0 selects 0.4 |sigma|
  double sigma = -0.1;           // time horizon
  double filter_strength = 0.0;  // 6th-order Kreiss-Oliger coefficient
  bool full_domain = false;      // evolve every point instead of the light-cone window
};

/// phi and d_t phi on the uniform grid r_i = r_min + i dr.
struct RadialField {
  double t = -2.0;
  double r_min = 0.0;
  double dr = 0.0;
  std::vector<double> phi;
  std::vector<double> dtphi;

  std::size_t size() const { return phi.size(); }
  double r(std::size_t i) const { return r_min + double(i) * dr; }
};

/// What observers see after every step. The arrays cover indices
/// [offset, offset + phi.size()) of the solver grid; phi_tt is valid on
/// [lo, hi) and zero elsewhere. Outside [lo, hi) the fields are either
/// identically zero (inside the light cone of the pulse) or frozen.
struct RadialSnapshot {
  double t;
  double r_min;
  double dr;
  std::size_t lo;
  std::size_t hi;
  const std::vector<double>& phi;
  const std::vector<double>& dtphi;
  const std::vector<double>& phi_tt;
  std::size_t offset = 0;

  double r(std::size_t i) const { return r_min + double(i) * dr; }
  std::size_t end() const { return offset + phi.size(); }
};

using RadialObserver = std::function<bool(const RadialSnapshot&)>;

struct RadialSample {
  double t;
  std::vector<double> phi;
  std::vector<double> dtphi;
};

struct RadialRunSummary {
  double t_start = -2.0;
  double t_end_requested = 0.0;
  double last_good_time = -2.0;
  long steps = 0;
  std::optional<ErrorKind> failure;
  std::string message;
  bool stopped_by_observer = false;
  double max_abs_phi = 0.0;
  double max_abs_dtphi = 0.0;
  double max_abs_dr_phi = 0.0;
  double max_abs_drr_phi = 0.0;
  std::string eos;
  double damping = 0.0;
  double delta = 0.0;
  double width = 0.0;
  double dr = 0.0;
  std::size_t points = 0;
  double cfl = 0.0;
  double filter_strength = 0.0;
  bool full_domain = false;
  std::vector<RadialSample> samples;
};

/// Right-hand side of the radial system on indices [lo, hi): d phi/dt = phi_t,
/// d phi_t/dt from the contracted wave equation. Needs lo >= 2, hi <= n - 2.
inline void radial_rhs(const RadialField& f, double damping, const EquationOfState& eos, std::size_t lo,
                       std::size_t hi, std::vector<double>& dphi, std::vector<double>& ddtphi) {
  const double dr = f.dr;
  for (std::size_t i = lo; i < hi; ++i) {
    const double* p = &f.phi[i];
    const double* q = &f.dtphi[i];
    const double pr = numerics::d1_central4(p, dr);
    const double prr = numerics::d2_central4(p, dr);
    const double qr = numerics::d1_central4(q, dr);
    const double h = enthalpy(p[0], q[0], pr, damping);
    const double e2 = eos.eta_sq(h);
    dphi[i] = q[0];
    ddtphi[i] = radial_phi_tt(f.r(i), q[0], pr, prr, qr, e2, damping);
  }
}

inline RadialField radial_rhs(const RadialField& f, double damping, const EquationOfState& eos) {
  RadialField out{f.t, f.r_min, f.dr, std::vector<double>(f.size(), 0.0), std::vector<double>(f.size(), 0.0)};
  if (f.size() >= 5) radial_rhs(f, damping, eos, 2, f.size() - 2, out.phi, out.dtphi);
  return out;
}

/// Energy-like functional  int (phi_t^2 + eta^2 phi_r^2) r^2 dr.
inline double radial_energy(const RadialField& f, double damping, const EquationOfState& eos) {
  double e = 0.0;
  for (std::size_t i = 2; i + 2 < f.size(); ++i) {
    const double pr = numerics::d1_central4(&f.phi[i], f.dr);
    const double q = f.dtphi[i];
    const double e2 = eos.eta_sq(enthalpy(f.phi[i], q, pr, damping));
    const double r = f.r(i);
    e += (q * q + e2 * pr * pr) * r * r;
  }
  return e * f.dr;
}

class RadialSolver {
 public:
  RadialSolver(const SeedProfiles& seeds, WidthMode mode, double damping, EquationOfState eos,
               RadialSolverConfig cfg = {})
      : cfg_(cfg), eos_(std::move(eos)), damping_(damping), delta_(seeds.delta) {
    if (!(cfg_.cells_per_width >= 8)) fail(ErrorKind::InvalidParameter, "cells_per_width must be at least 8");
    if (!(cfg_.cfl > 0.0)) fail(ErrorKind::InvalidParameter, "cfl must be positive");
    if (!(cfg_.sigma < 0.0 && cfg_.sigma > -2.0)) fail(ErrorKind::InvalidParameter, "sigma must lie in (-2, 0)");
    if (!std::isfinite(damping)) fail(ErrorKind::InvalidParameter, "damping must be finite");
    width_ = annulus_width(seeds.delta, mode);
    const double dr = width_ / cfg_.cells_per_width;
    const double r_min_target = cfg_.r_min > 0.0 ? cfg_.r_min : 0.4 * std::abs(cfg_.sigma);
    if (r_min_target >= 2.0) fail(ErrorKind::InvalidParameter, "r_min must be below the annulus");
    // align the grid so that r = 2 is a node
    const double inner_cells = std::floor((2.0 - r_min_target) / dr);
    field_.dr = dr;
    field_.r_min = 2.0 - inner_cells * dr;
    const std::size_t n = std::size_t(inner_cells) + std::size_t(std::ceil((width_ + cfg_.pad) / dr)) + 1;
    field_.t = -2.0;
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = field_.r(i);
    auto init = annulus_fields(seeds, r, mode);
    field_.phi = std::move(init.phi);
    field_.dtphi = std::move(init.dtphi);
    for (auto* v : {&k_phi_, &k_dtphi_, &acc_phi_, &acc_dtphi_, &phi_tt_})
      v->assign(n, 0.0);
    stage_ = field_;
  }

  const RadialField& field() const { return field_; }
  const EquationOfState& eos() const { return eos_; }
  double damping() const { return damping_; }
  double width() const { return width_; }
  double delta() const { return delta_; }
  const RadialSolverConfig& config() const { return cfg_; }

  /// Index range evolved at time t.
  std::pair<std::size_t, std::size_t> active_range(double t) const {
    const std::size_t n = field_.size();
    if (cfg_.full_domain) return {2, n};
    const double dr = field_.dr;
    const double elapsed = t + 2.0;
    const double inner = 2.0 - elapsed - 16.0 * dr;
    const double outer = 2.0 + width_ - elapsed + std::max(0.5 * width_, 64.0 * dr) + 0.005 * elapsed;
    const double lo = std::floor((inner - field_.r_min) / dr);
    const double hi = std::ceil((outer - field_.r_min) / dr) + 1.0;
    return {std::size_t(std::max(2.0, lo)), std::size_t(std::clamp(hi, 3.0, double(n - 3)))};
  }

  /// Largest step permitted by the CFL bound on the current window.
  double stable_dt() const { return cfl_dt(active_range(field_.t)); }

  /// One classical RK4 step.
  void advance(double dt) {
    const double bound = stable_dt();
    if (!(dt > 0.0) || dt > bound * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "dt=" << dt << " exceeds the stable bound " << bound;
      fail(ErrorKind::CflViolation, os.str());
    }
    const auto range = active_range(field_.t);
    compute_rhs(field_, range);
    step_from_k1(dt, range);
  }

  /// Evolve to t_end, hitting each sample time exactly. Errors are caught and
  /// reported in the summary together with the last good time.
  RadialRunSummary run(double t_end, const std::vector<RadialObserver>& observers = {},
                       std::vector<double> sample_times = {}) {
    RadialRunSummary s;
    s.t_start = field_.t;
    s.t_end_requested = t_end;
    s.eos = eos_.describe();
    s.damping = damping_;
    s.delta = delta_;
    s.width = width_;
    s.dr = field_.dr;
    s.points = field_.size();
    s.cfl = cfg_.cfl;
    s.filter_strength = cfg_.filter_strength;
    s.full_domain = cfg_.full_domain;
    s.last_good_time = field_.t;
    std::sort(sample_times.begin(), sample_times.end());
    std::size_t next_sample = 0;
    while (next_sample < sample_times.size() && sample_times[next_sample] < field_.t - 1e-12) ++next_sample;

    try {
      while (true) {
        const auto range = active_range(field_.t);
        compute_rhs(field_, range);
        track_extremes(s, range);
        if (next_sample < sample_times.size() && std::abs(sample_times[next_sample] - field_.t) <= 1e-12) {
          s.samples.push_back({field_.t, field_.phi, field_.dtphi});
          ++next_sample;
        }
        const RadialSnapshot snap{field_.t, field_.r_min, field_.dr, range.first, range.second,
                                  field_.phi, field_.dtphi, phi_tt_};
        bool keep_going = true;
        for (const auto& obs : observers) keep_going = obs(snap) && keep_going;
        if (!keep_going) {
          s.stopped_by_observer = true;
          break;
        }
        if (field_.t >= t_end - 1e-13) break;

        double dt = cfl_dt(range);
        dt = std::min(dt, t_end - field_.t);
        if (next_sample < sample_times.size() && sample_times[next_sample] > field_.t)
          dt = std::min(dt, sample_times[next_sample] - field_.t);
        step_from_k1(dt, range);
        ++s.steps;
        s.last_good_time = field_.t;
      }
    } catch (const Error& e) {
      s.failure = e.kind() == ErrorKind::OutOfDomain ? ErrorKind::EosDomain : e.kind();
      std::ostringstream os;
      os << e.what() << " (last good time " << s.last_good_time << ")";
      s.message = os.str();
    }
    return s;
  }

 private:
  double cfl_dt(std::pair<std::size_t, std::size_t> range) const {
    double speed = 1.0;
    const std::size_t hi = std::min(range.second, field_.size() - 2);
    for (std::size_t i = range.first; i < hi; ++i) {
      const double pr = numerics::d1_central4(&field_.phi[i], field_.dr);
      const double e2 = eos_.eta_sq(enthalpy(field_.phi[i], field_.dtphi[i], pr, damping_));
      speed = std::max(speed, std::sqrt(e2) + std::abs(pr));
    }
    return cfg_.cfl * field_.dr / speed;
  }

  void track_extremes(RadialRunSummary& s, std::pair<std::size_t, std::size_t> range) const {
    const std::size_t hi = std::min(range.second, field_.size() - 2);
    for (std::size_t i = range.first; i < hi; ++i) {
      s.max_abs_phi = std::max(s.max_abs_phi, std::abs(field_.phi[i]));
      s.max_abs_dtphi = std::max(s.max_abs_dtphi, std::abs(field_.dtphi[i]));
      s.max_abs_dr_phi = std::max(s.max_abs_dr_phi, std::abs(numerics::d1_central4(&field_.phi[i], field_.dr)));
      s.max_abs_drr_phi = std::max(s.max_abs_drr_phi, std::abs(numerics::d2_central4(&field_.phi[i], field_.dr)));
    }
  }

  // RHS into k_phi_/k_dtphi_ over the range, including the outflow points
  // when the range reaches the outer edge; copies phi_tt for observers.
  void compute_rhs(const RadialField& f, std::pair<std::size_t, std::size_t> range) {
    const std::size_t n = f.size();
    const std::size_t lo = range.first;
    const std::size_t hi_central = std::min(range.second, n - 3);
    radial_rhs(f, damping_, eos_, lo, hi_central, k_phi_, k_dtphi_);
    if (range.second > n - 3) {
      // outgoing radiation condition d_t(r phi) + d_r(r phi) = 0 with backward differences
      for (std::size_t i = n - 3; i < n; ++i) {
        auto back = [&](const std::vector<double>& v) {
          return (25 * v[i] - 48 * v[i - 1] + 36 * v[i - 2] - 16 * v[i - 3] + 3 * v[i - 4]) / (12 * f.dr);
        };
        const double r = f.r(i);
        k_phi_[i] = -back(f.phi) - f.phi[i] / r;
        k_dtphi_[i] = -back(f.dtphi) - f.dtphi[i] / r;
      }
    }
    if (cfg_.filter_strength > 0.0) add_filter(f, lo, range.second);
    if (&f == &field_) {
      for (std::size_t i = tt_range_.first; i < tt_range_.second; ++i) phi_tt_[i] = 0.0;
      for (std::size_t i = lo; i < range.second; ++i) phi_tt_[i] = k_dtphi_[i];
      tt_range_ = range;
    }
    for (std::size_t i = lo; i < range.second; ++i)
      if (!std::isfinite(k_dtphi_[i]) || !std::isfinite(k_phi_[i]))
        fail(ErrorKind::NonFinite, "non-finite right-hand side");
  }

  void add_filter(const RadialField& f, std::size_t lo, std::size_t hi) {
    const double s = cfg_.filter_strength / (64.0 * f.dr);
    const std::size_t a = std::max<std::size_t>(lo, 3);
    const std::size_t b = std::min(hi, f.size() - 3);
    for (std::size_t i = a; i < b; ++i) {
      auto ko = [&](const std::vector<double>& u) {
        return u[i - 3] - 6 * u[i - 2] + 15 * u[i - 1] - 20 * u[i] + 15 * u[i + 1] - 6 * u[i + 2] + u[i + 3];
      };
      k_phi_[i] += s * ko(f.phi);
      k_dtphi_[i] += s * ko(f.dtphi);
    }
  }

  void step_from_k1(double dt, std::pair<std::size_t, std::size_t> range) {
    const std::size_t n = field_.size();
    const std::size_t lo = range.first, hi = range.second;
    const std::size_t sync_lo = lo >= 3 ? lo - 3 : 0;
    const std::size_t sync_hi = std::min(n, hi + 3);
    for (std::size_t i = sync_lo; i < sync_hi; ++i) {
      stage_.phi[i] = field_.phi[i];
      stage_.dtphi[i] = field_.dtphi[i];
    }
    const double t0 = field_.t;
    static constexpr double stage_c[3] = {0.5, 0.5, 1.0};
    static constexpr double weight[4] = {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6};
    for (std::size_t i = lo; i < hi; ++i) {
      acc_phi_[i] = weight[0] * k_phi_[i];
      acc_dtphi_[i] = weight[0] * k_dtphi_[i];
    }
    for (int st = 0; st < 3; ++st) {
      for (std::size_t i = lo; i < hi; ++i) {
        stage_.phi[i] = field_.phi[i] + stage_c[st] * dt * k_phi_[i];
        stage_.dtphi[i] = field_.dtphi[i] + stage_c[st] * dt * k_dtphi_[i];
      }
      stage_.t = t0 + stage_c[st] * dt;
      compute_rhs(stage_, range);
      for (std::size_t i = lo; i < hi; ++i) {
        acc_phi_[i] += weight[st + 1] * k_phi_[i];
        acc_dtphi_[i] += weight[st + 1] * k_dtphi_[i];
      }
    }
    for (std::size_t i = lo; i < hi; ++i) {
      field_.phi[i] += dt * acc_phi_[i];
      field_.dtphi[i] += dt * acc_dtphi_[i];
      if (!std::isfinite(field_.phi[i]) || !std::isfinite(field_.dtphi[i]))
        fail(ErrorKind::NonFinite, "non-finite field");
    }
    field_.t = t0 + dt;
  }

  RadialSolverConfig cfg_;
  EquationOfState eos_;
  double damping_;
  double delta_;
  double width_ = 0.0;
  RadialField field_;
  RadialField stage_;
  std::vector<double> k_phi_, k_dtphi_, acc_phi_, acc_dtphi_, phi_tt_;
  std::pair<std::size_t, std::size_t> tt_range_{0, 0};
};

}  // namespace charshock
