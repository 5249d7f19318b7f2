#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "charshock/acoustic_geometry.hpp"
#include "charshock/burgers.hpp"
#include "charshock/eos.hpp"
#include "charshock/errors.hpp"
#include "charshock/numerics.hpp"
#include "charshock/radial_solver.hpp"

namespace charshock {

// ---------------------------------------------------------------------------
// Semi-analytic predictor

/// int_{-2}^{t} e^{-a(tau+2)} / (-tau) d tau, the weight that multiplies
/// L mu(-2) in the leading-order evolution of mu.
inline double a1_integral(double t, double a) {
  if (!(t < 0.0)) fail(ErrorKind::SingularEndpoint, "the integrand is singular at t = 0");
  if (!(t >= -2.0)) fail(ErrorKind::InvalidParameter, "integration starts at t = -2");
  if (!std::isfinite(a)) fail(ErrorKind::InvalidParameter, "damping must be finite");
  auto f = [a](double tau) { return std::exp(-a * (tau + 2.0)) / (-tau); };
  return numerics::integrate(f, -2.0, t, 1e-14, 1e-15).value;
}

inline double predict_mu(double t, double Lmu_initial, double a) {
  if (t == -2.0) return 1.0;
  return 1.0 + 2.0 * a1_integral(t, a) * Lmu_initial;
}

/// Time at which coefficient * c * A1(t) = 1, i.e. the zero of
/// 1 + coefficient * c * int_{-2}^{t} e^{-a(tau+2)}/tau d tau. The default
/// coefficient 4 is the one in the stated shock-time condition; for a
/// polytropic law the leading-order coefficient is -dH/dh(0) = gamma + 1.
inline double shock_time_3d(double c, double a, double sigma = -0.1, double coefficient = 4.0) {
  if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorKind::InvalidParameter, "c must be positive");
  if (!(sigma < 0.0 && sigma > -2.0)) fail(ErrorKind::InvalidParameter, "sigma must lie in (-2, 0)");
  if (!(coefficient > 0.0)) fail(ErrorKind::InvalidParameter, "coefficient must be positive");
  auto residual = [&](double t) { return 1.0 - coefficient * c * a1_integral(t, a); };
  if (residual(sigma) > 0.0) {
    std::ostringstream os;
    os << "mu stays positive up to sigma=" << sigma << " for c=" << c << ", a=" << a;
    fail(ErrorKind::NoRootBeforeSigma, os.str());
  }
  return numerics::bisect(residual, -2.0, sigma, 1e-14);
}

enum class LargenessClass { ShockBefore, GlobalToSigma, Indeterminate };

inline std::string to_string(LargenessClass c) {
  switch (c) {
    case LargenessClass::ShockBefore: return "ShockBefore";
    case LargenessClass::GlobalToSigma: return "GlobalToSigma";
    case LargenessClass::Indeterminate: return "Indeterminate";
  }
  return "Unknown";
}

struct ShockPrediction {
  LargenessClass classification = LargenessClass::Indeterminate;
  std::optional<double> t_star;
  double a_star = 0.0;
  double c_shock = 0.0;
  double c_global = 0.0;
  double delta_band = 0.0;
  double sigma = -0.1;
  double coefficient = 4.0;
};

/// a* = coefficient * int_{-2}^{sigma} e^{-a(tau+2)}/tau d tau (always negative).
inline double a_star(double a, double sigma, double coefficient = 4.0) {
  return -coefficient * a1_integral(sigma, a);
}

inline ShockPrediction classify_largeness(double c, double a, double sigma = -0.1, double coefficient = 4.0,
                                          double delta = 0.0) {
  if (!(sigma > -2.0 && sigma < 0.0)) fail(ErrorKind::InvalidParameter, "sigma must lie in (-2, 0)");
  ShockPrediction p;
  p.sigma = sigma;
  p.coefficient = coefficient;
  p.a_star = a_star(a, sigma, coefficient);
  p.c_shock = -2.0 / p.a_star;
  p.c_global = -1.0 / (2.0 * p.a_star);
  p.delta_band = delta;
  if (c >= p.c_shock) {
    p.classification = LargenessClass::ShockBefore;
    p.t_star = shock_time_3d(c, a, sigma, coefficient);
  } else if (c <= p.c_global) {
    p.classification = LargenessClass::GlobalToSigma;
  } else {
    p.classification = LargenessClass::Indeterminate;
  }
  return p;
}

// ---------------------------------------------------------------------------
// mu from the spacing of labelled characteristics

struct SpacingMu {
  std::vector<double> mu;
  double discretization_estimate = 0.0;  // max |4th - 2nd order| over rays
};

/// mu_i = eta_i * dr/du at equally spaced labels, 4th-order differences.
inline SpacingMu mu_from_label_spacing(double label_step, const std::vector<double>& positions,
                                       const std::vector<double>& eta) {
  const std::size_t n = positions.size();
  if (n < 5) fail(ErrorKind::InvalidParameter, "need at least 5 rays for spacing differences");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(positions[i + 1] > positions[i])) {
      std::ostringstream os;
      os << "rays " << i << " and " << i + 1 << " crossed";
      fail(ErrorKind::ShockDetected, os.str());
    }
  const auto d4 = numerics::gradient4(positions, label_step);
  const auto d2 = numerics::gradient2(positions, label_step);
  SpacingMu out;
  out.mu.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.mu[i] = eta[i] * d4[i];
    out.discretization_estimate = std::max(out.discretization_estimate, std::abs(eta[i] * (d4[i] - d2[i])));
  }
  return out;
}

/// Burgers analogue: characteristics from the closed form at time t with
/// unit sound speed; compare with burgers_mu.
inline SpacingMu burgers_mu_from_rays(const BurgersProblem& p, double t, double x0_lo, double x0_hi,
                                      int ray_count) {
  const auto count = std::size_t(ray_count);
  std::vector<double> x(count), one(count, 1.0);
  const double step = (x0_hi - x0_lo) / (ray_count - 1);
  for (int i = 0; i < ray_count; ++i)
    x[std::size_t(i)] = burgers_characteristic_solve(x0_lo + i * step, t, p).x;
  return mu_from_label_spacing(step, x, one);
}

// ---------------------------------------------------------------------------
// Ray tracing over solver output

enum class RayStatus { Alive, ShockDetected, LeftDomain };

inline std::string to_string(RayStatus s) {
  switch (s) {
    case RayStatus::Alive: return "Alive";
    case RayStatus::ShockDetected: return "ShockDetected";
    case RayStatus::LeftDomain: return "LeftDomain";
  }
  return "Unknown";
}

/// Field values and first/second derivatives at a point of spacetime.
struct LocalFields {
  double phi, phi_t, phi_r, phi_rr, phi_tr, phi_tt;
};

struct TransportCoefficients {
  double m;
  double e;
};

struct RayRates {
  double r_dot;
  double mu_dot;
  double eta;
  TransportCoefficients coeffs;
};

/// dr/dt = -(eta + phi_r) and d mu/dt = m + mu e with
///   m = (mu/eta) (dH/dh d_r h / 2 + a d_r phi),
///   e = (d eta^2/dh) L h / (2 eta^2) + L(d_r phi) / eta,
/// where L = d_t + (dr/dt) d_r.
inline RayRates mu_transport_step(const LocalFields& f, const EquationOfState& eos, double a, double mu) {
  if (!(mu > 0.0)) fail(ErrorKind::NonPositiveMu, "transport needs mu > 0");
  const double h = enthalpy(f.phi, f.phi_t, f.phi_r, a);
  const auto st = eos.sound(h);
  const double r_dot = -(st.eta + f.phi_r);
  const double h_r = f.phi_tr - f.phi_r * f.phi_rr + a * f.phi_r;
  const double h_t = f.phi_tt - f.phi_r * f.phi_tr + a * f.phi_t;
  const double Lh = h_t + r_dot * h_r;
  const double L_phi_r = f.phi_tr + r_dot * f.phi_rr;
  const double d_eta_sq = -2.0 - st.dH_dh;
  RayRates out;
  out.r_dot = r_dot;
  out.eta = st.eta;
  out.coeffs.m = mu / st.eta * (0.5 * st.dH_dh * h_r + a * f.phi_r);
  out.coeffs.e = d_eta_sq * Lh / (2.0 * st.eta_sq) + L_phi_r / st.eta;
  out.mu_dot = out.coeffs.m + mu * out.coeffs.e;
  return out;
}

struct RayTracerConfig {
  int ray_count = 129;
  int step_stride = 1;        // use every k-th solver step
  int record_stride = 16;     // store a sample every k-th traced step
  double shock_mu = 0.02;     // a ray stops once mu falls to this value
  bool stop_on_shock = true;  // ask the solver to stop at the first shock
};

struct RaySample {
  double t;
  std::vector<double> r;
  std::vector<double> mu_transport;
  std::vector<double> mu_spacing;  // NaN when the spacing is undefined
  std::vector<double> mu_predicted;
  std::vector<double> mu_dot;
  std::vector<RayStatus> status;
  double spacing_error = 0.0;
};

struct RayBundle {
  std::vector<double> labels;  // u_i = r_i(-2) - 2
  double label_step = 0.0;
  std::vector<double> r;
  std::vector<double> mu;  // from transport
  std::vector<double> eta;
  std::vector<double> mu_dot;
  std::vector<double> Lmu_initial;
  std::vector<RayStatus> status;
  std::vector<RaySample> samples;
  double t = -2.0;
  std::optional<double> shock_time;  // first time a ray stopped on a shock
};

/// Spacing mu for the rays' current positions.
inline SpacingMu mu_from_spacing(const RayBundle& b) {
  std::size_t alive = 0;
  for (auto s : b.status) alive += s == RayStatus::Alive;
  if (alive < 3) fail(ErrorKind::InvalidParameter, "need at least 3 alive rays");
  return mu_from_label_spacing(b.label_step, b.r, b.eta);
}

namespace detail {

// Fields of one stored snapshot restricted to a patch of grid indices.
struct FieldPatch {
  double t = 0.0;
  std::size_t offset = 0;
  std::size_t valid_lo = 0, valid_hi = 0;  // where phi_tt is meaningful
  std::vector<double> phi, phi_t, phi_tt;
};

struct PointValues {
  // value, r-derivative, rr-derivative of phi; value, r, rr of phi_t; value, r of phi_tt
  double p, pr, prr, q, qr, qrr, w, wr;
};

}  // namespace detail

/// Integrates incoming null rays and the transport equation for mu along
/// them, consuming solver snapshots in time order.
class RayTracer {
 public:
  RayTracer(EquationOfState eos, double damping, double width, RayTracerConfig cfg = {})
      : eos_(std::move(eos)), a_(damping), width_(width), cfg_(cfg) {
    if (cfg_.ray_count < 33) fail(ErrorKind::InvalidParameter, "ray_count must be at least 33");
    if (cfg_.step_stride < 1 || cfg_.record_stride < 1) fail(ErrorKind::InvalidParameter, "strides must be positive");
  }

  const RayBundle& bundle() const { return bundle_; }
  RayBundle& bundle() { return bundle_; }

  RadialObserver observer() {
    return [this](const RadialSnapshot& s) { return observe(s); };
  }

  bool observe(const RadialSnapshot& s) {
    if (!started_) {
      start(s);
      return true;
    }
    ++calls_;
    if (calls_ % cfg_.step_stride != 0) return !halted();
    auto next = capture(s);
    step_rays(current_, next);
    current_ = std::move(next);
    ++steps_;
    if (steps_ % cfg_.record_stride == 0 || halted()) record();
    return !(cfg_.stop_on_shock && halted());
  }

  /// Record the current state even when off-stride (end of a run).
  void finish() {
    if (started_ && (bundle_.samples.empty() || bundle_.samples.back().t != bundle_.t)) record();
  }

  bool halted() const { return bundle_.shock_time.has_value() || all_gone(); }

 private:
  bool all_gone() const {
    for (auto st : bundle_.status)
      if (st == RayStatus::Alive) return false;
    return !bundle_.status.empty();
  }

  void start(const RadialSnapshot& s) {
    started_ = true;
    dr_ = s.dr;
    r_min_ = s.r_min;
    const std::size_t n = std::size_t(cfg_.ray_count);
    bundle_.labels.resize(n);
    bundle_.label_step = width_ / double(n - 1);
    bundle_.r.resize(n);
    bundle_.mu.resize(n);
    bundle_.eta.resize(n);
    bundle_.mu_dot.resize(n);
    bundle_.Lmu_initial.resize(n);
    bundle_.status.assign(n, RayStatus::Alive);
    bundle_.t = s.t;
    for (std::size_t i = 0; i < n; ++i) {
      bundle_.labels[i] = bundle_.label_step * double(i);
      bundle_.r[i] = 2.0 + bundle_.labels[i];
    }
    current_ = capture(s);
    for (std::size_t i = 0; i < n; ++i) {
      const auto f = fields_at(current_, current_, 0.0, bundle_.r[i]);
      const double eta = eos_.eval(enthalpy(f.phi, f.phi_t, f.phi_r, a_)).eta;
      bundle_.mu[i] = eta;
      bundle_.eta[i] = eta;
      const auto rates = mu_transport_step(f, eos_, a_, eta);
      bundle_.Lmu_initial[i] = rates.mu_dot;
      bundle_.mu_dot[i] = rates.mu_dot;
    }
    record();
  }

  detail::FieldPatch capture(const RadialSnapshot& s) const {
    // patch around the alive rays with room for the interpolation stencil
    double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin;
    for (std::size_t i = 0; i < bundle_.r.size(); ++i) {
      if (bundle_.status[i] != RayStatus::Alive) continue;
      rmin = std::min(rmin, bundle_.r[i]);
      rmax = std::max(rmax, bundle_.r[i]);
    }
    if (!std::isfinite(rmin)) {
      rmin = 2.0;
      rmax = 2.0 + width_;
    }
    const double pad = 8.0 * dr_ + 4.0 * (s.t - bundle_.t + 1e-12);
    auto to_index = [&](double r) { return std::floor((r - r_min_) / dr_); };
    const double lo_d = std::max(double(s.offset), to_index(rmin - pad - 2.0 * dr_ * cfg_.step_stride));
    const double hi_d = std::min(double(s.end()), to_index(rmax + pad + 2.0 * dr_ * cfg_.step_stride) + 1.0);
    detail::FieldPatch p;
    p.t = s.t;
    if (!(hi_d > lo_d)) return p;
    p.offset = std::size_t(lo_d);
    const std::size_t hi = std::size_t(hi_d);
    p.valid_lo = s.lo;
    p.valid_hi = s.hi;
    const std::size_t a = p.offset - s.offset, b = hi - s.offset;
    p.phi.assign(s.phi.begin() + long(a), s.phi.begin() + long(b));
    p.phi_t.assign(s.dtphi.begin() + long(a), s.dtphi.begin() + long(b));
    p.phi_tt.assign(s.phi_tt.begin() + long(a), s.phi_tt.begin() + long(b));
    return p;
  }

  // degree-5 Lagrange interpolation on the patch; nullopt outside
  std::optional<detail::PointValues> point_values(const detail::FieldPatch& p, long j0,
                                                  const numerics::LagrangeWeights<6>& L) const {
    if (j0 < long(p.offset) || std::size_t(j0 + 6) > p.offset + p.phi.size()) return std::nullopt;
    if (std::size_t(j0) < p.valid_lo || std::size_t(j0 + 6) > p.valid_hi) return std::nullopt;
    const std::size_t off = std::size_t(j0) - p.offset;
    const double i1 = 1.0 / dr_, i2 = i1 * i1;
    detail::PointValues v;
    v.p = L.apply(L.w, p.phi, off);
    v.pr = L.apply(L.dw, p.phi, off) * i1;
    v.prr = L.apply(L.d2w, p.phi, off) * i2;
    v.q = L.apply(L.w, p.phi_t, off);
    v.qr = L.apply(L.dw, p.phi_t, off) * i1;
    v.qrr = L.apply(L.d2w, p.phi_t, off) * i2;
    v.w = L.apply(L.w, p.phi_tt, off);
    v.wr = L.apply(L.dw, p.phi_tt, off) * i1;
    return v;
  }

  // Hermite in time between two patches, theta in [0, 1]
  LocalFields fields_at(const detail::FieldPatch& p0, const detail::FieldPatch& p1, double theta, double r) const {
    const double x = (r - r_min_) / dr_;
    const long j0 = long(std::floor(x)) - 2;
    const numerics::LagrangeWeights<6> L(x - double(j0));
    const auto v0 = point_values(p0, j0, L);
    const auto v1 = (&p0 == &p1) ? v0 : point_values(p1, j0, L);
    if (!v0 || !v1) {
      std::ostringstream os;
      os << "ray at r=" << r << " outside the stored fields";
      fail(ErrorKind::InterpolationOutOfRange, os.str());
    }
    const double h = p1.t - p0.t;
    if (h <= 0.0) return {v0->p, v0->q, v0->pr, v0->prr, v0->qr, v0->w};
    const auto phi = numerics::hermite_cubic(v0->p, v0->q, v1->p, v1->q, h, theta);
    const auto pt = numerics::hermite_cubic(v0->q, v0->w, v1->q, v1->w, h, theta);
    const auto pr = numerics::hermite_cubic(v0->pr, v0->qr, v1->pr, v1->qr, h, theta);
    const auto prr = numerics::hermite_cubic(v0->prr, v0->qrr, v1->prr, v1->qrr, h, theta);
    const auto ptr = numerics::hermite_cubic(v0->qr, v0->wr, v1->qr, v1->wr, h, theta);
    return {phi.value, pt.value, pr.value, prr.value, ptr.value, pt.derivative};
  }

  void step_rays(const detail::FieldPatch& p0, const detail::FieldPatch& p1) {
    const double h = p1.t - p0.t;
    if (h <= 0.0) return;
    const std::size_t n = bundle_.r.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (bundle_.status[i] != RayStatus::Alive) continue;
      try {
        auto rates = [&](double theta, double r, double mu) {
          return mu_transport_step(fields_at(p0, p1, theta, r), eos_, a_, mu);
        };
        const double r0 = bundle_.r[i], m0 = bundle_.mu[i];
        const auto k1 = rates(0.0, r0, m0);
        const auto k2 = rates(0.5, r0 + 0.5 * h * k1.r_dot, m0 + 0.5 * h * k1.mu_dot);
        const auto k3 = rates(0.5, r0 + 0.5 * h * k2.r_dot, m0 + 0.5 * h * k2.mu_dot);
        const auto k4 = rates(1.0, r0 + h * k3.r_dot, m0 + h * k3.mu_dot);
        bundle_.r[i] = r0 + h / 6.0 * (k1.r_dot + 2 * k2.r_dot + 2 * k3.r_dot + k4.r_dot);
        bundle_.mu[i] = m0 + h / 6.0 * (k1.mu_dot + 2 * k2.mu_dot + 2 * k3.mu_dot + k4.mu_dot);
        if (!(bundle_.mu[i] > cfg_.shock_mu)) {
          bundle_.status[i] = RayStatus::ShockDetected;
          continue;
        }
        const auto end = rates(1.0, bundle_.r[i], bundle_.mu[i]);
        bundle_.eta[i] = end.eta;
        bundle_.mu_dot[i] = end.mu_dot;
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::InterpolationOutOfRange) {
          bundle_.status[i] = RayStatus::LeftDomain;
        } else if (e.kind() == ErrorKind::NonPositiveMu) {
          bundle_.status[i] = RayStatus::ShockDetected;
        } else {
          throw;
        }
      }
    }
    bundle_.t = p1.t;
    // neighbouring rays crossing also mark a shock
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (bundle_.status[i] == RayStatus::Alive && bundle_.status[i + 1] == RayStatus::Alive &&
          !(bundle_.r[i + 1] > bundle_.r[i])) {
        bundle_.status[i] = bundle_.status[i + 1] = RayStatus::ShockDetected;
      }
    }
    for (auto st : bundle_.status)
      if (st == RayStatus::ShockDetected && !bundle_.shock_time) bundle_.shock_time = bundle_.t;
  }

  void record() {
    RaySample s;
    s.t = bundle_.t;
    s.r = bundle_.r;
    s.mu_transport = bundle_.mu;
    s.mu_dot = bundle_.mu_dot;
    s.status = bundle_.status;
    s.mu_spacing.assign(bundle_.r.size(), std::numeric_limits<double>::quiet_NaN());
    s.mu_predicted.resize(bundle_.r.size());
    const double t_pred = std::min(s.t, -1e-9);
    const double A1 = s.t <= -2.0 ? 0.0 : a1_integral(t_pred, a_);
    for (std::size_t i = 0; i < s.r.size(); ++i) s.mu_predicted[i] = 1.0 + 2.0 * A1 * bundle_.Lmu_initial[i];
    if (!all_alive_or_none_shocked()) {
      bundle_.samples.push_back(std::move(s));
      return;
    }
    try {
      const auto sm = mu_from_spacing(bundle_);
      s.mu_spacing = sm.mu;
      s.spacing_error = sm.discretization_estimate;
    } catch (const Error&) {
    }
    bundle_.samples.push_back(std::move(s));
  }

  bool all_alive_or_none_shocked() const {
    for (auto st : bundle_.status)
      if (st != RayStatus::Alive) return false;
    return true;
  }

  EquationOfState eos_;
  double a_;
  double width_;
  RayTracerConfig cfg_;
  RayBundle bundle_;
  detail::FieldPatch current_;
  bool started_ = false;
  long calls_ = 0;
  long steps_ = 0;
  double dr_ = 0.0;
  double r_min_ = 0.0;
};

// ---------------------------------------------------------------------------
// Diagnostics on a traced bundle

struct ShockRegionReport {
  double t = 0.0;
  std::vector<double> labels;  // rays with mu <= 0.1
  std::vector<double> mu_dot;
  std::vector<double> violating_labels;  // mu <= 0.1 but d mu/dt >= 0
};

inline ShockRegionReport shock_region_monitor(const RayBundle& b, const RaySample& s, double threshold = 0.1) {
  ShockRegionReport rep;
  rep.t = s.t;
  for (std::size_t i = 0; i < s.r.size(); ++i) {
    if (s.status[i] != RayStatus::Alive || !(s.mu_transport[i] <= threshold)) continue;
    rep.labels.push_back(b.labels[i]);
    rep.mu_dot.push_back(s.mu_dot[i]);
    if (s.mu_dot[i] >= 0.0) rep.violating_labels.push_back(b.labels[i]);
  }
  return rep;
}

/// True when no ray leaves the region mu <= threshold after entering it.
inline bool shock_region_is_absorbing(const RayBundle& b, double threshold = 0.1) {
  const std::size_t n = b.labels.size();
  std::vector<bool> entered(n, false);
  for (const auto& s : b.samples) {
    for (std::size_t i = 0; i < n; ++i) {
      if (s.status[i] != RayStatus::Alive) continue;
      if (s.mu_transport[i] <= threshold) entered[i] = true;
      else if (entered[i]) return false;
    }
  }
  return true;
}

/// Minimum over rays of the spacing mu (or transport mu) per sample.
struct MuTrace {
  std::vector<double> t;
  std::vector<double> min_mu_spacing;
  std::vector<double> min_mu_transport;
  std::vector<double> min_mu_predicted;
};

inline MuTrace min_mu_trace(const RayBundle& b) {
  MuTrace tr;
  for (const auto& s : b.samples) {
    double ms = std::numeric_limits<double>::infinity(), mt = ms, mp = ms;
    bool spacing_ok = true;
    for (std::size_t i = 0; i < s.r.size(); ++i) {
      if (std::isnan(s.mu_spacing[i])) spacing_ok = false;
      else ms = std::min(ms, s.mu_spacing[i]);
      mt = std::min(mt, s.mu_transport[i]);
      mp = std::min(mp, s.mu_predicted[i]);
    }
    tr.t.push_back(s.t);
    tr.min_mu_spacing.push_back(spacing_ok ? ms : std::numeric_limits<double>::quiet_NaN());
    tr.min_mu_transport.push_back(mt);
    tr.min_mu_predicted.push_back(mp);
  }
  return tr;
}

/// Shock time from fitting the minimum mu to alpha + beta A1(t) over the
/// samples with mu in [lo, hi], then solving alpha + beta A1(t) = 0.
inline double extrapolate_shock_time(const std::vector<double>& t, const std::vector<double>& mu, double a,
                                     double lo = 0.1, double hi = 0.3) {
  std::vector<double> X, Y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::isnan(mu[i]) || mu[i] < lo || mu[i] > hi || t[i] >= 0.0) continue;
    X.push_back(a1_integral(t[i], a));
    Y.push_back(mu[i]);
  }
  if (X.size() < 3) fail(ErrorKind::NoBlowupTrend, "too few samples in the fitting band");
  const auto fit = numerics::fit_line(X, Y);
  if (!(fit.beta < 0.0)) fail(ErrorKind::NoBlowupTrend, "mu is not decreasing in A1");
  const double target = -fit.alpha / fit.beta;
  auto g = [&](double tt) { return a1_integral(tt, a) - target; };
  const double hi_t = -1e-6;
  if (g(hi_t) < 0.0) fail(ErrorKind::NoBlowupTrend, "extrapolated zero lies beyond t = 0");
  return numerics::bisect(g, -2.0, hi_t, 1e-12);
}

}  // namespace charshock
