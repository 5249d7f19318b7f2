#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "charshock/acoustic_geometry.hpp"
#include "charshock/eos.hpp"
#include "charshock/errors.hpp"
#include "charshock/numerics.hpp"

namespace charshock {

/// Seeds on s in [0, 1]: phi1 shapes d_t phi, phi2 is the forcing of the
/// profile ODE. Both are taken to vanish outside [0, 1].
struct SeedProfiles {
  std::string name = "custom";
  std::function<double(double)> phi1 = [](double) { return 0.0; };
  std::function<double(double)> dphi1;  // optional closed-form derivative
  std::function<double(double)> phi2 = [](double) { return 0.0; };
  double delta = 0.1;
  double c_analytic = 0.0;  // max d_s phi1 when known, else 0

  double phi1_slope(double s) const {
    if (dphi1) return dphi1(s);
    const double h = 1e-5;
    return (phi1(s + h) - phi1(s - h)) / (2 * h);
  }
};

/// phi1(s) = -(c/pi) sin^7(pi s) cos(pi s): smooth, compactly supported in
/// [0, 1], with max d_s phi1 = c at s = 1/2.
inline SeedProfiles bump_seeds(double c, double delta) {
  const double pi = std::numbers::pi;
  SeedProfiles s;
  s.name = "bump";
  s.delta = delta;
  s.c_analytic = c;
  s.phi1 = [c, pi](double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double sn = std::sin(pi * x);
    return -c / pi * std::pow(sn, 7) * std::cos(pi * x);
  };
  s.dphi1 = [c, pi](double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double sn = std::sin(pi * x), cs = std::cos(pi * x);
    return -c * std::pow(sn, 6) * (7.0 * cs * cs - sn * sn);
  };
  return s;
}

inline SeedProfiles zero_seeds(double delta) {
  SeedProfiles s;
  s.name = "zero";
  s.delta = delta;
  return s;
}

/// max_s d_s phi1 from samples.
inline double seed_max_slope(const SeedProfiles& seeds, int n = 4096) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) m = std::max(m, seeds.phi1_slope(double(i) / n));
  return m;
}

struct Phi0Profile {
  std::vector<double> s;
  std::vector<double> phi0;
  std::vector<double> dphi0;
};

namespace detail {

// phi0 and phi0' at increasing abscissae s_k >= 0 from
//   phi0'' = phi1' + delta phi2,  phi0(0) = phi0'(0) = 0,
// i.e. phi0' = phi1 - phi1(0) + delta I(s), phi0 = int (phi1 - phi1(0)) + delta (s I - J)
// with I = int phi2, J = int sigma phi2.
inline Phi0Profile integrate_profile(const SeedProfiles& seeds, const std::vector<double>& s_values) {
  Phi0Profile out;
  out.s = s_values;
  out.phi0.resize(s_values.size());
  out.dphi0.resize(s_values.size());
  const double p10 = seeds.phi1(0.0);
  auto f1 = [&](double x) { return seeds.phi1(x) - p10; };
  auto f2 = [&](double x) { return seeds.phi2(x); };
  auto f3 = [&](double x) { return x * seeds.phi2(x); };
  double prev = 0.0, A = 0.0, I = 0.0, J = 0.0;
  for (std::size_t k = 0; k < s_values.size(); ++k) {
    const double s = s_values[k];
    if (s < prev) fail(ErrorKind::InvalidParameter, "profile abscissae must be increasing");
    if (s > prev) {
      A += numerics::integrate(f1, prev, s, 1e-15).value;
      I += numerics::integrate(f2, prev, s, 1e-15).value;
      J += numerics::integrate(f3, prev, s, 1e-15).value;
      prev = s;
    }
    out.phi0[k] = A + seeds.delta * (s * I - J);
    out.dphi0[k] = seeds.phi1(s) - p10 + seeds.delta * I;
  }
  return out;
}

}  // namespace detail

inline Phi0Profile solve_seed_ode(const SeedProfiles& seeds, int s_grid_n) {
  if (s_grid_n < 128) fail(ErrorKind::InvalidParameter, "s_grid_n must be at least 128");
  std::vector<double> s(std::size_t(s_grid_n) + 1);
  for (int i = 0; i <= s_grid_n; ++i) s[std::size_t(i)] = double(i) / s_grid_n;
  return detail::integrate_profile(seeds, s);
}

enum class WidthMode { Delta, DeltaSquared };

inline std::string to_string(WidthMode m) { return m == WidthMode::Delta ? "delta" : "delta_squared"; }

inline double annulus_width(double delta, WidthMode mode) {
  if (!(delta > 0.0 && delta < 1.0)) fail(ErrorKind::InvalidWidth, "pulse amplitude must lie in (0, 1)");
  return mode == WidthMode::Delta ? delta : delta * delta;
}

struct ShortPulseData {
  std::vector<double> r_grid;
  Phi0Profile phi0_profile;
  std::vector<double> phi_at_minus2;
  std::vector<double> dtphi_at_minus2;
  double delta = 0.0;
  double width = 0.0;
  WidthMode width_mode = WidthMode::Delta;
};

/// Initial fields at t = -2 sampled on arbitrary increasing radii: phi =
/// delta^2 phi0((r-2)/delta), d_t phi = delta phi1((r-2)/delta) inside the
/// annulus [2, 2 + width], zero elsewhere.
struct AnnulusFields {
  std::vector<double> phi, dtphi;
};

inline AnnulusFields annulus_fields(const SeedProfiles& seeds, const std::vector<double>& r,
                                    WidthMode mode) {
  const double w = annulus_width(seeds.delta, mode);
  const double d = seeds.delta;
  std::vector<double> s_in;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] >= 2.0 && r[i] <= 2.0 + w) {
      s_in.push_back((r[i] - 2.0) / d);
      idx.push_back(i);
    }
  }
  AnnulusFields out{std::vector<double>(r.size(), 0.0), std::vector<double>(r.size(), 0.0)};
  const auto prof = detail::integrate_profile(seeds, s_in);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.phi[idx[k]] = d * d * prof.phi0[k];
    out.dtphi[idx[k]] = d * seeds.phi1(s_in[k]);
  }
  return out;
}

inline ShortPulseData build_annulus_data(const SeedProfiles& seeds, int r_grid_n,
                                         WidthMode mode = WidthMode::Delta) {
  if (r_grid_n < 256) fail(ErrorKind::InvalidParameter, "r_grid_n must be at least 256");
  ShortPulseData data;
  data.delta = seeds.delta;
  data.width_mode = mode;
  data.width = annulus_width(seeds.delta, mode);
  data.r_grid.resize(std::size_t(r_grid_n) + 1);
  for (int i = 0; i <= r_grid_n; ++i) data.r_grid[std::size_t(i)] = 2.0 + data.width * i / r_grid_n;
  const auto f = annulus_fields(seeds, data.r_grid, mode);
  data.phi_at_minus2 = f.phi;
  data.dtphi_at_minus2 = f.dtphi;
  data.phi0_profile = solve_seed_ode(seeds, std::max(r_grid_n, 128));
  return data;
}

struct NullDerivativeReport {
  double sup_second_null = 0.0;  // sup |(d_t - d_r)^2 phi|
  double ratio = 0.0;            // sup / delta
  double sup_null_dt = 0.0;      // sup |(d_t - d_r) d_t phi|
  double sup_null_dr = 0.0;      // sup |(d_t - d_r) d_r phi|
  double error_estimate = 0.0;
};

/// Null derivatives of the initial data, with d_t^2 phi taken from the radial
/// wave equation. Derivatives are 4th-order differences on a grid padded by
/// zeros; the error estimate is the gap to the 2nd-order stencils.
inline NullDerivativeReport null_derivative_ratio(const ShortPulseData& data, const EquationOfState& eos,
                                                  double damping = 0.0) {
  const std::size_t n = data.r_grid.size();
  if (n < 5) fail(ErrorKind::InvalidParameter, "annulus grid too small");
  const double dr = data.r_grid[1] - data.r_grid[0];
  const std::size_t pad = 2;
  std::vector<double> phi(n + 2 * pad, 0.0), pt(n + 2 * pad, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    phi[i + pad] = data.phi_at_minus2[i];
    pt[i + pad] = data.dtphi_at_minus2[i];
  }
  // when the annulus is cut at width delta^2 the data does not vanish at the
  // outer edge, so the padding is only valid on the inner side
  const bool clean_outer = data.width_mode == WidthMode::Delta;

  NullDerivativeReport rep;
  double est = 0.0;
  for (std::size_t j = pad; j < n + pad; ++j) {
    if (!clean_outer && j + 2 >= n + pad) break;
    const double r = data.r_grid[j - pad];
    const double* f = &phi[j];
    const double* g = &pt[j];
    auto eval = [&](double phi_r, double phi_rr, double phi_tr) {
      const double h = enthalpy(f[0], g[0], phi_r, damping);
      const double e2 = eos.eval(h).eta_sq;
      const double ptt = radial_phi_tt(r, g[0], phi_r, phi_rr, phi_tr, e2, damping);
      return std::array<double, 3>{ptt - 2 * phi_tr + phi_rr, ptt - phi_tr, phi_tr - phi_rr};
    };
    const auto q4 = eval(numerics::d1_central4(f, dr), numerics::d2_central4(f, dr),
                         numerics::d1_central4(g, dr));
    const auto q2 = eval((f[1] - f[-1]) / (2 * dr), (f[1] - 2 * f[0] + f[-1]) / (dr * dr),
                         (g[1] - g[-1]) / (2 * dr));
    rep.sup_second_null = std::max(rep.sup_second_null, std::abs(q4[0]));
    rep.sup_null_dt = std::max(rep.sup_null_dt, std::abs(q4[1]));
    rep.sup_null_dr = std::max(rep.sup_null_dr, std::abs(q4[2]));
    est = std::max(est, std::abs(q4[0] - q2[0]));
  }
  rep.error_estimate = est;
  rep.ratio = rep.sup_second_null / data.delta;
  if (rep.sup_second_null > 0.0 && est > rep.sup_second_null)
    fail(ErrorKind::GridTooCoarse, "difference error estimate exceeds the measured null derivative");
  return rep;
}

}  // namespace charshock
