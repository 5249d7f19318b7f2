#pragma once

#include <array>
#include <cmath>

#include "charshock/errors.hpp"

namespace charshock {

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

/// Pointwise fluid state: velocity v = -grad(phi), sound speed eta, inverse
/// foliation density mu and the unit spatial direction That.
struct FluidPointState {
  Vec3 v{0.0, 0.0, 0.0};
  double eta = 1.0;
  double mu = 1.0;
  Vec3 That{1.0, 0.0, 0.0};
};

struct MetricPair {
  Mat4 g;
  Mat4 g_inv;
};

struct FrameSet {
  Vec4 L, N, T, Lbar;
  double kappa;
};

inline MetricPair assemble_metric(const FluidPointState& s) {
  if (!(s.eta > 0.0)) fail(ErrorKind::DegenerateSoundSpeed, "sound speed must be positive");
  const double e2 = s.eta * s.eta;
  const double v2 = s.v[0] * s.v[0] + s.v[1] * s.v[1] + s.v[2] * s.v[2];
  MetricPair m{};
  m.g[0][0] = -e2 + v2;
  m.g_inv[0][0] = -1.0 / e2;
  for (int i = 0; i < 3; ++i) {
    m.g[0][i + 1] = m.g[i + 1][0] = -s.v[std::size_t(i)];
    m.g_inv[0][i + 1] = m.g_inv[i + 1][0] = -s.v[std::size_t(i)] / e2;
    for (int j = 0; j < 3; ++j) {
      m.g[i + 1][j + 1] = (i == j) ? 1.0 : 0.0;
      m.g_inv[i + 1][j + 1] = ((i == j) ? 1.0 : 0.0) - s.v[std::size_t(i)] * s.v[std::size_t(j)] / e2;
    }
  }
  return m;
}

inline double contract(const Mat4& g, const Vec4& X, const Vec4& Y) {
  double s = 0.0;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) s += g[a][b] * X[a] * Y[b];
  return s;
}

inline Mat4 multiply(const Mat4& A, const Mat4& B) {
  Mat4 C{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 4; ++k) C[i][j] += A[i][k] * B[k][j];
  return C;
}

/// N = d_t - grad(phi) = (1, v); L = N - eta That; T = kappa That with
/// kappa = mu/eta; Lbar = (kappa/eta) L + 2T.
inline FrameSet build_frames(const FluidPointState& s) {
  if (!(s.eta > 0.0)) fail(ErrorKind::DegenerateSoundSpeed, "sound speed must be positive");
  if (s.mu < 0.0) fail(ErrorKind::InvalidParameter, "mu must be non-negative");
  FrameSet f{};
  f.kappa = s.mu / s.eta;
  f.N = {1.0, s.v[0], s.v[1], s.v[2]};
  f.L[0] = 1.0;
  f.T[0] = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    f.L[i + 1] = s.v[i] - s.eta * s.That[i];
    f.T[i + 1] = f.kappa * s.That[i];
  }
  for (std::size_t a = 0; a < 4; ++a) f.Lbar[a] = f.kappa / s.eta * f.L[a] + 2.0 * f.T[a];
  return f;
}

/// Jacobian of (t, u, theta) -> rectangular coordinates.
inline double jacobian_factor(const FluidPointState& s, double sqrt_det_angular) {
  if (!(sqrt_det_angular > 0.0))
    fail(ErrorKind::InvalidParameter, "angular volume factor must be positive");
  if (!(s.eta > 0.0)) fail(ErrorKind::DegenerateSoundSpeed, "sound speed must be positive");
  return s.mu / s.eta * sqrt_det_angular;
}

/// One-dimensional analogues for Burgers flow: d(t,x)/d(t,u) = mu and its
/// inverse d(t,u)/d(t,x) = du/dx = 1/mu.
inline double burgers_jacobian_label_to_position(double mu) { return mu; }

inline double burgers_jacobian_position_to_label(double mu) {
  if (!(mu > 0.0)) fail(ErrorKind::NonPositiveMu, "the label map is singular once mu reaches zero");
  return 1.0 / mu;
}

/// g^{ab} d_a d_b phi for a spacetime Hessian.
inline double wave_operator(const Mat4& g_inv, const Mat4& hessian) {
  double s = 0.0;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) s += g_inv[a][b] * hessian[a][b];
  return s;
}

/// Radial reduction of g^{ab} d_a d_b phi = (a/eta^2)(d_t phi - |grad phi|^2)
/// solved for d_t^2 phi, with v_r = -d_r phi.
inline double radial_phi_tt(double r, double phi_t, double phi_r, double phi_rr, double phi_tr,
                            double eta_sq, double damping) {
  return 2.0 * phi_r * phi_tr + eta_sq * (phi_rr + 2.0 * phi_r / r) - phi_r * phi_r * phi_rr -
         damping * (phi_t - phi_r * phi_r);
}

/// Enthalpy h = d_t phi - |grad phi|^2 / 2 + a phi.
inline double enthalpy(double phi, double phi_t, double phi_r, double damping) {
  return phi_t - 0.5 * phi_r * phi_r + damping * phi;
}

}  // namespace charshock
