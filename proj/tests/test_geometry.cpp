#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "charshock/acoustic_geometry.hpp"
#include "charshock/eos.hpp"

using namespace charshock;

namespace {

FluidPointState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), eta(0.2, 3.0), mu(0.0, 2.0);
  FluidPointState s;
  s.eta = eta(rng);
  Vec3 dir{u(rng), u(rng), u(rng)};
  double n = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
  const double speed = 0.95 * s.eta * std::abs(u(rng));
  for (std::size_t i = 0; i < 3; ++i) s.v[i] = speed * dir[i] / n;
  Vec3 t{u(rng), u(rng), u(rng)};
  n = std::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2]);
  for (std::size_t i = 0; i < 3; ++i) s.That[i] = t[i] / n;
  s.mu = mu(rng);
  return s;
}

}  // namespace

TEST(Metric, RestStateIsMinkowski) {
  const auto m = assemble_metric(FluidPointState{});
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) {
      const double want = a == b ? (a == 0 ? -1.0 : 1.0) : 0.0;
      EXPECT_EQ(m.g[a][b], want);
      EXPECT_EQ(m.g_inv[a][b], want);
    }
}

TEST(Metric, DisplayedEntries) {
  FluidPointState s;
  s.v = {0.3, 0.0, 0.0};
  const auto m = assemble_metric(s);
  EXPECT_NEAR(m.g[0][0], -0.91, 1e-15);
  EXPECT_NEAR(m.g[0][1], -0.3, 1e-15);
  EXPECT_NEAR(m.g[1][0], -0.3, 1e-15);
}

TEST(Metric, DegenerateSoundSpeedThrows) {
  FluidPointState s;
  s.eta = 0.0;
  try {
    assemble_metric(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateSoundSpeed);
  }
}

TEST(MetricProperty, InverseAgreesWithNumericInversion) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 2000; ++k) {
    const auto s = random_state(rng);
    const auto m = assemble_metric(s);
    Eigen::Matrix4d g;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) g(a, b) = m.g[std::size_t(a)][std::size_t(b)];
    const Eigen::Matrix4d gi = g.inverse();
    const auto prod = multiply(m.g, m.g_inv);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const double scale = std::max(1.0, std::abs(gi(a, b)));
        EXPECT_NEAR(m.g_inv[std::size_t(a)][std::size_t(b)], gi(a, b), 1e-12 * scale);
        EXPECT_NEAR(prod[std::size_t(a)][std::size_t(b)], a == b ? 1.0 : 0.0, 1e-12);
      }
  }
}

TEST(Frames, RestStateHandValues) {
  const auto f = build_frames(FluidPointState{});
  EXPECT_EQ(f.L, (Vec4{1, -1, 0, 0}));
  EXPECT_EQ(f.N, (Vec4{1, 0, 0, 0}));
  EXPECT_EQ(f.T, (Vec4{0, 1, 0, 0}));
  const auto m = assemble_metric(FluidPointState{});
  EXPECT_EQ(contract(m.g, f.L, f.T), -1.0);
}

TEST(Frames, DegenerateAtZeroMu) {
  FluidPointState s;
  s.mu = 0.0;
  s.v = {0.1, -0.2, 0.05};
  const auto f = build_frames(s);
  const auto m = assemble_metric(s);
  EXPECT_NEAR(contract(m.g, f.L, f.Lbar), 0.0, 1e-15);
  EXPECT_THROW(build_frames(FluidPointState{{0, 0, 0}, 1.0, -0.1, {1, 0, 0}}), Error);
}

// every frame identity over random subsonic states
TEST(FramesProperty, IdentitiesHold) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10000; ++k) {
    const auto s = random_state(rng);
    const auto m = assemble_metric(s);
    const auto f = build_frames(s);
    const double scale = 1.0 + s.eta * s.eta + s.mu * s.mu;
    EXPECT_NEAR(contract(m.g, f.L, f.L), 0.0, 1e-12 * scale);
    EXPECT_NEAR(contract(m.g, f.Lbar, f.Lbar), 0.0, 1e-12 * scale * (1 + f.kappa * f.kappa));
    EXPECT_NEAR(contract(m.g, f.L, f.T), -s.mu, 1e-12 * scale);
    EXPECT_NEAR(contract(m.g, f.T, f.T), f.kappa * f.kappa, 1e-12 * scale);
    EXPECT_NEAR(contract(m.g, f.L, f.Lbar), -2.0 * s.mu, 1e-12 * scale);
    EXPECT_NEAR(contract(m.g, f.N, f.N), -s.eta * s.eta, 1e-12 * scale);
    EXPECT_EQ(f.L[0], 1.0);
    EXPECT_EQ(f.N[0], 1.0);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(f.L[i + 1], f.N[i + 1] - s.eta * s.That[i], 1e-15);
  }
}

TEST(Jacobian, ProductAndDegeneracy) {
  FluidPointState s;
  EXPECT_EQ(jacobian_factor(s, 4.0), 4.0);
  s.mu = 0.0;
  EXPECT_EQ(jacobian_factor(s, 4.0), 0.0);
  s.mu = 0.5;
  s.eta = 2.0;
  EXPECT_EQ(jacobian_factor(s, 3.0), 0.75);
  EXPECT_THROW(jacobian_factor(s, 0.0), Error);
}

TEST(Jacobian, BurgersDirectionsAreInverse) {
  for (double mu : {0.1, 0.5, 1.0, 3.0})
    EXPECT_NEAR(burgers_jacobian_label_to_position(mu) * burgers_jacobian_position_to_label(mu), 1.0, 1e-15);
  EXPECT_THROW(burgers_jacobian_position_to_label(0.0), Error);
}

// eta^2 g^{ab} d_a d_b phi from 3D Cartesian differences against the radial
// reduction, for a radial test function off the solution manifold.
TEST(WaveOperator, CartesianContractionMatchesRadialReduction) {
  const auto eos = make_polytropic(2.0);
  const double A = 0.05, r0 = 1.3;
  auto phi = [&](double t, double r) { return A * std::exp(-(r - r0) * (r - r0)) * std::cos(t); };
  auto phi3 = [&](double t, double x, double y, double z) { return phi(t, std::sqrt(x * x + y * y + z * z)); };
  const double t0 = 0.4, X[3] = {0.7, -0.5, 0.6};
  const double r = std::sqrt(X[0] * X[0] + X[1] * X[1] + X[2] * X[2]);

  // exact radial derivatives
  const double g = std::exp(-(r - r0) * (r - r0));
  const double gr = -2 * (r - r0) * g, grr = (4 * (r - r0) * (r - r0) - 2) * g;
  const double p = A * g * std::cos(t0), pt = -A * g * std::sin(t0), pr = A * gr * std::cos(t0);
  const double prr = A * grr * std::cos(t0), ptr = -A * gr * std::sin(t0), ptt = -p;
  const double e2 = eos.eval(enthalpy(p, pt, pr, 0.0)).eta_sq;
  const double radial = radial_phi_tt(r, pt, pr, prr, ptr, e2, 0.0) - ptt;

  auto residual = [&](double eps) {
    auto at = [&](int a, double da, int b, double db) {
      double c[4] = {t0, X[0], X[1], X[2]};
      c[a] += da;
      c[b] += db;
      return phi3(c[0], c[1], c[2], c[3]);
    };
    Mat4 H{};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        H[std::size_t(a)][std::size_t(b)] =
            (at(a, eps, b, eps) - at(a, eps, b, -eps) - at(a, -eps, b, eps) + at(a, -eps, b, -eps)) / (4 * eps * eps);
      }
    FluidPointState s;
    for (int i = 0; i < 3; ++i) {
      const double d = (at(i + 1, eps, 0, 0) - at(i + 1, -eps, 0, 0)) / (2 * eps);
      s.v[std::size_t(i)] = -d;
    }
    s.eta = std::sqrt(e2);
    return std::abs(e2 * wave_operator(assemble_metric(s).g_inv, H) - radial);
  };
  const double r1 = residual(2e-3), r2 = residual(1e-3);
  EXPECT_LT(r1, 1e-5);
  EXPECT_GT(r1 / r2, 3.0);  // second order
}
