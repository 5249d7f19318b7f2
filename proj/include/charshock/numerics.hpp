#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <string>
#include <vector>

#include "charshock/errors.hpp"

namespace charshock::numerics {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
};

namespace detail {

// 15-point Kronrod abscissae on [0,1]; the odd indices are the 7-point Gauss nodes.
inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo, hi, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment gauss_kronrod_15(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double f_center = f(center);
  double kronrod = f_center * kronrod_weights[7];
  double gauss = f_center * gauss_weights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kronrod_nodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kronrod_weights[j] * pair;
    if (j % 2 == 1) gauss += gauss_weights[j / 2] * pair;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature. Bisects the interval
/// with the largest error estimate until the summed estimate is below
/// max(abs_tol, rel_tol*|I|).
template <class F>
QuadratureResult integrate(F&& f, double lo, double hi, double abs_tol = 1e-13,
                           double rel_tol = 0.0, int max_segments = 4000) {
  if (lo == hi) return {};
  const double sign = hi < lo ? -1.0 : 1.0;
  if (hi < lo) std::swap(lo, hi);

  std::priority_queue<detail::Segment> queue;
  auto first = detail::gauss_kronrod_15(f, lo, hi);
  double total = first.value;
  double error = first.error;
  queue.push(first);
  int segments = 1;

  while (error > std::max(abs_tol, rel_tol * std::abs(total)) && segments < max_segments) {
    const auto worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      queue.push(worst);
      break;
    }
    auto left = detail::gauss_kronrod_15(f, worst.lo, mid);
    auto right = detail::gauss_kronrod_15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++segments;
  }

  // Re-sum to shed the drift of the running updates.
  double value = 0.0, err = 0.0;
  while (!queue.empty()) {
    value += queue.top().value;
    err += queue.top().error;
    queue.pop();
  }
  return {sign * value, err, 15 * (2 * segments - 1)};
}

/// Bisection on a sign-changing bracket. Returns the midpoint of the final
/// bracket once it is narrower than x_tol.
template <class F>
double bisect(F&& f, double lo, double hi, double x_tol = 1e-14, int max_iter = 200) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0) == (f_hi > 0))
    fail(ErrorKind::InvalidParameter, "bisect: bracket does not change sign");
  for (int it = 0; it < max_iter && std::abs(hi - lo) > x_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0) == (f_lo > 0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Weights of the Lagrange polynomial through the integer nodes 0..N-1,
/// together with its first and second derivatives, evaluated at xi.
template <std::size_t N>
struct LagrangeWeights {
  std::array<double, N> w{}, dw{}, d2w{};

  explicit LagrangeWeights(double xi) {
    for (std::size_t k = 0; k < N; ++k) {
      double denom = 1.0;
      for (std::size_t m = 0; m < N; ++m)
        if (m != k) denom *= double(k) - double(m);
      double p = 1.0, dp = 0.0, d2p = 0.0;
      for (std::size_t m = 0; m < N; ++m) {
        if (m == k) continue;
        const double f = xi - double(m);
        d2p = d2p * f + 2.0 * dp;
        dp = dp * f + p;
        p *= f;
      }
      w[k] = p / denom;
      dw[k] = dp / denom;
      d2w[k] = d2p / denom;
    }
  }

  template <class Array>
  double apply(const std::array<double, N>& weights, const Array& y, std::size_t offset) const {
    double s = 0.0;
    for (std::size_t k = 0; k < N; ++k) s += weights[k] * y[offset + k];
    return s;
  }
};

/// Cubic Hermite interpolation on [0,1] in the local coordinate theta.
/// Returns value and derivative with respect to the physical variable.
struct HermiteValue {
  double value, derivative;
};

inline HermiteValue hermite_cubic(double y0, double dy0, double y1, double dy1, double h,
                                  double theta) {
  const double t2 = theta * theta, t3 = t2 * theta;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double d00 = 6 * t2 - 6 * theta, d10 = 3 * t2 - 4 * theta + 1;
  const double d01 = -6 * t2 + 6 * theta, d11 = 3 * t2 - 2 * theta;
  return {h00 * y0 + h10 * h * dy0 + h01 * y1 + h11 * h * dy1,
          (d00 * y0 + d01 * y1) / h + d10 * dy0 + d11 * dy1};
}

/// Fourth-order central differences on a uniform grid.
inline double d1_central4(const double* f, double dx) {
  return (f[-2] - 8.0 * f[-1] + 8.0 * f[1] - f[2]) / (12.0 * dx);
}

inline double d2_central4(const double* f, double dx) {
  return (-f[-2] + 16.0 * f[-1] - 30.0 * f[0] + 16.0 * f[1] - f[2]) / (12.0 * dx * dx);
}

/// First derivative of uniformly spaced samples, 4th order in the interior
/// and one-sided 4th order at the two ends on each side.
inline std::vector<double> gradient4(const std::vector<double>& y, double dx) {
  const std::size_t n = y.size();
  if (n < 5) fail(ErrorKind::InvalidParameter, "gradient4 needs at least 5 samples");
  std::vector<double> d(n);
  for (std::size_t i = 2; i + 2 < n; ++i) d[i] = d1_central4(&y[i], dx);
  auto fwd = [&](std::size_t i, double s) {
    // s=+1 forward, s=-1 backward; stencil 0..4 relative to i
    auto at = [&](int k) { return y[std::size_t(long(i) + long(s) * k)]; };
    return s * (-25 * at(0) + 48 * at(1) - 36 * at(2) + 16 * at(3) - 3 * at(4)) / (12 * dx);
  };
  auto skew = [&](std::size_t i, double s) {
    auto at = [&](int k) { return y[std::size_t(long(i) + long(s) * k)]; };
    return s * (-3 * at(-1) - 10 * at(0) + 18 * at(1) - 6 * at(2) + at(3)) / (12 * dx);
  };
  d[0] = fwd(0, 1.0);
  d[1] = skew(1, 1.0);
  d[n - 1] = fwd(n - 1, -1.0);
  d[n - 2] = skew(n - 2, -1.0);
  return d;
}

/// Second-order first derivative of uniformly spaced samples (one-sided at ends).
inline std::vector<double> gradient2(const std::vector<double>& y, double dx) {
  const std::size_t n = y.size();
  if (n < 3) fail(ErrorKind::InvalidParameter, "gradient2 needs at least 3 samples");
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2 * dx);
  d[0] = (-3 * y[0] + 4 * y[1] - y[2]) / (2 * dx);
  d[n - 1] = (3 * y[n - 1] - 4 * y[n - 2] + y[n - 3]) / (2 * dx);
  return d;
}

/// Ordinary least squares for y = alpha + beta*x.
struct LineFit {
  double alpha, beta, residual_rms;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) fail(ErrorKind::InvalidParameter, "fit_line needs matching samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) fail(ErrorKind::InvalidParameter, "fit_line: degenerate abscissae");
  const double beta = sxy / sxx;
  const double alpha = my - beta * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - alpha - beta * x[i];
    ss += r * r;
  }
  return {alpha, beta, std::sqrt(ss / double(n))};
}

inline bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace charshock::numerics
