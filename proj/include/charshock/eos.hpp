#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "charshock/errors.hpp"

namespace charshock {

enum class EosFamily { Polytropic, Chaplygin, Custom };

inline std::string to_string(EosFamily f) {
  switch (f) {
    case EosFamily::Polytropic: return "polytropic";
    case EosFamily::Chaplygin: return "chaplygin";
    case EosFamily::Custom: return "custom";
  }
  return "unknown";
}

struct EosState {
  double rho;
  double eta;
  double eta_sq;
  double H;      // -2h - eta^2
  double dH_dh;
};

/// Barotropic equation of state parametrised by specific enthalpy h, with
/// rho(0) = eta(0) = 1. Immutable after construction.
class EquationOfState {
 public:
  EosFamily family() const { return family_; }
  double gamma() const { return gamma_; }
  const std::vector<double>& table_h() const { return table_h_; }
  const std::vector<double>& table_eta_sq() const { return table_eta_sq_; }

  /// Open interval of admissible enthalpies.
  std::pair<double, double> admissible_interval() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (family_) {
      case EosFamily::Polytropic: return {-1.0 / (gamma_ - 1.0), inf};
      case EosFamily::Chaplygin: return {-inf, 0.5};
      case EosFamily::Custom: return {table_h_.front(), table_h_.back()};
    }
    return {0.0, 0.0};
  }

  bool admissible(double h) const {
    auto [lo, hi] = admissible_interval();
    if (family_ == EosFamily::Custom) return h >= lo && h <= hi;
    return h > lo && h < hi;
  }

  EosState eval(double h) const {
    if (!std::isfinite(h) || !admissible(h)) {
      std::ostringstream os;
      os << "enthalpy h=" << h << " outside the admissible interval of the " << to_string(family_)
         << " law";
      fail(ErrorKind::OutOfDomain, os.str());
    }
    switch (family_) {
      case EosFamily::Polytropic: {
        const double e2 = 1.0 + (gamma_ - 1.0) * h;
        return {std::pow(e2, 1.0 / (gamma_ - 1.0)), std::sqrt(e2), e2, -2.0 * h - e2,
                -(gamma_ + 1.0)};
      }
      case EosFamily::Chaplygin: {
        const double e2 = 1.0 - 2.0 * h;
        return {1.0 / std::sqrt(e2), std::sqrt(e2), e2, -1.0, 0.0};
      }
      case EosFamily::Custom: return eval_table(h);
    }
    fail(ErrorKind::InvalidParameter, "unknown EOS family");
  }

  /// eta^2 alone, for inner loops.
  double eta_sq(double h) const {
    switch (family_) {
      case EosFamily::Polytropic: {
        const double e2 = 1.0 + (gamma_ - 1.0) * h;
        if (!(e2 > 0.0)) eval(h);
        return e2;
      }
      case EosFamily::Chaplygin: {
        const double e2 = 1.0 - 2.0 * h;
        if (!(e2 > 0.0)) eval(h);
        return e2;
      }
      case EosFamily::Custom: return eval(h).eta_sq;
    }
    return eval(h).eta_sq;
  }

  /// eval() without the density, which needs a power or an exponential.
  EosState sound(double h) const {
    if (family_ == EosFamily::Custom) return eval(h);
    const double e2 = eta_sq(h);
    const double dH = family_ == EosFamily::Polytropic ? -(gamma_ + 1.0) : 0.0;
    return {std::numeric_limits<double>::quiet_NaN(), std::sqrt(e2), e2, -2.0 * h - e2, dH};
  }

  /// d(eta^2)/dh, which equals -2 - dH/dh.
  double d_eta_sq_dh(double h) const { return -2.0 - eval(h).dH_dh; }

  /// The coefficient -dH/dh at the rest state. It multiplies c in the
  /// leading-order decay of mu (4 for gamma = 3, 0 for Chaplygin).
  double nonlinearity_coefficient() const { return -eval(0.0).dH_dh; }

  std::string describe() const {
    std::ostringstream os;
    os << to_string(family_);
    if (family_ == EosFamily::Polytropic) os << "(gamma=" << gamma_ << ")";
    if (family_ == EosFamily::Custom) os << "(" << table_h_.size() << " samples)";
    return os.str();
  }

  friend EquationOfState make_polytropic(double gamma);
  friend EquationOfState make_chaplygin();
  friend EquationOfState make_tabulated(std::vector<double> h, std::vector<double> eta_sq);

 private:
  EquationOfState() = default;

  EosState eval_table(double h) const {
    std::size_t k = 0;
    while (k + 2 < table_h_.size() && h > table_h_[k + 1]) ++k;
    const double h0 = table_h_[k], h1 = table_h_[k + 1];
    const double slope = (table_eta_sq_[k + 1] - table_eta_sq_[k]) / (h1 - h0);
    const double e2 = table_eta_sq_[k] + slope * (h - h0);
    const double log_rho = log_rho_[k] + segment_log_rho(table_eta_sq_[k], slope, h - h0);
    return {std::exp(log_rho), std::sqrt(e2), e2, -2.0 * h - e2, -2.0 - slope};
  }

  // integral of dh / (e0 + s*dh) over [0, dh]
  static double segment_log_rho(double e0, double s, double dh) {
    if (std::abs(s * dh) < 1e-8 * e0) {
      const double x = s * dh / e0;
      return dh / e0 * (1.0 - x / 2.0 + x * x / 3.0);
    }
    return std::log1p(s * dh / e0) / s;
  }

  EosFamily family_ = EosFamily::Polytropic;
  double gamma_ = 2.0;
  std::vector<double> table_h_, table_eta_sq_, log_rho_;
};

inline EquationOfState make_polytropic(double gamma) {
  if (!(gamma > 1.0) || !std::isfinite(gamma))
    fail(ErrorKind::InvalidParameter, "polytropic law needs gamma > 1");
  EquationOfState eos;
  eos.family_ = EosFamily::Polytropic;
  eos.gamma_ = gamma;
  return eos;
}

inline EquationOfState make_chaplygin() {
  EquationOfState eos;
  eos.family_ = EosFamily::Chaplygin;
  eos.gamma_ = 0.0;
  return eos;
}

/// Piecewise-linear eta^2(h). The table must be strictly increasing in h,
/// bracket h = 0 with eta^2(0) = 1, and keep eta^2 positive.
inline EquationOfState make_tabulated(std::vector<double> h, std::vector<double> eta_sq) {
  if (h.size() < 2 || h.size() != eta_sq.size())
    fail(ErrorKind::InvalidParameter, "tabulated EOS needs at least two (h, eta^2) samples");
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(eta_sq[i] > 0.0)) fail(ErrorKind::InvalidParameter, "tabulated eta^2 must be positive");
    if (i > 0 && !(h[i] > h[i - 1]))
      fail(ErrorKind::InvalidParameter, "tabulated h must be strictly increasing");
  }
  if (!(h.front() <= 0.0 && h.back() >= 0.0))
    fail(ErrorKind::InvalidParameter, "tabulated EOS must contain h = 0");

  EquationOfState eos;
  eos.family_ = EosFamily::Custom;
  eos.gamma_ = 0.0;
  eos.table_h_ = std::move(h);
  eos.table_eta_sq_ = std::move(eta_sq);

  // log rho at every node, anchored so that log rho(0) = 0
  const auto& th = eos.table_h_;
  const auto& te = eos.table_eta_sq_;
  std::vector<double> cumulative(th.size(), 0.0);
  for (std::size_t k = 0; k + 1 < th.size(); ++k) {
    const double s = (te[k + 1] - te[k]) / (th[k + 1] - th[k]);
    cumulative[k + 1] = cumulative[k] + EquationOfState::segment_log_rho(te[k], s, th[k + 1] - th[k]);
  }
  eos.log_rho_ = cumulative;
  const auto at_zero = eos.eval_table(0.0);
  if (std::abs(at_zero.eta_sq - 1.0) > 1e-12)
    fail(ErrorKind::InvalidParameter, "tabulated EOS must satisfy eta^2(0) = 1");
  const double shift = std::log(at_zero.rho);
  for (auto& v : eos.log_rho_) v -= shift;
  return eos;
}

inline EosState eos_eval(const EquationOfState& eos, double h) { return eos.eval(h); }

}  // namespace charshock
