#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "charshock/eos.hpp"
#include "charshock/errors.hpp"
#include "charshock/foliation.hpp"
#include "charshock/radial_solver.hpp"
#include "charshock/shortpulse.hpp"

namespace charshock {

inline constexpr const char* version = "0.3.1";

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Number formatting shared by every text output

inline std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline double number_from(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// EOS and seed descriptions

struct EosSpec {
  std::string family = "polytropic";
  double gamma = 2.0;
  std::vector<double> table_h, table_eta_sq;

  bool operator==(const EosSpec&) const = default;

  std::string label() const {
    if (family == "polytropic") return "polytropic(gamma=" + format_number(gamma) + ")";
    if (family == "custom") return "custom(" + std::to_string(table_h.size()) + " samples)";
    return family;
  }
};

inline EquationOfState make_eos(const EosSpec& s) {
  if (s.family == "polytropic") return make_polytropic(s.gamma);
  if (s.family == "chaplygin") return make_chaplygin();
  if (s.family == "custom") return make_tabulated(s.table_h, s.table_eta_sq);
  fail(ErrorKind::ConfigInvalid, "unknown EOS family '" + s.family + "'");
}

inline void to_json(json& j, const EosSpec& s) {
  j = json{{"family", s.family}};
  if (s.family == "polytropic") j["gamma"] = s.gamma;
  if (s.family == "custom") {
    j["h"] = s.table_h;
    j["eta_sq"] = s.table_eta_sq;
  }
}

inline void from_json(const json& j, EosSpec& s) {
  if (j.is_string()) {
    s = EosSpec{};
    s.family = j.get<std::string>();
    return;
  }
  s.family = j.value("family", std::string("polytropic"));
  s.gamma = s.family == "polytropic" ? j.value("gamma", 2.0) : 0.0;
  s.table_h = j.value("h", std::vector<double>{});
  s.table_eta_sq = j.value("eta_sq", std::vector<double>{});
}

inline EosSpec polytropic_spec(double gamma) { return {"polytropic", gamma, {}, {}}; }
inline EosSpec chaplygin_spec() { return {"chaplygin", 0.0, {}, {}}; }

/// The seed family is fixed to the bump; only its scale c and amplitude
/// delta vary.
struct PulseSpec {
  double c = 0.2;
  double delta = 0.02;
  WidthMode width_mode = WidthMode::Delta;

  bool operator==(const PulseSpec&) const = default;
};

inline void to_json(json& j, const PulseSpec& p) {
  j = json{{"seed", "bump"}, {"c", p.c}, {"delta", p.delta}, {"width", to_string(p.width_mode)}};
}

inline void from_json(const json& j, PulseSpec& p) {
  if (j.value("seed", std::string("bump")) != "bump")
    fail(ErrorKind::ConfigInvalid, "only the bump seed is supported");
  p.c = j.value("c", 0.2);
  p.delta = j.value("delta", 0.02);
  const auto w = j.value("width", std::string("delta"));
  if (w != "delta" && w != "delta_squared") fail(ErrorKind::ConfigInvalid, "width must be delta or delta_squared");
  p.width_mode = w == "delta" ? WidthMode::Delta : WidthMode::DeltaSquared;
}

inline void to_json(json& j, const RadialSolverConfig& c) {
  j = json{{"cells_per_width", c.cells_per_width}, {"cfl", c.cfl},          {"pad", c.pad},
           {"r_min", c.r_min},                     {"sigma", c.sigma},      {"filter_strength", c.filter_strength},
           {"full_domain", c.full_domain}};
}

inline void from_json(const json& j, RadialSolverConfig& c) {
  const RadialSolverConfig d;
  c.cells_per_width = j.value("cells_per_width", d.cells_per_width);
  c.cfl = j.value("cfl", d.cfl);
  c.pad = j.value("pad", d.pad);
  c.r_min = j.value("r_min", d.r_min);
  c.sigma = j.value("sigma", d.sigma);
  c.filter_strength = j.value("filter_strength", d.filter_strength);
  c.full_domain = j.value("full_domain", d.full_domain);
}

inline void to_json(json& j, const RayTracerConfig& c) {
  j = json{{"ray_count", c.ray_count},
           {"step_stride", c.step_stride},
           {"record_stride", c.record_stride},
           {"shock_mu", c.shock_mu},
           {"stop_on_shock", c.stop_on_shock}};
}

inline void from_json(const json& j, RayTracerConfig& c) {
  const RayTracerConfig d;
  c.ray_count = j.value("ray_count", d.ray_count);
  c.step_stride = j.value("step_stride", d.step_stride);
  c.record_stride = j.value("record_stride", d.record_stride);
  c.shock_mu = j.value("shock_mu", d.shock_mu);
  c.stop_on_shock = j.value("stop_on_shock", d.stop_on_shock);
}

// ---------------------------------------------------------------------------
// Stored run history: every k-th solver step restricted to the active window.

struct HistoryFrame {
  double t = 0.0;
  std::size_t offset = 0;
  std::size_t lo = 0, hi = 0;
  std::vector<double> phi, dtphi, phi_tt;
};

struct RunHistory {
  PulseSpec pulse;
  EosSpec eos;
  double damping = 0.0;
  double width = 0.0;
  double r_min = 0.0;
  double dr = 0.0;
  std::size_t points = 0;
  RadialSolverConfig solver;
  int stride = 1;
  std::vector<HistoryFrame> frames;
};

/// Observer that appends every stride-th snapshot to a history. Frames keep
/// the active window plus a margin for interpolation stencils.
inline RadialObserver history_recorder(RunHistory& h, int stride) {
  if (stride < 1) fail(ErrorKind::InvalidParameter, "history stride must be positive");
  h.stride = stride;
  auto count = std::make_shared<long>(0);
  return [&h, stride, count](const RadialSnapshot& s) {
    if ((*count)++ % stride != 0) return true;
    if (h.frames.empty()) {
      h.r_min = s.r_min;
      h.dr = s.dr;
    }
    HistoryFrame f;
    f.t = s.t;
    const std::size_t margin = 8;
    const std::size_t a = std::max(s.offset, s.lo > margin ? s.lo - margin : 0);
    const std::size_t b = std::min(s.end(), s.hi + margin);
    f.offset = a;
    f.lo = s.lo;
    f.hi = s.hi;
    f.phi.assign(s.phi.begin() + long(a - s.offset), s.phi.begin() + long(b - s.offset));
    f.dtphi.assign(s.dtphi.begin() + long(a - s.offset), s.dtphi.begin() + long(b - s.offset));
    f.phi_tt.assign(s.phi_tt.begin() + long(a - s.offset), s.phi_tt.begin() + long(b - s.offset));
    h.frames.push_back(std::move(f));
    return true;
  };
}

inline void to_json(json& j, const HistoryFrame& f) {
  j = json{{"t", f.t}, {"offset", f.offset}, {"lo", f.lo}, {"hi", f.hi},
           {"phi", f.phi}, {"dtphi", f.dtphi}, {"phi_tt", f.phi_tt}};
}

inline void from_json(const json& j, HistoryFrame& f) {
  f.t = j.at("t").get<double>();
  f.offset = j.at("offset").get<std::size_t>();
  f.lo = j.at("lo").get<std::size_t>();
  f.hi = j.at("hi").get<std::size_t>();
  f.phi = j.at("phi").get<std::vector<double>>();
  f.dtphi = j.at("dtphi").get<std::vector<double>>();
  f.phi_tt = j.at("phi_tt").get<std::vector<double>>();
}

inline json history_to_json(const RunHistory& h) {
  return json{{"format", "charshock-history"},
              {"version", version},
              {"pulse", h.pulse},
              {"eos", h.eos},
              {"damping", h.damping},
              {"width", h.width},
              {"r_min", h.r_min},
              {"dr", h.dr},
              {"points", h.points},
              {"solver", h.solver},
              {"stride", h.stride},
              {"frames", h.frames}};
}

inline RunHistory history_from_json(const json& j) {
  if (j.value("format", std::string()) != "charshock-history")
    fail(ErrorKind::IoError, "not a charshock history file");
  RunHistory h;
  h.pulse = j.at("pulse").get<PulseSpec>();
  h.eos = j.at("eos").get<EosSpec>();
  h.damping = j.at("damping").get<double>();
  h.width = j.at("width").get<double>();
  h.r_min = j.at("r_min").get<double>();
  h.dr = j.at("dr").get<double>();
  h.points = j.at("points").get<std::size_t>();
  h.solver = j.at("solver").get<RadialSolverConfig>();
  h.stride = j.at("stride").get<int>();
  h.frames = j.at("frames").get<std::vector<HistoryFrame>>();
  return h;
}

inline void write_history(const std::filesystem::path& path, const RunHistory& h) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  const auto bytes = json::to_cbor(history_to_json(h));
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

inline RunHistory read_history(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return history_from_json(json::from_cbor(bytes));
  } catch (const json::exception& e) {
    fail(ErrorKind::IoError, std::string("malformed history: ") + e.what());
  }
}

/// Replays a stored history through a ray tracer.
inline void replay_history(const RunHistory& h, RayTracer& tracer) {
  for (const auto& f : h.frames) {
    const RadialSnapshot snap{f.t, h.r_min, h.dr, f.lo, f.hi, f.phi, f.dtphi, f.phi_tt, f.offset};
    if (!tracer.observe(snap)) break;
  }
  tracer.finish();
}

// ---------------------------------------------------------------------------
// CSV writers

inline const char* foliation_csv_header = "t,u,r,mu_spacing,mu_transport,mu_predicted";

/// Per-ray mu time series of a traced bundle.
inline void write_foliation_csv(std::ostream& os, const RayBundle& b) {
  os << foliation_csv_header << '\n';
  for (const auto& s : b.samples) {
    for (std::size_t i = 0; i < s.r.size(); ++i) {
      os << format_number(s.t) << ',' << format_number(b.labels[i]) << ',' << format_number(s.r[i]) << ','
         << format_number(s.mu_spacing[i]) << ',' << format_number(s.mu_transport[i]) << ','
         << format_number(s.mu_predicted[i]) << '\n';
    }
  }
}

/// Field snapshots with the derived fluid state.
inline void write_snapshot_csv(std::ostream& os, const std::vector<RadialSample>& samples, double r_min, double dr,
                               double damping, const EquationOfState& eos, std::size_t every = 1) {
  os << "t,r,phi,dtphi,h,eta,v_r\n";
  for (const auto& s : samples) {
    const std::size_t n = s.phi.size();
    for (std::size_t i = 2; i + 2 < n; i += every) {
      if (s.phi[i] == 0.0 && s.dtphi[i] == 0.0 && s.phi[i - 2] == 0.0 && s.phi[i + 2] == 0.0) continue;
      const double pr = numerics::d1_central4(&s.phi[i], dr);
      const double h = enthalpy(s.phi[i], s.dtphi[i], pr, damping);
      const double eta = eos.admissible(h) ? eos.eval(h).eta : std::numeric_limits<double>::quiet_NaN();
      os << format_number(s.t) << ',' << format_number(r_min + double(i) * dr) << ',' << format_number(s.phi[i])
         << ',' << format_number(s.dtphi[i]) << ',' << format_number(h) << ',' << format_number(eta) << ','
         << format_number(-pr) << '\n';
    }
  }
}

inline json summary_to_json(const RadialRunSummary& s) {
  json j{{"t_start", s.t_start},
         {"t_end_requested", s.t_end_requested},
         {"last_good_time", s.last_good_time},
         {"steps", s.steps},
         {"stopped_by_observer", s.stopped_by_observer},
         {"max_abs_phi", s.max_abs_phi},
         {"max_abs_dtphi", s.max_abs_dtphi},
         {"max_abs_dr_phi", s.max_abs_dr_phi},
         {"max_abs_drr_phi", s.max_abs_drr_phi},
         {"eos", s.eos},
         {"damping", s.damping},
         {"delta", s.delta},
         {"width", s.width},
         {"dr", s.dr},
         {"points", s.points},
         {"cfl", s.cfl},
         {"filter_strength", s.filter_strength},
         {"full_domain", s.full_domain},
         {"version", version}};
  j["failure"] = s.failure ? json(std::string(to_string(*s.failure))) : json(nullptr);
  j["message"] = s.message;
  return j;
}

inline json prediction_to_json(const ShockPrediction& p, double c, double a) {
  return json{{"c", c},
              {"a", a},
              {"sigma", p.sigma},
              {"coefficient", p.coefficient},
              {"classification", to_string(p.classification)},
              {"t_star", p.t_star ? json(*p.t_star) : json(nullptr)},
              {"a_star", p.a_star},
              {"c_shock", p.c_shock},
              {"c_global", p.c_global},
              {"delta_band", p.delta_band}};
}

}  // namespace charshock
