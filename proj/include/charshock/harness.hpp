#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "charshock/burgers.hpp"
#include "charshock/eos.hpp"
#include "charshock/errors.hpp"
#include "charshock/foliation.hpp"
#include "charshock/io.hpp"
#include "charshock/radial_solver.hpp"
#include "charshock/shortpulse.hpp"

namespace charshock {

/// Which computation a sweep cell runs.
///   burgers - closed form plus the direct Burgers solver
///   predict - the 3D shock-time quadrature only
///   euler   - radial Euler solve with traced characteristics
enum class SweepKind { Burgers, Predict, Euler };

inline std::string to_string(SweepKind k) {
  switch (k) {
    case SweepKind::Burgers: return "burgers";
    case SweepKind::Predict: return "predict";
    case SweepKind::Euler: return "euler";
  }
  return "unknown";
}

inline SweepKind sweep_kind_from(const std::string& s) {
  if (s == "burgers") return SweepKind::Burgers;
  if (s == "predict") return SweepKind::Predict;
  if (s == "euler") return SweepKind::Euler;
  fail(ErrorKind::ConfigInvalid, "unknown sweep kind '" + s + "'");
}

struct SweepAxes {
  std::vector<double> a;
  std::vector<double> c;
  std::vector<double> delta;
  std::vector<EosSpec> eos;

  bool operator==(const SweepAxes&) const = default;
};

struct BurgersSweepSettings {
  int grid_n = 1024;
  double cfl = 0.5;
  double t_end = 10.0;       // horizon for global cells
  bool simulate = true;
  double fit_lo_factor = 1.5;
  double fit_hi_factor = 20.0;

  bool operator==(const BurgersSweepSettings&) const = default;
};

struct SweepConfig {
  SweepKind kind = SweepKind::Predict;
  SweepAxes axes;
  double sigma = -0.1;
  double coefficient = 4.0;
  BurgersSweepSettings burgers;
  RadialSolverConfig solver;
  RayTracerConfig rays;
  bool emit_traces = false;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int workers = 1;
};

inline bool operator==(const RadialSolverConfig& x, const RadialSolverConfig& y) {
  return x.cells_per_width == y.cells_per_width && x.cfl == y.cfl && x.pad == y.pad && x.r_min == y.r_min &&
         x.sigma == y.sigma && x.filter_strength == y.filter_strength && x.full_domain == y.full_domain;
}

inline bool operator==(const RayTracerConfig& x, const RayTracerConfig& y) {
  return x.ray_count == y.ray_count && x.step_stride == y.step_stride && x.record_stride == y.record_stride &&
         x.shock_mu == y.shock_mu && x.stop_on_shock == y.stop_on_shock;
}

inline bool operator==(const SweepConfig& x, const SweepConfig& y) {
  return x.kind == y.kind && x.axes == y.axes && x.sigma == y.sigma && x.coefficient == y.coefficient &&
         x.burgers == y.burgers && x.solver == y.solver && x.rays == y.rays && x.emit_traces == y.emit_traces &&
         x.output_dir == y.output_dir && x.seed == y.seed && x.workers == y.workers;
}

inline void to_json(json& j, const SweepConfig& c) {
  j = json{{"kind", to_string(c.kind)},
           {"axes", {{"a", c.axes.a}, {"c", c.axes.c}, {"delta", c.axes.delta}, {"eos", c.axes.eos}}},
           {"sigma", c.sigma},
           {"coefficient", c.coefficient},
           {"burgers",
            {{"grid_n", c.burgers.grid_n},
             {"cfl", c.burgers.cfl},
             {"t_end", c.burgers.t_end},
             {"simulate", c.burgers.simulate},
             {"fit_lo_factor", c.burgers.fit_lo_factor},
             {"fit_hi_factor", c.burgers.fit_hi_factor}}},
           {"solver", c.solver},
           {"rays", c.rays},
           {"emit_traces", c.emit_traces},
           {"output_dir", c.output_dir},
           {"seed", c.seed},
           {"workers", c.workers}};
}

inline void from_json(const json& j, SweepConfig& c) {
  c = SweepConfig{};
  c.kind = sweep_kind_from(j.value("kind", std::string("predict")));
  if (j.contains("axes")) {
    const auto& ax = j.at("axes");
    c.axes.a = ax.value("a", std::vector<double>{});
    c.axes.c = ax.value("c", std::vector<double>{});
    c.axes.delta = ax.value("delta", std::vector<double>{});
    if (ax.contains("eos")) c.axes.eos = ax.at("eos").get<std::vector<EosSpec>>();
  }
  c.sigma = j.value("sigma", c.sigma);
  c.coefficient = j.value("coefficient", c.coefficient);
  if (j.contains("burgers")) {
    const auto& b = j.at("burgers");
    c.burgers.grid_n = b.value("grid_n", c.burgers.grid_n);
    c.burgers.cfl = b.value("cfl", c.burgers.cfl);
    c.burgers.t_end = b.value("t_end", c.burgers.t_end);
    c.burgers.simulate = b.value("simulate", c.burgers.simulate);
    c.burgers.fit_lo_factor = b.value("fit_lo_factor", c.burgers.fit_lo_factor);
    c.burgers.fit_hi_factor = b.value("fit_hi_factor", c.burgers.fit_hi_factor);
  }
  if (j.contains("solver")) c.solver = j.at("solver").get<RadialSolverConfig>();
  if (j.contains("rays")) c.rays = j.at("rays").get<RayTracerConfig>();
  c.emit_traces = j.value("emit_traces", c.emit_traces);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
}

inline SweepConfig parse_sweep_config(const std::string& text) {
  try {
    return json::parse(text).get<SweepConfig>();
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigInvalid, std::string("malformed sweep config: ") + e.what());
  }
}

inline SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigInvalid, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sweep_config(ss.str());
}

/// Hash of the canonical serialization. The worker count and output
/// directory do not change results and are left out.
inline std::string config_hash(const SweepConfig& c) {
  json j = c;
  j.erase("workers");
  j.erase("output_dir");
  return hex64(fnv1a(j.dump()));
}

inline void validate(const SweepConfig& c) {
  auto bad = [](const std::string& m) { fail(ErrorKind::ConfigInvalid, m); };
  if (c.axes.a.empty() || c.axes.c.empty()) bad("axes a and c must be non-empty");
  if (c.kind == SweepKind::Euler && (c.axes.delta.empty() || c.axes.eos.empty()))
    bad("euler sweeps need non-empty delta and eos axes");
  for (double a : c.axes.a)
    if (!std::isfinite(a)) bad("damping values must be finite");
  for (double v : c.axes.c) {
    if (!std::isfinite(v)) bad("c values must be finite");
    if (c.kind != SweepKind::Burgers && !(v > 0.0)) bad("c values must be positive");
  }
  for (double d : c.axes.delta)
    if (!(d > 0.0 && d < 1.0)) bad("delta values must lie in (0, 1)");
  for (const auto& e : c.axes.eos) {
    if (e.family != "polytropic" && e.family != "chaplygin" && e.family != "custom")
      bad("unknown EOS family '" + e.family + "'");
    if (e.family == "polytropic" && !(e.gamma > 1.0)) bad("polytropic gamma must exceed 1");
  }
  if (!(c.sigma > -2.0 && c.sigma < 0.0)) bad("sigma must lie in (-2, 0)");
  if (!(c.coefficient > 0.0)) bad("coefficient must be positive");
  if (c.kind == SweepKind::Burgers) {
    if (c.burgers.grid_n < 64) bad("burgers grid_n must be at least 64");
    if (!(c.burgers.cfl > 0.0 && c.burgers.cfl <= 0.9)) bad("burgers cfl must lie in (0, 0.9]");
    if (!(c.burgers.t_end > -1.0)) bad("burgers t_end must exceed -1");
  }
  if (c.kind == SweepKind::Euler) {
    if (!(c.solver.cells_per_width >= 64)) bad("cells_per_width must be at least 64");
    if (!(c.solver.cfl > 0.0 && c.solver.cfl <= 1.0)) bad("solver cfl must lie in (0, 1]");
    if (c.rays.ray_count < 33) bad("ray_count must be at least 33");
  }
  if (c.workers < 0) bad("workers must be non-negative");
}

/// Worker count: CHARSHOCK_WORKERS wins over the requested value; 0 means
/// one per hardware thread.
inline int resolve_workers(int requested) {
  if (const char* env = std::getenv("CHARSHOCK_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) requested = int(v);
  }
  if (requested <= 0) requested = int(std::max(1u, std::thread::hardware_concurrency()));
  return requested;
}

// ---------------------------------------------------------------------------
// Results

struct SweepRow {
  std::string kind;
  std::string eos;  // empty for burgers and predict cells
  double a = 0.0;
  double c = 0.0;
  double delta = std::numeric_limits<double>::quiet_NaN();
  double t_star_predicted = std::numeric_limits<double>::quiet_NaN();
  double t_star_simulated = std::numeric_limits<double>::quiet_NaN();
  std::string classification;
  std::string simulated_branch;  // "shock" or "global" from the simulation
  double min_mu_at_sigma = std::numeric_limits<double>::quiet_NaN();
  double runtime = 0.0;  // seconds; kept out of the CSV
  std::string status = "ok";
  std::string error_kind;
  std::string message;
  std::string config_hash;
  std::string version;
  MuTrace trace;  // minimum mu over time, euler cells only
  std::optional<RayBundle> bundle;  // kept when traces are emitted
};

struct SweepResult {
  SweepConfig config;
  std::string config_hash;
  std::string version;
  int workers = 1;
  double wall_time = 0.0;
  std::vector<SweepRow> rows;

  std::size_t failures() const {
    return std::size_t(std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.status != "ok"; }));
  }
};

struct SweepCell {
  double a;
  double c;
  double delta;
  std::optional<EosSpec> eos;
};

inline std::vector<SweepCell> sweep_cells(const SweepConfig& cfg) {
  std::vector<SweepCell> out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> deltas = cfg.kind == SweepKind::Euler ? cfg.axes.delta : std::vector<double>{nan};
  std::vector<std::optional<EosSpec>> eos;
  if (cfg.kind == SweepKind::Euler) {
    for (const auto& e : cfg.axes.eos) eos.emplace_back(e);
  } else {
    eos.emplace_back(std::nullopt);
  }
  for (const auto& e : eos)
    for (double d : deltas)
      for (double a : cfg.axes.a)
        for (double c : cfg.axes.c) out.push_back({a, c, d, e});
  return out;
}

namespace detail {

inline void burgers_cell(const SweepConfig& cfg, const SweepCell& cell, SweepRow& row) {
  const auto rep = burgers_shock_time(cell.a, cell.c);
  row.classification = to_string(rep.classification);
  if (rep.t_star) row.t_star_predicted = *rep.t_star;
  // min over x of mu = 1 - c E(t) at the shock time or the horizon
  const double horizon = rep.t_star ? *rep.t_star : cfg.burgers.t_end;
  row.min_mu_at_sigma = burgers_mu_from_slope(-cell.c, cell.a, horizon);
  if (!cfg.burgers.simulate || !(cell.c > 0.0)) {
    row.simulated_branch = row.classification == "Shock" ? "shock" : "global";
    return;
  }
  const auto p = make_sine_problem(cell.c, cell.a);
  const double t_end = rep.t_star ? *rep.t_star + 0.05 : cfg.burgers.t_end;
  const auto run = burgers_direct_solve(p, cfg.burgers.grid_n, t_end, cfg.burgers.cfl);
  try {
    const auto est = estimate_from_run(run, cell.a, cell.c, cfg.burgers.fit_lo_factor, cfg.burgers.fit_hi_factor);
    row.t_star_simulated = est.t_star_estimate;
    row.simulated_branch = "shock";
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoBlowupTrend) throw;
    row.simulated_branch = "global";
  }
}

inline void predict_cell(const SweepConfig& cfg, const SweepCell& cell, SweepRow& row) {
  const auto pred = classify_largeness(cell.c, cell.a, cfg.sigma, cfg.coefficient);
  row.classification = to_string(pred.classification);
  if (pred.t_star) {
    row.t_star_predicted = *pred.t_star;
  } else {
    try {
      row.t_star_predicted = shock_time_3d(cell.c, cell.a, cfg.sigma, cfg.coefficient);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoRootBeforeSigma) throw;
    }
  }
  row.min_mu_at_sigma = 1.0 - cfg.coefficient * cell.c * a1_integral(cfg.sigma, cell.a);
}

inline void euler_cell(const SweepConfig& cfg, const SweepCell& cell, SweepRow& row) {
  predict_cell(cfg, cell, row);
  const auto eos = make_eos(*cell.eos);
  const auto seeds = bump_seeds(cell.c, cell.delta);
  RadialSolverConfig sc = cfg.solver;
  sc.sigma = cfg.sigma;
  RadialSolver solver(seeds, WidthMode::Delta, cell.a, eos, sc);
  RayTracer tracer(eos, cell.a, solver.width(), cfg.rays);
  const auto summary = solver.run(cfg.sigma, {tracer.observer()});
  tracer.finish();
  if (summary.failure) fail(*summary.failure, summary.message);
  const auto& b = tracer.bundle();
  row.trace = min_mu_trace(b);
  if (b.shock_time) row.t_star_simulated = *b.shock_time;
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < b.mu.size(); ++i) m = std::min(m, b.mu[i]);
  row.min_mu_at_sigma = m;
  double lowest = m;
  for (double v : row.trace.min_mu_transport) lowest = std::min(lowest, v);
  row.simulated_branch = lowest < 0.5 ? "shock" : "global";
  if (cfg.emit_traces) row.bundle = b;
}

}  // namespace detail

inline SweepRow run_cell(const SweepConfig& cfg, const SweepCell& cell, const std::string& hash) {
  SweepRow row;
  row.kind = to_string(cfg.kind);
  row.a = cell.a;
  row.c = cell.c;
  row.delta = cell.delta;
  if (cell.eos) row.eos = cell.eos->label();
  row.config_hash = hash;
  row.version = version;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (cfg.kind) {
      case SweepKind::Burgers: detail::burgers_cell(cfg, cell, row); break;
      case SweepKind::Predict: detail::predict_cell(cfg, cell, row); break;
      case SweepKind::Euler: detail::euler_cell(cfg, cell, row); break;
    }
  } catch (const Error& e) {
    row.status = "failed";
    row.error_kind = std::string(to_string(e.kind()));
    row.message = e.what();
  } catch (const std::exception& e) {
    row.status = "failed";
    row.error_kind = "Unexpected";
    row.message = e.what();
  }
  row.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

/// Runs every cell on a pool of worker threads. Rows come back sorted by
/// (eos, delta, a, c) whatever the completion order.
inline SweepResult run_sweep(const SweepConfig& cfg, std::optional<int> workers_override = std::nullopt) {
  validate(cfg);
  SweepResult res;
  res.config = cfg;
  res.config_hash = config_hash(cfg);
  res.version = version;
  res.workers = resolve_workers(workers_override.value_or(cfg.workers));
  const auto cells = sweep_cells(cfg);
  res.rows.resize(cells.size());
  const auto t0 = std::chrono::steady_clock::now();
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) res.rows[i] = run_cell(cfg, cells[i], res.config_hash);
  };
  const int n = std::min<int>(res.workers, int(cells.size()));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const SweepRow& x, const SweepRow& y) {
    auto dkey = [](double d) { return std::isnan(d) ? -1.0 : d; };
    return std::make_tuple(x.eos, dkey(x.delta), x.a, x.c) < std::make_tuple(y.eos, dkey(y.delta), y.a, y.c);
  });
  return res;
}

// ---------------------------------------------------------------------------
// Emission

inline const char* sweep_csv_header =
    "kind,eos,a,c,delta,t_star_predicted,t_star_simulated,classification,simulated_branch,min_mu_at_sigma,"
    "status,error_kind,config_hash,version";

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

/// The table without timings, so equal configs give identical bytes.
inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << sweep_csv_header << '\n';
  for (const auto& row : r.rows) {
    os << row.kind << ',' << csv_escape(row.eos) << ',' << format_number(row.a) << ',' << format_number(row.c)
       << ',' << format_number(row.delta) << ',' << format_number(row.t_star_predicted) << ','
       << format_number(row.t_star_simulated) << ',' << row.classification << ',' << row.simulated_branch << ','
       << format_number(row.min_mu_at_sigma) << ',' << row.status << ',' << row.error_kind << ','
       << row.config_hash << ',' << row.version << '\n';
  }
}

/// Long-format series: T*(a) curves per (eos, delta, c) and min-mu traces
/// per euler cell.
inline void write_plot_csv(std::ostream& os, const SweepResult& r) {
  os << "series,x,y\n";
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  for (const auto& row : r.rows) {
    if (row.status != "ok") continue;
    std::ostringstream key;
    key << "[" << row.kind;
    if (!row.eos.empty()) key << " eos=" << row.eos;
    if (!std::isnan(row.delta)) key << " delta=" << format_number(row.delta);
    key << " c=" << format_number(row.c) << "]";
    if (!std::isnan(row.t_star_predicted)) curves["t_star_predicted" + key.str()].push_back({row.a, row.t_star_predicted});
    if (!std::isnan(row.t_star_simulated)) curves["t_star_simulated" + key.str()].push_back({row.a, row.t_star_simulated});
  }
  for (const auto& [name, pts] : curves)
    for (const auto& [x, y] : pts) os << csv_escape(name) << ',' << format_number(x) << ',' << format_number(y) << '\n';
  for (const auto& row : r.rows) {
    if (row.trace.t.empty()) continue;
    std::ostringstream key;
    key << "min_mu[eos=" << row.eos << " delta=" << format_number(row.delta) << " a=" << format_number(row.a)
        << " c=" << format_number(row.c) << "]";
    for (std::size_t i = 0; i < row.trace.t.size(); ++i)
      os << csv_escape(key.str()) << ',' << format_number(row.trace.t[i]) << ','
         << format_number(row.trace.min_mu_transport[i]) << '\n';
  }
}

inline json sweep_summary_json(const SweepResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"kind", row.kind},
                    {"eos", row.eos},
                    {"a", row.a},
                    {"c", row.c},
                    {"delta", number_or_null(row.delta)},
                    {"t_star_predicted", number_or_null(row.t_star_predicted)},
                    {"t_star_simulated", number_or_null(row.t_star_simulated)},
                    {"classification", row.classification},
                    {"simulated_branch", row.simulated_branch},
                    {"min_mu_at_sigma", number_or_null(row.min_mu_at_sigma)},
                    {"runtime", row.runtime},
                    {"status", row.status},
                    {"error_kind", row.error_kind},
                    {"message", row.message},
                    {"config_hash", row.config_hash},
                    {"version", row.version}});
  }
  return json{{"config", r.config},
              {"config_hash", r.config_hash},
              {"version", r.version},
              {"cells", r.rows.size()},
              {"failed", r.failures()},
              {"wall_time", r.wall_time},
              {"environment",
               {{"compiler", __VERSION__},
                {"cxx_standard", long(__cplusplus)},
                {"hardware_threads", std::thread::hardware_concurrency()},
                {"workers", r.workers}}},
              {"rows", rows}};
}

/// Writes sweep.csv, plot.csv, summary.json and, when requested, one
/// foliation CSV per traced cell. Returns the paths written.
inline std::vector<std::filesystem::path> emit_outputs(const SweepResult& r, const std::filesystem::path& dir) {
  if (r.rows.empty()) fail(ErrorKind::IoError, "nothing to emit");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) fail(ErrorKind::IoError, "cannot open " + p.string() + " for writing");
    written.push_back(p);
    return out;
  };
  {
    auto out = open(dir / "sweep.csv");
    write_sweep_csv(out, r);
  }
  {
    auto out = open(dir / "plot.csv");
    write_plot_csv(out, r);
  }
  {
    auto out = open(dir / "summary.json");
    out << sweep_summary_json(r).dump(2) << '\n';
  }
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (!r.rows[i].bundle) continue;
    auto out = open(dir / ("mu_trace_" + std::to_string(i) + ".csv"));
    write_foliation_csv(out, *r.rows[i].bundle);
  }
  for (const auto& p : written)
    if (!std::filesystem::exists(p)) fail(ErrorKind::IoError, "failed to write " + p.string());
  return written;
}

}  // namespace charshock
