#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "charshock/charshock.hpp"

namespace fs = std::filesystem;
using namespace charshock;

namespace {

struct EosOptions {
  std::string family = "polytropic";
  double gamma = 2.0;
  std::string table;  // path to a JSON {"h": [...], "eta_sq": [...]}

  void add(CLI::App* app) {
    app->add_option("--eos", family, "polytropic, chaplygin or custom")
        ->check(CLI::IsMember({"polytropic", "chaplygin", "custom"}));
    app->add_option("--gamma", gamma, "polytropic exponent");
    app->add_option("--eos-table", table, "JSON file with h and eta_sq arrays (custom law)");
  }

  EosSpec spec() const {
    EosSpec s;
    s.family = family;
    s.gamma = gamma;
    if (family == "custom") {
      std::ifstream in(table);
      if (!in) fail(ErrorKind::IoError, "cannot open EOS table '" + table + "'");
      const auto j = json::parse(in);
      s.table_h = j.at("h").get<std::vector<double>>();
      s.table_eta_sq = j.at("eta_sq").get<std::vector<double>>();
    }
    return s;
  }
};

WidthMode width_mode(const std::string& s) { return s == "delta_squared" ? WidthMode::DeltaSquared : WidthMode::Delta; }

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) fail(ErrorKind::IoError, "cannot open " + p.string() + " for writing");
  return out;
}

struct BurgersSpec {
  std::string profile = "sine";
  double c = 1.0;
  double a = 0.0;
  int grid_n = 4096;
  double cfl = 0.5;
  std::optional<double> t_end;
  double fit_lo_factor = 1.5;
  double fit_hi_factor = 20.0;
};

BurgersSpec load_burgers_spec(const std::string& path) {
  BurgersSpec b;
  if (path.empty()) return b;
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigInvalid, "cannot open problem spec " + path);
  try {
    const auto j = json::parse(in);
    b.profile = j.value("profile", b.profile);
    b.c = j.value("c", b.c);
    b.a = j.value("a", b.a);
    b.grid_n = j.value("grid_n", b.grid_n);
    b.cfl = j.value("cfl", b.cfl);
    if (j.contains("t_end") && !j.at("t_end").is_null()) b.t_end = j.at("t_end").get<double>();
    b.fit_lo_factor = j.value("fit_lo_factor", b.fit_lo_factor);
    b.fit_hi_factor = j.value("fit_hi_factor", b.fit_hi_factor);
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigInvalid, std::string("malformed problem spec: ") + e.what());
  }
  if (b.profile != "sine" && b.profile != "polynomial")
    fail(ErrorKind::ConfigInvalid, "profile must be sine or polynomial");
  return b;
}

json report_json(const ShockReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"classification", to_string(r.classification)},
          {"t_star", opt(r.t_star)},
          {"x_star", opt(r.x_star)},
          {"method", to_string(r.method)},
          {"tolerance", r.tolerance}};
}

// CSV of the slope series on stdout (or --csv), then the reports as JSON.
int cmd_burgers(const BurgersSpec& b, const std::string& csv_out) {
  const auto p = b.profile == "polynomial" ? make_polynomial_problem(b.c, b.a) : make_sine_problem(b.c, b.a);
  const auto closed = burgers_shock_time(b.a, b.c);
  const double end = b.t_end ? *b.t_end : (closed.t_star ? *closed.t_star + 0.05 : 10.0);
  const auto run = burgers_direct_solve(p, b.grid_n, end, b.cfl);

  ShockReport direct;
  direct.method = ShockMethod::DirectSolver;
  json note = nullptr;
  try {
    const auto est = estimate_from_run(run, b.a, p.c(), b.fit_lo_factor, b.fit_hi_factor);
    direct.classification = Classification::Shock;
    direct.t_star = est.t_star_estimate;
    direct.tolerance = 0.5 * (est.window_hi - est.window_lo);
  } catch (const Error& e) {
    note = e.what();
  }

  std::ofstream file;
  if (!csv_out.empty() && csv_out != "-") file = open_out(csv_out);
  std::ostream& os = file.is_open() ? static_cast<std::ostream&>(file) : std::cout;
  os << "t,max_neg_slope,r_of_t,min_mu_closed_form\n";
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    const double s = run.max_neg_slope[i];
    os << format_number(run.times[i]) << ',' << format_number(s) << ','
       << format_number(s > 0.0 ? 1.0 / s : std::nan("")) << ','
       << format_number(burgers_mu_from_slope(-p.c(), b.a, run.times[i])) << '\n';
  }
  if (!file.is_open()) os << '\n';

  json out{{"a", b.a},
           {"c", b.c},
           {"profile", b.profile},
           {"grid_n", b.grid_n},
           {"t_final", run.t_final},
           {"closed_form", report_json(closed)},
           {"direct", report_json(direct)}};
  if (!note.is_null()) out["direct"]["note"] = note;
  std::cout << out.dump(file.is_open() ? 2 : -1) << '\n';
  return 0;
}

int cmd_seed_data(double c, double delta, const std::string& width, int n, const EosOptions& eo,
                  const std::string& csv_out) {
  const auto seeds = bump_seeds(c, delta);
  const auto data = build_annulus_data(seeds, n, width_mode(width));
  const auto eos = make_eos(eo.spec());
  json out{{"c", c}, {"delta", delta}, {"width", data.width}, {"c_sampled", seed_max_slope(seeds)}};
  const auto rep = null_derivative_ratio(data, eos);
  out["null_derivatives"] = {{"sup_second_null", rep.sup_second_null},
                             {"ratio", rep.ratio},
                             {"sup_null_dt", rep.sup_null_dt},
                             {"sup_null_dr", rep.sup_null_dr},
                             {"error_estimate", rep.error_estimate}};
  if (!csv_out.empty()) {
    auto f = open_out(csv_out);
    f << "r,phi,dtphi\n";
    for (std::size_t i = 0; i < data.r_grid.size(); ++i)
      f << format_number(data.r_grid[i]) << ',' << format_number(data.phi_at_minus2[i]) << ','
        << format_number(data.dtphi_at_minus2[i]) << '\n';
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_euler(double c, double delta, double a, const std::string& width, const EosOptions& eo,
              const RadialSolverConfig& cfg, double t_end, std::vector<double> sample_times, const fs::path& dir,
              int history_stride, int snapshot_every) {
  const auto spec = eo.spec();
  const auto eos = make_eos(spec);
  const auto seeds = bump_seeds(c, delta);
  RadialSolver solver(seeds, width_mode(width), a, eos, cfg);
  RunHistory history;
  history.pulse = {c, delta, width_mode(width)};
  history.eos = spec;
  history.damping = a;
  history.width = solver.width();
  history.points = solver.field().size();
  history.solver = cfg;
  std::vector<RadialObserver> observers;
  if (history_stride > 0) observers.push_back(history_recorder(history, history_stride));
  sample_times.push_back(-2.0);
  const auto summary = solver.run(t_end, observers, sample_times);

  fs::create_directories(dir);
  {
    auto f = open_out(dir / "snapshots.csv");
    write_snapshot_csv(f, summary.samples, solver.field().r_min, solver.field().dr, a, eos,
                       std::size_t(std::max(1, snapshot_every)));
  }
  auto js = summary_to_json(summary);
  js["seed"] = history.pulse;
  js["eos_spec"] = spec;
  js["eos_coefficient"] = eos.nonlinearity_coefficient();
  {
    auto f = open_out(dir / "summary.json");
    f << js.dump(2) << '\n';
  }
  if (history_stride > 0) write_history(dir / "history.cbor", history);
  std::cout << js.dump(2) << '\n';
  return summary.failure ? 2 : 0;
}

int cmd_predict(double c, double a, double sigma, double coefficient, double delta) {
  const auto pred = classify_largeness(c, a, sigma, coefficient, delta);
  auto out = prediction_to_json(pred, c, a);
  // the same condition with unit coefficient, for comparison
  try {
    out["t_star_unit_coefficient"] = shock_time_3d(c, a, sigma, 1.0);
  } catch (const Error&) {
    out["t_star_unit_coefficient"] = nullptr;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_foliate(const fs::path& history_path, int rays, int record_stride, const std::string& csv_out) {
  const auto h = read_history(history_path);
  const auto eos = make_eos(h.eos);
  RayTracerConfig rc;
  rc.ray_count = rays;
  rc.record_stride = record_stride;
  RayTracer tracer(eos, h.damping, h.width, rc);
  replay_history(h, tracer);
  const auto& b = tracer.bundle();
  if (csv_out.empty() || csv_out == "-") {
    write_foliation_csv(std::cout, b);
  } else {
    auto f = open_out(csv_out);
    write_foliation_csv(f, b);
    json s{{"frames", h.frames.size()},
           {"rays", rays},
           {"t_last", b.t},
           {"shock_time", b.shock_time ? json(*b.shock_time) : json(nullptr)}};
    std::cout << s.dump(2) << '\n';
  }
  return 0;
}

int cmd_sweep(const fs::path& config, const std::string& out_dir, std::optional<int> workers) {
  SweepConfig cfg;
  try {
    cfg = load_sweep_config(config);
    validate(cfg);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  const auto res = run_sweep(cfg, workers);
  const fs::path dir = out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir);
  const auto files = emit_outputs(res, dir);
  std::cout << "cells " << res.rows.size() << ", failed " << res.failures() << ", workers " << res.workers
            << ", config " << res.config_hash << '\n';
  for (const auto& f : files) std::cout << "  " << f.string() << '\n';
  return res.failures() == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shock formation diagnostics for damped compressible flow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version));

  // burgers
  auto* burgers = app.add_subcommand("burgers", "closed-form and direct-solver shock time for damped Burgers");
  std::string b_spec, b_csv;
  std::optional<double> b_c, b_a, b_tend;
  std::optional<int> b_grid;
  std::optional<std::string> b_profile;
  burgers->add_option("--spec", b_spec, "JSON problem spec: profile, c, a, grid_n, cfl, t_end")
      ->check(CLI::ExistingFile);
  burgers->add_option("--c", b_c, "profile scale (max -f'), overrides the spec");
  burgers->add_option("--a", b_a, "damping, overrides the spec");
  burgers->add_option("--profile", b_profile)->check(CLI::IsMember({"sine", "polynomial"}));
  burgers->add_option("--grid", b_grid)->check(CLI::Range(64, 1 << 22));
  burgers->add_option("--t-end", b_tend);
  burgers->add_option("--csv", b_csv, "write the series here instead of stdout");

  // seed-data
  auto* seed = app.add_subcommand("seed-data", "short-pulse initial data and its null derivatives");
  double s_c = 0.2, s_delta = 0.1;
  int s_n = 1024;
  std::string s_width = "delta", s_csv;
  EosOptions s_eos;
  seed->add_option("--c", s_c);
  seed->add_option("--delta", s_delta);
  seed->add_option("--width", s_width)->check(CLI::IsMember({"delta", "delta_squared"}));
  seed->add_option("--n", s_n, "annulus grid cells");
  seed->add_option("--csv", s_csv);
  s_eos.add(seed);

  // euler-radial
  auto* euler = app.add_subcommand("euler-radial", "radially symmetric Euler evolution from t = -2");
  double e_c = 0.2, e_delta = 0.02, e_a = 0.0, e_tend = -0.1;
  std::string e_width = "delta", e_out = "euler_out";
  std::vector<double> e_samples;
  int e_hist = 0, e_every = 1;
  RadialSolverConfig e_cfg;
  EosOptions e_eos;
  euler->add_option("--c", e_c);
  euler->add_option("--delta", e_delta);
  euler->add_option("--a", e_a, "damping");
  euler->add_option("--width", e_width)->check(CLI::IsMember({"delta", "delta_squared"}));
  euler->add_option("--grid", e_cfg.cells_per_width, "cells across the annulus");
  euler->add_option("--cfl", e_cfg.cfl);
  euler->add_option("--filter", e_cfg.filter_strength, "Kreiss-Oliger strength");
  euler->add_flag("--full-domain", e_cfg.full_domain);
  euler->add_option("--t-end", e_tend);
  euler->add_option("--sample-times", e_samples, "times for field snapshots")->delimiter(',');
  euler->add_option("--snapshot-every", e_every, "write every k-th grid point");
  euler->add_option("--history-stride", e_hist, "store every k-th step for foliate (0: none)");
  euler->add_option("--out", e_out);
  e_eos.add(euler);

  // predict
  auto* predict = app.add_subcommand("predict", "predicted 3D shock time and largeness class");
  double p_c = 1.0, p_a = 0.0, p_sigma = -0.1, p_coef = 4.0, p_delta = 0.0;
  predict->add_option("--c", p_c)->required();
  predict->add_option("--a", p_a);
  predict->add_option("--sigma", p_sigma);
  predict->add_option("--coefficient", p_coef);
  predict->add_option("--delta", p_delta, "reported O(delta) band");

  // foliate
  auto* foliate = app.add_subcommand("foliate", "trace characteristics through a stored run");
  std::string f_hist, f_out;
  int f_rays = 129, f_record = 16;
  foliate->add_option("--history", f_hist)->required()->check(CLI::ExistingFile);
  foliate->add_option("--rays", f_rays);
  foliate->add_option("--record-stride", f_record);
  foliate->add_option("--out", f_out, "CSV path, '-' for stdout");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "parameter sweep from a JSON config");
  std::string w_config, w_out;
  std::optional<int> w_workers;
  sweep->add_option("--config", w_config)->required();
  sweep->add_option("--out", w_out);
  sweep->add_option("--workers", w_workers);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*burgers) {
      auto b = load_burgers_spec(b_spec);
      if (b_c) b.c = *b_c;
      if (b_a) b.a = *b_a;
      if (b_profile) b.profile = *b_profile;
      if (b_grid) b.grid_n = *b_grid;
      if (b_tend) b.t_end = b_tend;
      return cmd_burgers(b, b_csv);
    }
    if (*seed) return cmd_seed_data(s_c, s_delta, s_width, s_n, s_eos, s_csv);
    if (*euler)
      return cmd_euler(e_c, e_delta, e_a, e_width, e_eos, e_cfg, e_tend, e_samples, e_out, e_hist, e_every);
    if (*predict) return cmd_predict(p_c, p_a, p_sigma, p_coef, p_delta);
    if (*foliate) return cmd_foliate(f_hist, f_rays, f_record, f_out);
    if (*sweep) return cmd_sweep(w_config, w_out, w_workers);
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
