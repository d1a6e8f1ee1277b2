#include "equilib/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>

#include "equilib/halfspace.hpp"
#include "equilib/oracle.hpp"
#include "equilib/potential.hpp"

namespace equilib {

using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

CalibrationOptions calibration_options(const RunConfig& c) {
  CalibrationOptions o;
  o.psor = c.psor;
  o.tol_mass = c.tol_mass;
  o.recenter = c.recenter;
  o.cascade = c.cascade;
  return o;
}

SolveReport base_report(const RunConfig& c) {
  SolveReport r;
  r.mode = to_string(c.mode);
  r.p = c.p;
  r.mu0_U = circular_law_mass(*c.region);
  r.grid_R = c.R;
  r.grid_n = c.n;
  r.grid_h = Grid2D(c.R, c.n).h();
  r.approximate_hypothesis = approximate_hypothesis(*c.region);
  r.config = config_to_json(c);
  return r;
}

void fill_solution(SolveReport& r, const SolveArtifacts& a) {
  const Calibration& cal = a.calibration;
  const ExtractedMeasure& m = a.measure;
  r.c1 = cal.c1;
  r.c2 = cal.c2;
  r.iterations = 0;
  for (const CalibrationLevel& l : cal.levels) r.iterations += l.sweeps;
  r.solves = cal.solves;
  r.residual = cal.vi.complementarity_residual;
  r.converged = cal.vi.converged;
  r.mass_total_raw = cal.masses.total;
  r.mass_in_U_raw = cal.masses.in_U;
  r.mass_regular = m.mass_regular;
  r.mass_singular = m.mass_singular;
  r.mass_in_U = m.mass_closure;
  r.clamped_samples = m.clamped_samples;
  r.center = cal.center;
  r.levels = cal.levels;
}

void write_solution_files(const RunConfig& c, const std::filesystem::path& dir, const SolveArtifacts& a) {
  const ExtractedMeasure& m = a.measure;
  if (c.emit.density_csv) write_density_csv(dir / "density.csv", m.regular.density);
  if (c.emit.density_pgm) write_density_pgm(dir / "density.pgm", m.regular.density);
  if (c.emit.singular_csv) write_singular_csv(dir / "singular.csv", m.singular);
  if (c.emit.fields_debug) {
    write_field_csv(dir / "H.csv", a.calibration.vi.H, "H");
    write_field_csv(dir / "psi.csv", a.calibration.psi, "psi");
  }
}

RunOutcome finish(const RunConfig& c, const std::filesystem::path& dir, int code, const json& report) {
  if (c.emit.report_json) write_json(dir / "report.json", report);
  RunOutcome out;
  out.exit_code = code;
  out.report = report;
  return out;
}

RunOutcome run_halfspace(const RunConfig& c, const std::filesystem::path& dir) {
  Stopwatch sw;
  std::vector<HalfspaceVerdict> verdicts;
  verdicts.reserve(c.a_values.size());
  for (double a : c.a_values) verdicts.push_back(is_fully_singular(a));
  const double t = sw.lap();
  write_halfspace_csv(dir / "halfspace.csv", c.a_values, verdicts);

  json rows = json::array();
  for (std::size_t k = 0; k < c.a_values.size(); ++k)
    rows.push_back({{"a", c.a_values[k]},
                    {"verdict", verdicts[k].fully_singular},
                    {"worst_margin", number_to_json(verdicts[k].worst_margin)},
                    {"worst_b", verdicts[k].worst_b},
                    {"worst_y", verdicts[k].worst_y}});
  json report = {{"schema_version", kReportSchemaVersion}, {"mode", to_string(c.mode)}, {"status", "ok"},
                 {"results", rows},  {"config", config_to_json(c)},         {"timings", {{"scan", t}}}};
  return finish(c, dir, kExitOk, report);
}

}  // namespace

OracleComparison compare_with_oracle(const ExtractedMeasure& m, const Region& region, double p, double R, int n,
                                     int iters) {
  const Grid2D coarse(R, n);
  OracleOptions opt;
  opt.iters = iters;
  const OracleResult oracle = direct_minimize(region, p, coarse, opt);
  const SimplexMeasure solver = rasterize(m, region, p, coarse);
  const KktEstimate kkt = kkt_check(oracle.mu);

  OracleComparison c;
  c.energy_oracle = oracle.energy;
  c.energy_solver = discrete_energy(solver);
  c.l1_distance = l1_distance(oracle.mu, solver);
  c.c1_est = kkt.c1_est;
  c.c2_est = kkt.c2_est;
  c.kkt_violation = kkt.max_violation;
  c.duality_gap = oracle.duality_gap;
  c.grid_n = n;
  c.grid_R = R;
  c.energy_ok = std::abs(c.energy_solver - c.energy_oracle) <= 1e-3;
  c.l1_ok = c.l1_distance <= 0.05;
  c.kkt_ok = c.c1_est > c.c2_est && c.kkt_violation <= 1e-2;
  return c;
}

json to_json(const OracleComparison& c) {
  return {{"energy_oracle", c.energy_oracle},
          {"energy_solver", c.energy_solver},
          {"l1_distance", c.l1_distance},
          {"c1_est", number_to_json(c.c1_est)},
          {"c2_est", number_to_json(c.c2_est)},
          {"kkt_violation", c.kkt_violation},
          {"duality_gap", c.duality_gap},
          {"grid", {{"R", c.grid_R}, {"n", c.grid_n}}},
          {"checks", {{"energy", c.energy_ok}, {"l1", c.l1_ok}, {"kkt", c.kkt_ok}}}};
}

RunOutcome run(const RunConfig& config) {
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  if (config.mode == Mode::HalfspaceScan) return run_halfspace(config, dir);
  if (!config.region) throw ConfigError("mode '" + to_string(config.mode) + "' needs a region");
  const Region& region = *config.region;

  SolveReport r = base_report(config);
  Stopwatch sw;
  const Grid2D grid(config.R, config.n);

  std::optional<Calibration> cal;
  try {
    cal = calibrate_constants(region, config.p, grid, calibration_options(config));
  } catch (const SolverError& e) {
    r.timings["calibrate"] = sw.lap();
    r.status = "non_convergence";
    r.message = e.what();
    return finish(config, dir, kExitNumerics, report_to_json(r));
  }
  r.timings["calibrate"] = sw.lap();
  r.c1 = cal->c1;
  r.c2 = cal->c2;
  r.residual = cal->vi.complementarity_residual;
  r.solves = cal->solves;
  r.levels = cal->levels;
  if (!cal->vi.converged) {
    r.status = "non_convergence";
    r.message = "final solve did not reach the residual tolerance";
    return finish(config, dir, kExitNumerics, report_to_json(r));
  }

  std::optional<ExtractedMeasure> measure;
  try {
    measure = extract_measure(cal->vi.H, region);
  } catch (const std::invalid_argument& e) {
    r.status = "non_convergence";
    r.message = std::string("extraction failed: ") + e.what();
    return finish(config, dir, kExitNumerics, report_to_json(r));
  }
  SolveArtifacts art{std::move(*cal), std::move(*measure)};
  fill_solution(r, art);
  r.energy = energy(to_discrete_measure(art.measure));
  r.timings["extract"] = sw.lap();
  write_solution_files(config, dir, art);

  int code = kExitOk;
  r.status = "ok";
  json extra;
  if (config.mode == Mode::Verify) {
    PropertyReport props = verify_properties(art.calibration, art.measure, region);
    if (config.uniqueness) {
      const Calibration& c = art.calibration;
      props.uniqueness = uniqueness_surrogate(ObstacleSpec{region, c.c1, c.c2, c.p}, grid, c.center, config.psor);
    }
    r.energy_identity = energy_identity(art.calibration.vi.H);
    r.properties = props;
    r.timings["verify"] = sw.lap();
    if (!props.all_ok() || !r.energy_identity->ok) {
      code = kExitChecksFailed;
      r.status = "checks_failed";
    }
  } else if (config.mode == Mode::OracleCompare) {
    const OracleComparison cmp =
        compare_with_oracle(art.measure, region, config.p, config.oracle_R, config.oracle_n, config.oracle_iters);
    r.timings["oracle"] = sw.lap();
    extra = to_json(cmp);
    write_json(dir / "oracle_compare.json", extra);
    if (!cmp.all_ok()) {
      code = kExitChecksFailed;
      r.status = "checks_failed";
    }
  }

  json report = report_to_json(r);
  if (!extra.is_null()) report["oracle_compare"] = extra;
  RunOutcome out = finish(config, dir, code, report);
  out.artifacts = std::move(art);
  return out;
}

}  // namespace equilib
