#include "equilib/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

namespace equilib {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

// Nested block such as "grid"; null when absent, an error unless an object.
const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j[key].is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return j[key];
}

Point point_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(std::string(what) + " must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json check_to_json(const Check& c) { return {{"ok", c.ok}, {"margin", number_to_json(c.margin)}}; }
Check check_from_json(const json& j) { return {j.at("ok").get<bool>(), number_from_json(j.at("margin"))}; }

json properties_to_json(const PropertyReport& r) {
  json j;
  j["gap"] = check_to_json(r.gap);
  j["contract"] = check_to_json(r.contract);
  j["expand_nodes"] = check_to_json(r.expand_nodes);
  j["sing_support"] = check_to_json(r.sing_support);
  j["density_quantization"] = check_to_json(r.density_quantization);
  j["mass_total"] = check_to_json(r.mass_total);
  j["mass_closure"] = check_to_json(r.mass_closure);
  j["c1_gt_c2"] = check_to_json(r.c1_gt_c2);
  j["w"] = {{"min", number_to_json(r.w_min)},
            {"max", number_to_json(r.w_max)},
            {"eps", number_to_json(r.w_eps)},
            {"lower", check_to_json(r.w_lower)},
            {"upper", check_to_json(r.w_upper)},
            {"zero_set", check_to_json(r.w_zero_set)},
            {"plateau", r.w_plateau ? check_to_json(*r.w_plateau) : json(nullptr)}};
  j["kkt"] = {{"contact_dev_inside", number_to_json(r.kkt.contact_dev_inside)},
              {"contact_dev_outside", number_to_json(r.kkt.contact_dev_outside)},
              {"lower_violation", number_to_json(r.kkt.lower_violation)},
              {"tolerance", number_to_json(r.kkt.tolerance)},
              {"ok", r.kkt.ok}};
  j["uniqueness"] = r.uniqueness ? json{{"max_difference", number_to_json(r.uniqueness->max_difference)},
                                        {"tolerance", number_to_json(r.uniqueness->tolerance)},
                                        {"ok", r.uniqueness->ok}}
                                 : json(nullptr);
  j["all_ok"] = r.all_ok();
  return j;
}

PropertyReport properties_from_json(const json& j) {
  PropertyReport r;
  r.gap = check_from_json(j.at("gap"));
  r.contract = check_from_json(j.at("contract"));
  r.expand_nodes = check_from_json(j.at("expand_nodes"));
  r.sing_support = check_from_json(j.at("sing_support"));
  r.density_quantization = check_from_json(j.at("density_quantization"));
  r.mass_total = check_from_json(j.at("mass_total"));
  r.mass_closure = check_from_json(j.at("mass_closure"));
  r.c1_gt_c2 = check_from_json(j.at("c1_gt_c2"));
  const json& w = j.at("w");
  r.w_min = number_from_json(w.at("min"));
  r.w_max = number_from_json(w.at("max"));
  r.w_eps = number_from_json(w.at("eps"));
  r.w_lower = check_from_json(w.at("lower"));
  r.w_upper = check_from_json(w.at("upper"));
  r.w_zero_set = check_from_json(w.at("zero_set"));
  if (!w.at("plateau").is_null()) r.w_plateau = check_from_json(w.at("plateau"));
  const json& k = j.at("kkt");
  r.kkt.contact_dev_inside = number_from_json(k.at("contact_dev_inside"));
  r.kkt.contact_dev_outside = number_from_json(k.at("contact_dev_outside"));
  r.kkt.lower_violation = number_from_json(k.at("lower_violation"));
  r.kkt.tolerance = number_from_json(k.at("tolerance"));
  r.kkt.ok = k.at("ok").get<bool>();
  if (!j.at("uniqueness").is_null()) {
    const json& u = j.at("uniqueness");
    r.uniqueness = UniquenessReport{number_from_json(u.at("max_difference")), number_from_json(u.at("tolerance")),
                                    u.at("ok").get<bool>()};
  }
  return r;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(path, mode);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Solve:
      return "solve";
    case Mode::Verify:
      return "verify";
    case Mode::HalfspaceScan:
      return "halfspace-scan";
    case Mode::OracleCompare:
      return "oracle-compare";
  }
  return "solve";
}

Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::Solve, Mode::Verify, Mode::HalfspaceScan, Mode::OracleCompare})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown mode '" + s + "'");
}

json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigError("expected a number");
}

json region_to_json(const Region& r) {
  return std::visit(overloaded{
                        [](const HalfPlane& h) { return json{{"type", "halfplane"}, {"a", h.a}}; },
                        [](const Disk& d) {
                          return json{{"type", "disk"}, {"center", {d.center.x, d.center.y}}, {"radius", d.radius}};
                        },
                        [](const Polygon& p) {
                          json v = json::array();
                          for (Point q : p.vertices) v.push_back({q.x, q.y});
                          return json{{"type", "polygon"}, {"vertices", v}};
                        },
                    },
                    r);
}

Region region_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw ConfigError("region needs a \"type\" of halfplane, disk or polygon");
  const std::string type = j["type"].get<std::string>();
  Region r;
  try {
    if (type == "halfplane") {
      if (!j.contains("a") || !j["a"].is_number()) throw ConfigError("halfplane region needs a number \"a\"");
      r = HalfPlane{j["a"].get<double>()};
    } else if (type == "disk") {
      if (!j.contains("center") || !j.contains("radius") || !j["radius"].is_number())
        throw ConfigError("disk region needs \"center\" and \"radius\"");
      r = Disk{point_from_json(j["center"], "disk center"), j["radius"].get<double>()};
    } else if (type == "polygon") {
      if (!j.contains("vertices") || !j["vertices"].is_array()) throw ConfigError("polygon region needs \"vertices\"");
      std::vector<Point> v;
      for (const json& q : j["vertices"]) v.push_back(point_from_json(q, "polygon vertex"));
      r = make_polygon(std::move(v));
    } else {
      throw ConfigError("unknown region type '" + type + "'");
    }
    validate(r);
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("invalid region: ") + e.what());
  }
  return r;
}

static RunConfig parse_config_checked(const json& j, Mode mode) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  c.mode = mode;
  if (j.contains("mode") && parse_mode(j["mode"].get<std::string>()) != mode)
    throw ConfigError("config mode '" + j["mode"].get<std::string>() + "' does not match '" + to_string(mode) + "'");
  c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);

  {
    const json& e = section(j, "emit");
    c.emit.density_csv = get_or(e, "density_csv", c.emit.density_csv);
    c.emit.density_pgm = get_or(e, "density_pgm", c.emit.density_pgm);
    c.emit.singular_csv = get_or(e, "singular_csv", c.emit.singular_csv);
    c.emit.report_json = get_or(e, "report_json", c.emit.report_json);
    c.emit.fields_debug = get_or(e, "fields_debug", c.emit.fields_debug);
  }

  if (mode == Mode::HalfspaceScan) {
    c.a_values = get_or(j, "a_values", c.a_values);
    if (c.a_values.empty()) throw ConfigError("a_values must not be empty");
    for (double a : c.a_values)
      if (!(a >= 0.0)) throw ConfigError("a_values must be >= 0");
    return c;
  }

  if (!j.contains("region")) throw ConfigError("mode '" + to_string(mode) + "' needs a region");
  c.region = region_from_json(j["region"]);
  const double mu0 = circular_law_mass(*c.region);
  if (!(mu0 < 1.0)) throw ConfigError("D \\ U is empty: the region covers the unit disk");
  if (j.contains("p") && j.contains("p_mu0_multiple")) throw ConfigError("give either p or p_mu0_multiple");
  if (j.contains("p")) {
    c.p = get_or(j, "p", c.p);
  } else if (j.contains("p_mu0_multiple")) {
    c.p = get_or(j, "p_mu0_multiple", 1.0) * mu0;
  } else {
    throw ConfigError("config needs p (or p_mu0_multiple)");
  }
  if (!(c.p > 0.0 && c.p <= 1.0)) throw ConfigError("p must lie in (0, 1]");
  if (!(c.p > mu0)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "p = %.6g does not exceed mu_0(U) = %.6g; the constraint needs mu_0(U) < p <= 1",
                  c.p, mu0);
    throw ConfigError(buf);
  }

  c.R = get_or(section(j, "grid"), "R", c.R);
  c.n = get_or(section(j, "grid"), "n", c.n);
  if (!(c.R >= 2.0)) throw ConfigError("grid.R must be >= 2");
  if (c.n < 33 || c.n % 2 == 0) throw ConfigError("grid.n must be odd and >= 33");
  {
    const json& s = section(j, "solver");
    c.psor.omega = get_or(s, "omega", c.psor.omega);
    c.psor.tol = get_or(s, "tol", c.psor.tol);
    c.psor.max_iter = get_or(s, "max_iter", c.psor.max_iter);
    c.tol_mass = get_or(s, "tol_mass", c.tol_mass);
    c.recenter = get_or(s, "recenter", c.recenter);
    c.cascade = get_or(s, "cascade", c.cascade);
  }
  if (!(c.psor.omega == 0.0 || (c.psor.omega >= 1.0 && c.psor.omega < 2.0)))
    throw ConfigError("solver.omega must be 0 (auto) or in [1, 2)");
  if (!(c.psor.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (c.psor.max_iter < 0) throw ConfigError("solver.max_iter must be >= 0");
  if (!(c.tol_mass > 0.0)) throw ConfigError("solver.tol_mass must be positive");
  c.uniqueness = get_or(j, "uniqueness_check", c.uniqueness);

  {
    const json& o = section(j, "oracle");
    c.oracle_R = get_or(o, "R", c.oracle_R);
    c.oracle_n = get_or(o, "n", c.oracle_n);
    c.oracle_iters = get_or(o, "iters", c.oracle_iters);
  }
  if (mode == Mode::OracleCompare) {
    if (c.oracle_n < 3 || c.oracle_n > 47 || c.oracle_n % 2 == 0) throw ConfigError("oracle.n must be odd, 3..47");
    if (!(c.oracle_R > 0.0)) throw ConfigError("oracle.R must be positive");
    if (c.oracle_iters < 1000) throw ConfigError("oracle.iters must be >= 1000");
  }
  return c;
}

RunConfig parse_config(const json& j, Mode mode) {
  // Field access not covered by get_or (nested objects of the wrong type)
  // still reports as a config error.
  try {
    return parse_config_checked(j, mode);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path, Mode mode) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j, mode);
}

json config_to_json(const RunConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["output_dir"] = c.output_dir;
  j["emit"] = {{"density_csv", c.emit.density_csv},
               {"density_pgm", c.emit.density_pgm},
               {"singular_csv", c.emit.singular_csv},
               {"report_json", c.emit.report_json},
               {"fields_debug", c.emit.fields_debug}};
  if (c.mode == Mode::HalfspaceScan) {
    j["a_values"] = c.a_values;
    return j;
  }
  j["region"] = region_to_json(*c.region);
  j["p"] = c.p;
  j["grid"] = {{"R", c.R}, {"n", c.n}};
  j["solver"] = {{"omega", c.psor.omega}, {"tol", c.psor.tol},        {"max_iter", c.psor.max_iter},
                 {"tol_mass", c.tol_mass}, {"recenter", c.recenter}, {"cascade", c.cascade}};
  j["uniqueness_check"] = c.uniqueness;
  j["oracle"] = {{"R", c.oracle_R}, {"n", c.oracle_n}, {"iters", c.oracle_iters}};
  return j;
}

json report_to_json(const SolveReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["mode"] = r.mode;
  j["status"] = r.status;
  j["message"] = r.message;
  j["p"] = number_to_json(r.p);
  j["mu0_U"] = number_to_json(r.mu0_U);
  j["c1"] = number_to_json(r.c1);
  j["c2"] = number_to_json(r.c2);
  j["iterations"] = r.iterations;
  j["solves"] = r.solves;
  j["residual"] = number_to_json(r.residual);
  j["converged"] = r.converged;
  j["masses"] = {{"total_raw", number_to_json(r.mass_total_raw)}, {"in_U_raw", number_to_json(r.mass_in_U_raw)},
                 {"regular", number_to_json(r.mass_regular)},     {"singular", number_to_json(r.mass_singular)},
                 {"in_U", number_to_json(r.mass_in_U)}};
  j["clamped_samples"] = r.clamped_samples;
  j["energy"] = number_to_json(r.energy);
  j["center"] = {r.center.x, r.center.y};
  j["grid"] = {{"R", r.grid_R}, {"n", r.grid_n}, {"h", r.grid_h}};
  j["approximate_hypothesis"] = r.approximate_hypothesis;
  j["levels"] = json::array();
  for (const CalibrationLevel& l : r.levels)
    j["levels"].push_back(
        {{"n", l.n}, {"c1", number_to_json(l.c1)}, {"c2", number_to_json(l.c2)}, {"solves", l.solves}, {"sweeps", l.sweeps}});
  j["property_report"] = r.properties ? properties_to_json(*r.properties) : json(nullptr);
  j["energy_identity"] = r.energy_identity ? json{{"double_sum", number_to_json(r.energy_identity->double_sum)},
                                                  {"dirichlet", number_to_json(r.energy_identity->dirichlet)},
                                                  {"relative", number_to_json(r.energy_identity->relative)},
                                                  {"ok", r.energy_identity->ok}}
                                           : json(nullptr);
  j["config"] = r.config;
  j["timings"] = r.timings;
  return j;
}

SolveReport report_from_json(const json& j) {
  SolveReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kReportSchemaVersion) throw ConfigError("unsupported report schema version");
  r.mode = j.at("mode").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.message = j.at("message").get<std::string>();
  r.p = number_from_json(j.at("p"));
  r.mu0_U = number_from_json(j.at("mu0_U"));
  r.c1 = number_from_json(j.at("c1"));
  r.c2 = number_from_json(j.at("c2"));
  r.iterations = j.at("iterations").get<long>();
  r.solves = j.at("solves").get<int>();
  r.residual = number_from_json(j.at("residual"));
  r.converged = j.at("converged").get<bool>();
  const json& m = j.at("masses");
  r.mass_total_raw = number_from_json(m.at("total_raw"));
  r.mass_in_U_raw = number_from_json(m.at("in_U_raw"));
  r.mass_regular = number_from_json(m.at("regular"));
  r.mass_singular = number_from_json(m.at("singular"));
  r.mass_in_U = number_from_json(m.at("in_U"));
  r.clamped_samples = j.at("clamped_samples").get<int>();
  r.energy = number_from_json(j.at("energy"));
  r.center = {j.at("center")[0].get<double>(), j.at("center")[1].get<double>()};
  r.grid_R = j.at("grid").at("R").get<double>();
  r.grid_n = j.at("grid").at("n").get<int>();
  r.grid_h = j.at("grid").at("h").get<double>();
  r.approximate_hypothesis = j.at("approximate_hypothesis").get<bool>();
  for (const json& l : j.at("levels"))
    r.levels.push_back({l.at("n").get<int>(), number_from_json(l.at("c1")), number_from_json(l.at("c2")),
                        l.at("solves").get<int>(), l.at("sweeps").get<long>()});
  if (!j.at("property_report").is_null()) r.properties = properties_from_json(j.at("property_report"));
  if (!j.at("energy_identity").is_null()) {
    const json& e = j.at("energy_identity");
    r.energy_identity = EnergyIdentity{number_from_json(e.at("double_sum")), number_from_json(e.at("dirichlet")),
                                       number_from_json(e.at("relative")), e.at("ok").get<bool>()};
  }
  r.config = j.at("config");
  r.timings = j.at("timings").get<std::map<std::string, double>>();
  return r;
}

json deterministic_part(const json& report) {
  json j = report;
  j.erase("timings");
  return j;
}

void write_density_csv(const std::filesystem::path& path, const ScalarField& density) {
  std::ofstream f = open_out(path);
  f << "x,y,rho\n";
  const Grid2D& g = density.grid;
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) f << g17(g.coord(i)) << ',' << g17(g.coord(j)) << ',' << g17(density(i, j)) << '\n';
}

void write_singular_csv(const std::filesystem::path& path, const std::vector<SingularPoint>& singular) {
  std::ofstream f = open_out(path);
  f << "s,x,y,g\n";
  for (const SingularPoint& p : singular)
    f << g17(p.s) << ',' << g17(p.sample.position.x) << ',' << g17(p.sample.position.y) << ',' << g17(p.g) << '\n';
}

void write_density_pgm(const std::filesystem::path& path, const ScalarField& density) {
  std::ofstream f = open_out(path, std::ios::out | std::ios::binary);
  const Grid2D& g = density.grid;
  f << "P5\n" << g.n() << ' ' << g.n() << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(g.n()));
  for (int j = g.n() - 1; j >= 0; --j) {
    for (int i = 0; i < g.n(); ++i) {
      const double v = std::clamp(density(i, j) * std::numbers::pi, 0.0, 1.0);
      row[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::lround(255.0 * v));
    }
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& field, const std::string& name) {
  std::ofstream f = open_out(path);
  f << "x,y," << name << '\n';
  const Grid2D& g = field.grid;
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) f << g17(g.coord(i)) << ',' << g17(g.coord(j)) << ',' << g17(field(i, j)) << '\n';
}

void write_halfspace_csv(const std::filesystem::path& path, const std::vector<double>& a,
                         const std::vector<HalfspaceVerdict>& verdicts) {
  std::ofstream f = open_out(path);
  f << "a,verdict,worst_margin,worst_b,worst_y\n";
  for (std::size_t k = 0; k < a.size(); ++k) {
    const HalfspaceVerdict& v = verdicts[k];
    f << g17(a[k]) << ',' << (v.fully_singular ? "true" : "false") << ',' << g17(v.worst_margin) << ','
      << g17(v.worst_b) << ',' << g17(v.worst_y) << '\n';
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f = open_out(path);
  f << j.dump(2) << '\n';
}

}  // namespace equilib
