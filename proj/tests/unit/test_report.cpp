#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "equilib/report.hpp"

using namespace equilib;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const json kDisk = {{"type", "disk"}, {"center", {0.8, 0.0}}, {"radius", 0.6}};

json base_config() { return {{"region", kDisk}, {"p", 0.5}, {"grid", {{"R", 4}, {"n", 101}}}}; }

std::string config_error(const json& j, Mode mode = Mode::Solve) {
  try {
    parse_config(j, mode);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("equilib_test_report_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(f, line);) out.push_back(line);
  return out;
}

std::vector<double> split(const std::string& line) {
  std::vector<double> v;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
  return v;
}

}  // namespace

TEST_CASE("modes") {
  for (Mode m : {Mode::Solve, Mode::Verify, Mode::HalfspaceScan, Mode::OracleCompare}) CHECK(parse_mode(to_string(m)) == m);
  CHECK(to_string(Mode::HalfspaceScan) == "halfspace-scan");
  CHECK_THROWS_AS(parse_mode("plot"), ConfigError);
}

TEST_CASE("a minimal config takes defaults") {
  const RunConfig c = parse_config(base_config(), Mode::Solve);
  CHECK(c.p == 0.5);
  CHECK(c.n == 101);
  CHECK(c.R == 4.0);
  CHECK(c.psor.omega == 0.0);
  CHECK(c.psor.tol == 1e-8);
  CHECK(c.tol_mass == 1e-3);
  CHECK(c.recenter);
  CHECK(c.emit.density_csv);
  CHECK_FALSE(c.emit.fields_debug);
  REQUIRE(c.region.has_value());
  CHECK(std::get<Disk>(*c.region).radius == 0.6);
}

TEST_CASE("p relative to mu_0") {
  json j = base_config();
  j.erase("p");
  j["p_mu0_multiple"] = 2.0;
  const RunConfig c = parse_config(j, Mode::Solve);
  CHECK(c.p == doctest::Approx(2.0 * circular_law_mass(Disk{{0.8, 0.0}, 0.6})));
  j["p"] = 0.5;
  CHECK(config_error(j).find("either") != std::string::npos);
}

TEST_CASE("invalid configs are rejected with a diagnostic") {
  auto with = [](const std::string& key, const json& v) {
    json j = base_config();
    j[key] = v;
    return j;
  };
  CHECK(config_error(json::array()) != "");
  CHECK(config_error(with("p", 1.5)).find("(0, 1]") != std::string::npos);
  CHECK(config_error(with("p", 0.0)) != "");
  CHECK(config_error(with("p", "half")) != "");
  // mu_0 of this disk is about 0.232.
  const std::string low = config_error(with("p", 0.2));
  CHECK(low.find("does not exceed mu_0(U)") != std::string::npos);
  CHECK(low.find("0.232") != std::string::npos);

  json nop = base_config();
  nop.erase("p");
  CHECK(config_error(nop).find("needs p") != std::string::npos);
  json noregion = base_config();
  noregion.erase("region");
  CHECK(config_error(noregion).find("region") != std::string::npos);

  CHECK(config_error(with("region", {{"type", "disk"}, {"center", {0.0, 0.0}}, {"radius", 2.0}})).find("covers") !=
        std::string::npos);
  CHECK(config_error(with("region", {{"type", "ellipse"}})) != "");
  CHECK(config_error(with("region", {{"type", "disk"}, {"center", {0.0}}, {"radius", 1.0}})) != "");
  CHECK(config_error(with("region", {{"type", "disk"}, {"center", {0.0, 0.0}}, {"radius", -1.0}})) != "");
  CHECK(config_error(with("region", {{"type", "polygon"}, {"vertices", {{0, 0}, {1, 0}}}})) != "");
  CHECK(config_error(with("grid", {{"n", 100}})).find("odd") != std::string::npos);
  CHECK(config_error(with("grid", {{"n", 31}})) != "");
  CHECK(config_error(with("grid", {{"R", 1.5}})) != "");
  CHECK(config_error(with("grid", {{"n", "many"}})) != "");
  CHECK(config_error(with("grid", 7)) != "");
  CHECK(config_error(with("solver", {{"omega", 2.0}})).find("omega") != std::string::npos);
  CHECK(config_error(with("solver", {{"omega", 0.5}})) != "");
  CHECK(config_error(with("solver", {{"tol", 0.0}})) != "");
  CHECK(config_error(with("solver", {{"max_iter", -1}})) != "");
  CHECK(config_error(with("solver", {{"tol_mass", -1e-3}})) != "");
  CHECK(config_error(with("mode", "verify")).find("does not match") != std::string::npos);
  CHECK(config_error(with("mode", 3)) != "");
  CHECK(config_error(with("emit", {{"density_csv", "yes"}})) != "");

  CHECK(config_error(with("oracle", {{"n", 48}}), Mode::OracleCompare) != "");
  CHECK(config_error(with("oracle", {{"n", 33}, {"iters", 10}}), Mode::OracleCompare) != "");
  CHECK(config_error(with("oracle", {{"n", 33}}), Mode::OracleCompare) == "");
  // The oracle block is only validated in its own mode.
  CHECK(config_error(with("oracle", {{"n", 48}}), Mode::Solve) == "");
}

TEST_CASE("half-space scan configs") {
  const RunConfig d = parse_config(json::object(), Mode::HalfspaceScan);
  CHECK(d.a_values == std::vector<double>{1.0, 1.2, 1.4, 1.42, 1.5, 2.0});
  CHECK_FALSE(d.region.has_value());
  CHECK(parse_config({{"a_values", {0.5}}}, Mode::HalfspaceScan).a_values.size() == 1);
  CHECK(config_error({{"a_values", json::array()}}, Mode::HalfspaceScan) != "");
  CHECK(config_error({{"a_values", {1.0, -0.5}}}, Mode::HalfspaceScan) != "");
}

TEST_CASE("load_config reports unreadable and malformed files") {
  const fs::path d = scratch("load");
  CHECK_THROWS_AS(load_config(d / "missing.json", Mode::Solve), ConfigError);
  std::ofstream(d / "bad.json") << "{\"region\": ";
  try {
    load_config(d / "bad.json", Mode::Solve);
    FAIL("no exception");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("malformed JSON") != std::string::npos);
  }
  std::ofstream(d / "good.json") << base_config().dump();
  CHECK(load_config(d / "good.json", Mode::Solve).p == 0.5);
}

TEST_CASE("config round trip") {
  for (const json& region : {json{{"type", "halfplane"}, {"a", 0.5}}, kDisk,
                             json{{"type", "polygon"}, {"vertices", {{0.2, -0.5}, {1.5, -0.5}, {1.5, 0.5}, {0.2, 0.5}}}}}) {
    json j = base_config();
    j["region"] = region;
    j["solver"] = {{"omega", 1.9}, {"tol", 1e-9}, {"max_iter", 5000}, {"tol_mass", 2e-3}, {"recenter", false}};
    j["emit"] = {{"fields_debug", true}, {"density_pgm", false}};
    const RunConfig c = parse_config(j, Mode::Verify);
    const json once = config_to_json(c);
    const json twice = config_to_json(parse_config(once, Mode::Verify));
    CHECK(once == twice);
    CHECK(once["mode"] == "verify");
    CHECK(once["emit"]["fields_debug"] == true);
  }
  const json hs = config_to_json(parse_config({{"a_values", {0.3, 1.7}}}, Mode::HalfspaceScan));
  CHECK(hs == config_to_json(parse_config(hs, Mode::HalfspaceScan)));
  CHECK_FALSE(hs.contains("region"));
}

TEST_CASE("non-finite numbers") {
  constexpr double inf = std::numeric_limits<double>::infinity();
  CHECK(number_to_json(-inf) == "-inf");
  CHECK(number_to_json(inf) == "inf");
  CHECK(number_to_json(std::nan("")) == "nan");
  CHECK(number_to_json(1.5) == 1.5);
  CHECK(number_from_json("-inf") == -inf);
  CHECK(std::isnan(number_from_json("nan")));
  CHECK(number_from_json(json(0.25)) == 0.25);
  CHECK_THROWS(number_from_json("big"));
}

TEST_CASE("report round trip is lossless") {
  SolveReport r;
  r.mode = "verify";
  r.status = "checks_failed";
  r.message = "w";
  r.p = 0.4640884;
  r.mu0_U = 0.2320442;
  r.c1 = 1.1417681719;
  r.c2 = 0.1 + 0.2;  // not exactly representable in decimal
  r.iterations = 123456;
  r.solves = 17;
  r.residual = 9.1e-9;
  r.converged = true;
  r.mass_regular = 0.7875;
  r.mass_singular = 0.2088;
  r.center = {0.1234567890123, -1e-17};
  r.grid_R = 4;
  r.grid_n = 401;
  r.grid_h = 0.02;
  r.levels = {{51, 1.1, 0.9, 20, 4000}, {101, 1.14, kNoConstraint, 5, 900}};
  PropertyReport pr;
  pr.gap = {true, std::numeric_limits<double>::infinity()};
  pr.w_plateau = Check{false, -0.3};
  pr.uniqueness = UniquenessReport{7.7e-12, 1e-7, true};
  pr.kkt = {1e-9, 2e-9, 0.0, 1e-6, true};
  r.properties = pr;
  r.energy_identity = EnergyIdentity{0.0177, 0.0175, 0.0133, true};
  r.config = config_to_json(parse_config(base_config(), Mode::Verify));
  r.timings = {{"calibrate", 35.6}, {"verify", 5.9}};

  const json j = report_to_json(r);
  CHECK(j["c2"].get<double>() == r.c2);
  CHECK(j["levels"][1]["c2"] == "-inf");
  CHECK(j["property_report"]["gap"]["margin"] == "inf");
  CHECK(j["property_report"]["all_ok"] == false);
  const json again = report_to_json(report_from_json(j));
  CHECK(again == j);
  // Through text as well.
  CHECK(report_to_json(report_from_json(json::parse(j.dump(2)))) == j);

  const json det = deterministic_part(j);
  CHECK_FALSE(det.contains("timings"));
  CHECK(det.size() + 1 == j.size());

  SolveReport bare;
  const json b = report_to_json(bare);
  CHECK(b["property_report"].is_null());
  CHECK(b["energy_identity"].is_null());
  CHECK(report_to_json(report_from_json(b)) == b);
}

TEST_CASE("density and singular writers") {
  const fs::path d = scratch("writers");
  const Grid2D g(2.0, 5);
  ScalarField rho(g);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i) rho(i, j) = (i == 2 && j == 2) ? 1.0 / std::numbers::pi : 0.01 * (i + 5 * j);
  write_density_csv(d / "density.csv", rho);
  const auto lines = read_lines(d / "density.csv");
  REQUIRE(lines.size() == 26);
  CHECK(lines[0] == "x,y,rho");
  for (int k = 0; k < 25; ++k) {
    const auto v = split(lines[k + 1]);
    REQUIRE(v.size() == 3);
    CHECK(v[0] == g.coord(k % 5));
    CHECK(v[1] == g.coord(k / 5));
    CHECK(v[2] == rho(k % 5, k / 5));  // %.17g is exact
  }

  std::vector<SingularPoint> s{{{{-0.5, 0.25}, 0.1, {1.0, 0.0}}, 0.0, 0.45}, {{{-0.5, 0.35}, 0.1, {1.0, 0.0}}, 0.1, 0.0}};
  write_singular_csv(d / "singular.csv", s);
  const auto sl = read_lines(d / "singular.csv");
  REQUIRE(sl.size() == 3);
  CHECK(sl[0] == "s,x,y,g");
  CHECK(split(sl[1]) == std::vector<double>{0.0, -0.5, 0.25, 0.45});

  write_field_csv(d / "H.csv", rho, "H");
  CHECK(read_lines(d / "H.csv")[0] == "x,y,H");

  write_halfspace_csv(d / "hs.csv", {1.0, 2.0}, {{false, -0.08, 1.2, 0.0}, {true, 1e-3, 2.001, 0.0}});
  const auto hl = read_lines(d / "hs.csv");
  REQUIRE(hl.size() == 3);
  CHECK(hl[0] == "a,verdict,worst_margin,worst_b,worst_y");
  CHECK(hl[1].rfind("1,false,", 0) == 0);
  CHECK(hl[2].rfind("2,true,", 0) == 0);

  CHECK_THROWS(write_density_csv(d / "no_such_dir" / "x.csv", rho));
}

TEST_CASE("PGM heatmap") {
  const fs::path d = scratch("pgm");
  const Grid2D g(2.0, 5);
  ScalarField rho(g);
  rho(0, 4) = 1.0 / std::numbers::pi;  // top-left pixel: smallest x, largest y
  rho(4, 0) = 0.5 / std::numbers::pi;  // bottom-right
  rho(2, 2) = 5.0;                     // clamped
  rho(1, 1) = -1.0;                    // clamped
  write_density_pgm(d / "rho.pgm", rho);
  std::ifstream f(d / "rho.pgm", std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const std::string header = "P5\n5 5\n255\n";
  REQUIRE(bytes.size() == header.size() + 25);
  CHECK(bytes.substr(0, header.size()) == header);
  auto px = [&](int row, int col) { return static_cast<unsigned char>(bytes[header.size() + 5 * row + col]); };
  CHECK(px(0, 0) == 255);
  CHECK(px(4, 4) == 128);
  CHECK(px(2, 2) == 255);
  CHECK(px(3, 1) == 0);
  CHECK(px(0, 1) == 0);
}

TEST_CASE("json writer output is stable") {
  const fs::path d = scratch("json");
  const json j = {{"b", 1}, {"a", {0.1, "-inf"}}};
  write_json(d / "a.json", j);
  write_json(d / "b.json", j);
  std::ifstream fa(d / "a.json"), fb(d / "b.json");
  const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(sa == sb);
  CHECK(json::parse(sa) == j);
}
