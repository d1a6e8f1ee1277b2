#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "equilib/extraction.hpp"
#include "equilib/geometry.hpp"
#include "equilib/halfspace.hpp"
#include "equilib/obstacle.hpp"
#include "json.hpp"

namespace equilib {

inline constexpr int kReportSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Solve, Verify, HalfspaceScan, OracleCompare };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);  // throws ConfigError

struct EmitFlags {
  bool density_csv = true;
  bool density_pgm = true;
  bool singular_csv = true;
  bool report_json = true;
  bool fields_debug = false;
};

struct RunConfig {
  Mode mode = Mode::Solve;
  std::optional<Region> region;
  double p = 1.0;
  double R = 4.0;
  int n = 401;
  PsorOptions psor{};
  double tol_mass = 1e-3;
  bool recenter = true;
  bool cascade = true;
  bool uniqueness = true;  // verify: run the two-initialisation check
  std::vector<double> a_values{1.0, 1.2, 1.4, 1.42, 1.5, 2.0};
  double oracle_R = 1.5;
  int oracle_n = 33;
  int oracle_iters = 10000;
  std::string output_dir = "out";
  EmitFlags emit{};
};

nlohmann::json region_to_json(const Region& r);
Region region_from_json(const nlohmann::json& j);  // throws ConfigError

/// Parses a config object. `p` may be given directly or as "p_mu0_multiple"
/// (p = factor * mu_0(U)). Validates ranges and throws ConfigError with a
/// diagnostic; mode-specific fields are required only for their mode.
RunConfig parse_config(const nlohmann::json& j, Mode mode);
RunConfig load_config(const std::filesystem::path& path, Mode mode);
nlohmann::json config_to_json(const RunConfig& c);

/// Non-finite doubles are written as the strings "inf", "-inf", "nan".
nlohmann::json number_to_json(double v);
double number_from_json(const nlohmann::json& j);

struct SolveReport {
  int schema_version = kReportSchemaVersion;
  std::string mode;
  std::string status;  // ok | checks_failed | non_convergence
  std::string message;
  double p = 1.0;
  double mu0_U = 0.0;
  double c1 = 0.0;
  double c2 = kNoConstraint;
  long iterations = 0;
  int solves = 0;
  double residual = 0.0;
  bool converged = false;
  double mass_total_raw = 0.0;
  double mass_in_U_raw = 0.0;
  double mass_regular = 0.0;
  double mass_singular = 0.0;
  double mass_in_U = 0.0;
  int clamped_samples = 0;
  double energy = 0.0;
  Point center{};
  double grid_R = 0.0;
  int grid_n = 0;
  double grid_h = 0.0;
  bool approximate_hypothesis = false;
  std::vector<CalibrationLevel> levels;
  std::optional<PropertyReport> properties;
  std::optional<EnergyIdentity> energy_identity;
  nlohmann::json config;
  std::map<std::string, double> timings;  // seconds; excluded from determinism checks
};

nlohmann::json report_to_json(const SolveReport& r);
SolveReport report_from_json(const nlohmann::json& j);

/// The report without its "timings" member.
nlohmann::json deterministic_part(const nlohmann::json& report);

void write_density_csv(const std::filesystem::path& path, const ScalarField& density);
void write_singular_csv(const std::filesystem::path& path, const std::vector<SingularPoint>& singular);
/// 8-bit binary PGM, top row = largest y, grey level 255 at density 1/π.
void write_density_pgm(const std::filesystem::path& path, const ScalarField& density);
void write_field_csv(const std::filesystem::path& path, const ScalarField& field, const std::string& name);
void write_halfspace_csv(const std::filesystem::path& path, const std::vector<double>& a,
                         const std::vector<HalfspaceVerdict>& verdicts);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace equilib
