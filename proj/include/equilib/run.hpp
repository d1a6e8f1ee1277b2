#pragma once

#include <optional>

#include "equilib/extraction.hpp"
#include "equilib/obstacle.hpp"
#include "equilib/report.hpp"
#include "json.hpp"

namespace equilib {

inline constexpr int kExitOk = 0;
inline constexpr int kExitChecksFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerics = 3;

struct SolveArtifacts {
  Calibration calibration;
  ExtractedMeasure measure;
};

struct RunOutcome {
  int exit_code = kExitOk;
  nlohmann::json report;
  std::optional<SolveArtifacts> artifacts;  // solve, verify and oracle-compare
};

struct OracleComparison {
  double energy_oracle = 0.0;
  double energy_solver = 0.0;
  double l1_distance = 0.0;
  double c1_est = 0.0;
  double c2_est = 0.0;
  double kkt_violation = 0.0;
  double duality_gap = 0.0;
  int grid_n = 0;
  double grid_R = 0.0;
  bool energy_ok = false;  // |difference| <= 1e-3
  bool l1_ok = false;      // <= 0.05
  bool kkt_ok = false;     // c1_est > c2_est and violation <= 1e-2
  bool all_ok() const { return energy_ok && l1_ok && kkt_ok; }
};

/// Minimises the discrete energy directly on an n x n grid over [-R, R]^2 and
/// compares it with the solver's measure moved onto the same grid.
OracleComparison compare_with_oracle(const ExtractedMeasure& m, const Region& region, double p, double R, int n,
                                     int iters);
nlohmann::json to_json(const OracleComparison& c);

/// Runs one mode and writes its artifacts into config.output_dir. Exit codes:
/// 0 success, 1 verification checks failed, 3 numerical failure (a partial
/// report is still written). Config errors are the caller's (exit 2).
RunOutcome run(const RunConfig& config);

}  // namespace equilib
