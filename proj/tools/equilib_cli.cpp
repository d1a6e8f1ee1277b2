// Command-line front end: equilib <mode> --config <file.json> [--out <dir>].
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "equilib/report.hpp"
#include "equilib/run.hpp"

int main(int argc, char** argv) {
  using namespace equilib;

  CLI::App app{"Constrained equilibrium measures via a two-constant obstacle problem"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  for (const char* name : {"solve", "verify", "halfspace-scan", "oracle-compare"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const Mode mode = parse_mode(app.get_subcommands().front()->get_name());
  RunConfig config;
  try {
    config = load_config(config_path, mode);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (!out_dir.empty()) config.output_dir = out_dir;

  try {
    const RunOutcome outcome = run(config);
    const nlohmann::json& r = outcome.report;
    std::cout << to_string(mode) << ": " << r.value("status", std::string("ok"));
    if (r.contains("message") && !r["message"].get<std::string>().empty())
      std::cout << " (" << r["message"].get<std::string>() << ')';
    std::cout << "; output in " << config.output_dir << '\n';
    return outcome.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerics;
  }
}
