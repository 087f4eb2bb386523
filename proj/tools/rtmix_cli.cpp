// Batch driver for mixed finite element eigenvalue convergence studies.
//
//   rtmix run <config.ini> [--output-dir DIR] [--levels 8,16,32] [--k 4]
//   rtmix presets
//
// Exit status: 0 success, 1 configuration error, 2 numerical failure.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rtmix/rtmix.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

int run(const std::string& config_path, const std::string& output_dir, const std::string& levels, int k) {
  rtmix::StudyConfig config;
  try {
    config = rtmix::load_config(config_path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (!levels.empty()) config.levels = rtmix::parse_levels(levels);
    if (k > 0) config.k = k;
    config.validate();
  } catch (const rtmix::InvalidArgument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }

  const rtmix::StudyResult result = rtmix::run_study(config);
  try {
    rtmix::emit_reports(result, rtmix::ReportPaths::in(config.output_dir), &std::cout);
  } catch (const rtmix::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (result.failed) {
    std::cerr << "numerical failure: " << result.error << '\n';
    return kExitNumerical;
  }
  std::cout << "reports written to " << config.output_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Raviart-Thomas mixed finite element eigenvalue studies"};
  app.require_subcommand(1);

  std::string config_path, output_dir, levels;
  int k = 0;
  auto* run_cmd = app.add_subcommand("run", "Run a convergence study from a config file");
  run_cmd->add_option("config", config_path, "Study configuration (INI)")->required();
  run_cmd->add_option("--output-dir", output_dir, "Override the output directory");
  run_cmd->add_option("--levels", levels, "Override the mesh levels, e.g. 8,16,32");
  run_cmd->add_option("--k", k, "Override the number of eigenvalues")->check(CLI::PositiveNumber);

  auto* presets_cmd = app.add_subcommand("presets", "List built-in problem presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (presets_cmd->parsed()) {
    for (const auto& p : rtmix::preset_catalog()) std::cout << p.name << "\t" << p.description << '\n';
    return 0;
  }
  return run(config_path, output_dir, levels, k);
}
