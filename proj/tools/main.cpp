#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace fs = std::filesystem;
using namespace critesn::cli;

int main(int argc, char** argv) {
  CLI::App app{"critesn: echo state networks at the critical point"};
  app.require_subcommand(1);
  app.fallthrough();

  fs::path config_path;
  fs::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Seed, overrides the config");
  app.add_option("--threads", threads, "Worker threads for sweeps and grid checks")
      ->check(CLI::PositiveNumber);

  // Grid overrides for verify, each given as lo,hi,step.
  std::vector<double> delta_grid;
  std::vector<double> zeta_grid;
  std::vector<double> b_grid;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"figure3", "Lyapunov exponent of the alternating-input neuron over a b grid"},
      {"figure45", "Perturbation decay under alternating and i.i.d. input"},
      {"verify", "Cover-function, dominance and per-step contraction checks"},
      {"critical-b", "Critical coupling of the over-tuned tanh neuron"},
      {"mc", "Memory capacity of orthogonal reservoirs"},
      {"simulate", "Twin-trajectory run of a configured reservoir"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    if (name == "verify") {
      sub->add_option("--delta-grid", delta_grid, "lo,hi,step")->delimiter(',')->expected(3);
      sub->add_option("--zeta-grid", zeta_grid, "lo,hi,step")->delimiter(',')->expected(3);
    }
    if (name == "figure3") {
      sub->add_option("--b-grid", b_grid, "lo,hi,step")->delimiter(',')->expected(3);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (seed) config.seed = *seed;
    if (threads) config.threads = *threads;
    if (!delta_grid.empty()) config.verify.delta_grid = {delta_grid[0], delta_grid[1], delta_grid[2]};
    if (!zeta_grid.empty()) config.verify.zeta_grid = {zeta_grid[0], zeta_grid[1], zeta_grid[2]};
    if (!b_grid.empty()) {
      config.figure3.b_range = {b_grid[0], b_grid[1], b_grid[2]};
      config.figure3.b_values.reset();
    }
    const std::string name = app.get_subcommands().front()->get_name();
    const int code = run_command(name, config, out_dir);
    if (code != kExitOk) std::cerr << name << ": one or more checks failed (see " << out_dir << ")\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
