#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "critesn/reservoir.hpp"

namespace critesn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

// Bad or inconsistent configuration; maps to kExitUsage.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RangeConfig {
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.1;
};

struct ReservoirConfig {
  // orthogonal | gaussian | alternating | scalar | csv
  std::string family = "alternating";
  int k = 1;
  int n = 1;
  double spectrum = 1.0;
  std::string spectrum_mode = "singular";
  std::string transfer = "sine_sigmoid";
  std::vector<double> anchors;
  double input_scale = 1.0;
  double b = 1.0;
  double input_gain = 1.0;
  std::string weights;        // csv family
  std::string input_weights;  // csv family
};

struct InputConfig {
  std::string kind = "alternating";  // alternating | iid_sign | constant | file
  double amplitude = 0.78539816339744828;
  double value = 0.0;
  std::string path;
};

struct Figure3Config {
  RangeConfig b_range{0.5, 1.5, 0.05};
  std::optional<std::vector<double>> b_values;
  int T = 100000;
  int renorm_interval = 10;
  double eps0 = 1e-9;
  bool start_on_orbit = true;
};

struct Figure45Config {
  double b = 1.0;
  double perturbation = 0.01;
  int perturb_at = 1;
  int T = 10000;
  int fit_t_start = 10;
};

struct VerifyConfig {
  std::vector<std::string> transfers{"tanh", "sine_sigmoid"};
  std::vector<int> neurons{1, 2, 4};
  std::optional<double> eta;  // one-neuron eta; default 1/48
  double gamma = 0.5;
  double kappa = 2.0;
  RangeConfig delta_grid{0.0, 4.0, 0.01};
  RangeConfig zeta_grid{-4.0, 4.0, 0.01};
  std::vector<double> dominance_q0{0.1, 0.5, 1.0};
  int dominance_T = 100000;
  int audit_runs = 8;
  int audit_T = 2000;
};

struct CriticalBConfig {
  std::string transfer = "tanh";
  double amplitude = 0.78539816339744828;
  double bracket_lo = 0.5;
  double bracket_hi = 3.0;
  double tol = 1e-9;
};

struct McConfig {
  std::vector<int> k{4, 8, 16};
  std::string transfer = "tanh";
  double spectrum = 1.0;
  double input_scale = 0.5;
  double amplitude = 1.0;
  int max_delay = 48;
  int T = 6000;
  int washout = 200;
  double ridge = 1e-8;
  double ceiling_slack = 0.5;
};

struct SimulateConfig {
  std::optional<std::vector<double>> x0;
  std::optional<std::vector<double>> y0;
  double offset = 0.01;  // y0 = x0 + offset when y0 is absent
  bool keep_states = true;
  int fit_t_start = 10;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  int threads = 1;
  int T = 10000;
  ReservoirConfig reservoir;
  InputConfig input;
  Figure3Config figure3;
  Figure45Config figure45;
  VerifyConfig verify;
  CriticalBConfig critical_b;
  McConfig mc;
  SimulateConfig simulate;
};

// Parses a JSON config. Syntax errors report line and column; unknown keys
// and type mismatches report the JSON path.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

Reservoir build_reservoir(const ReservoirConfig& rc, std::uint64_t seed);

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json summary;
  std::vector<std::filesystem::path> outputs;
};

CommandResult cmd_figure3(const ExperimentConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_figure45(const ExperimentConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_verify(const ExperimentConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_critical_b(const ExperimentConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_mc(const ExperimentConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

// Dispatch by subcommand name, writing the resolved config and a metadata
// sidecar next to the outputs. Returns the process exit code.
int run_command(std::string_view name, const ExperimentConfig& config,
                const std::filesystem::path& out_dir);

}  // namespace critesn::cli
