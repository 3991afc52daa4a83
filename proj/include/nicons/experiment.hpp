#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "nicons/graph.hpp"
#include "nicons/linsys.hpp"
#include "nicons/network.hpp"
#include "nicons/plant.hpp"
#include "nicons/sim.hpp"

namespace nicons {

// Process exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitDivergence = 3, kExitCheckFailed = 4 };

// Schema or consistency problem in an experiment config; `field` is a JSON
// pointer such as "/integrator/step_s".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct FirstOrderSpec {
  double a = 10.0;
  double b = 10.0;
};

struct ControllerSpec {
  StateSpace sys;
  std::optional<FirstOrderSpec> first_order;
  std::optional<Mat> certificate;  // Y of the state-space OSNI certificate

  // V₂(x) = ½ xᵀ Y⁻¹ x; (b / 2a) x² for a first-order controller.
  std::optional<StorageFunction> storage() const;
  std::optional<Mat> certificate_or_analytic() const;
};

struct ConsensusThreshold {
  double relative = 0.02;               // of the initial edge disagreement
  std::optional<double> absolute;       // rad, when set
};

struct PositivitySpec {
  std::size_t samples = 100000;
  Vec plant_half_widths;  // per node
  Vec ctrl_half_widths;   // per node
};

struct GammaSpec {
  double lo = -25.0;
  double hi = 25.0;
  std::size_t points = 201;   // scalar pair grid
  std::size_t samples = 2000; // random network grid
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  std::string name = "experiment";
  LoopMode mode = LoopMode::kNetwork;
  Graph graph{1, {}};
  PendulumParams pendulum;
  ControllerSpec controller;
  double delta = 0.05;
  std::vector<Vec> plant_ic;
  std::vector<Vec> ctrl_ic;
  IntegratorConfig integrator;
  std::vector<std::string> checks;
  double check_tolerance = 1e-6;
  ConsensusThreshold consensus;
  PositivitySpec positivity;
  std::vector<std::string> verify_checks;
  GammaSpec gamma;
  double freq_lo = 1e-3;
  double freq_hi = 1e4;
  std::size_t freq_points = 400;
  std::uint64_t steady_state_seed = 7;

  std::size_t nodes() const { return mode == LoopMode::kPair ? 1 : graph.n(); }
  FreqGrid freq_grid() const { return FreqGrid::log_spaced(freq_lo, freq_hi, freq_points); }
};

// Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
// Fully resolved config, defaults included; parse_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& cfg);

ClosedLoop build_loop(const ExperimentConfig& cfg);
Vec initial_state(const ExperimentConfig& cfg, const ClosedLoop& loop);

// Returns a copy with one parameter replaced: a, b, delta, kappa, m, l, g,
// step_s, t_end_s, or n (path graph on n nodes with plant angles spread
// evenly over [2, -2] rad). Throws ConfigError for anything else.
ExperimentConfig apply_parameter(const ExperimentConfig& cfg, const std::string& name, double value);

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  nlohmann::json report;
  std::optional<double> initial_edge_max;
  std::optional<double> final_edge_max;
  std::optional<double> final_all_pairs_max;
};

// Writes trajectory.csv, report.json and outputs.svg into out_dir.
RunResult run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, bool quiet,
                       std::ostream& log);

// Writes report.json into out_dir.
RunResult run_verify(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, bool quiet,
                     std::ostream& log);

// One simulate run per value (in parallel, each in its own sub-directory),
// aggregated into out_dir/sweep.csv.
RunResult run_sweep(const ExperimentConfig& cfg, const std::string& parameter,
                    const std::vector<double>& values, const std::filesystem::path& out_dir, bool quiet,
                    std::ostream& log);

}  // namespace nicons
