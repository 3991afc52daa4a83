#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nicons/experiment.hpp"

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& opts) {
  cmd->add_option("--config", opts.config, "Experiment config (JSON)")->required();
  cmd->add_option("--out", opts.out, "Output directory")->capture_default_str();
  cmd->add_flag("--quiet", opts.quiet, "Only print errors");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus of networked negative-imaginary plants"};
  app.require_subcommand(1);

  Common sim_opts, verify_opts, sweep_opts;
  std::string parameter;
  std::vector<double> values;

  CLI::App* simulate = app.add_subcommand("simulate", "Integrate the closed loop and run the trajectory checks");
  add_common(simulate, sim_opts);
  CLI::App* verify = app.add_subcommand("verify", "Frequency-domain, certificate and gain checks");
  add_common(verify, verify_opts);
  CLI::App* sweep = app.add_subcommand("sweep", "Repeat simulate over one parameter");
  add_common(sweep, sweep_opts);
  sweep->add_option("--param", parameter, "a, b, delta, kappa, m, l, g, step_s, t_end_s or n")->required();
  sweep->add_option("--values", values, "Comma-separated values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? nicons::kExitOk : nicons::kExitConfig;
  }

  const Common& opts = simulate->parsed() ? sim_opts : verify->parsed() ? verify_opts : sweep_opts;
  try {
    const nicons::ExperimentConfig cfg = nicons::load_config(opts.config);
    nicons::RunResult result;
    if (simulate->parsed()) {
      result = nicons::run_simulate(cfg, opts.out, opts.quiet, std::cout);
    } else if (verify->parsed()) {
      result = nicons::run_verify(cfg, opts.out, opts.quiet, std::cout);
    } else {
      result = nicons::run_sweep(cfg, parameter, values, opts.out, opts.quiet, std::cout);
    }
    if (result.exit_code != nicons::kExitOk) {
      std::cerr << "error: " << result.message << '\n';
    } else if (!opts.quiet) {
      std::cout << "ok, results in " << std::filesystem::path(opts.out).string() << '\n';
    }
    return result.exit_code;
  } catch (const nicons::ConfigError& e) {
    std::cerr << "config error at " << (e.field().empty() ? "/" : e.field()) << ": " << e.what() << '\n';
    return nicons::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return nicons::kExitConfig;
  }
}
