#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nicons/experiment.hpp"

namespace nicons {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json base_config() {
  return json::parse(R"({
    "schema": 1,
    "mode": "network",
    "graph": {"n": 4, "edges": [[0,1],[0,2],[0,3],[1,2]]},
    "plant": {"pendulum": {}},
    "controller": {"first_order": {"a": 10, "b": 10}},
    "delta": 0.05,
    "initial_conditions": {"plants": [[2,0],[1,0],[-1,0],[-2,0]]},
    "integrator": {"step_s": 0.01, "t_end_s": 2.0}
  })");
}

std::string field_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nicons_test_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Config, DefaultsAndRoundTrip) {
  const ExperimentConfig cfg = parse_config(base_config());
  EXPECT_EQ(cfg.nodes(), 4u);
  EXPECT_EQ(cfg.ctrl_ic.size(), 4u);
  EXPECT_EQ(cfg.checks.size(), 5u);
  EXPECT_EQ(cfg.verify_checks.back(), "steady_state");
  EXPECT_EQ(to_json(parse_config(to_json(cfg))), to_json(cfg));
}

TEST(Config, ErrorsNameTheOffendingField) {
  json d = base_config();
  d["integrator"]["step_s"] = 0.0;
  EXPECT_EQ(field_of(d), "/integrator/step_s");
  d = base_config();
  d["graph"]["edges"] = json::parse("[[0,1],[2,3]]");
  EXPECT_EQ(field_of(d), "/graph");
  d = base_config();
  d["initial_conditions"]["plants"].erase(0);
  EXPECT_EQ(field_of(d), "/initial_conditions/plants");
  d = base_config();
  d["delta"] = "x";
  EXPECT_EQ(field_of(d), "/delta");
  d = base_config();
  d["checks"] = json::parse(R"(["nonsense"])");
  EXPECT_EQ(field_of(d), "/checks/0");
  d = base_config();
  d["extra"] = 1;
  EXPECT_EQ(field_of(d), "/extra");
  d = base_config();
  d["schema"] = 2;
  EXPECT_EQ(field_of(d), "/schema");
}

TEST(Config, DisconnectedGraphMessageMentionsConnectivity) {
  json d = base_config();
  d["graph"]["edges"] = json::parse("[[0,1],[2,3]]");
  try {
    parse_config(d);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("connected graph"), std::string::npos);
  }
}

TEST(Config, GeneralControllerNeedsCertificateForStorageChecks) {
  json d = base_config();
  d["controller"] = json::parse(R"({"A": [[-1]], "B": [[1]], "C": [[1]]})");
  EXPECT_EQ(field_of(d), "/controller/Y");
  d["controller"]["Y"] = json::parse("[[1]]");
  EXPECT_EQ(field_of(d), "<none>");
}

TEST(Config, ApplyParameter) {
  const ExperimentConfig cfg = parse_config(base_config());
  const ExperimentConfig a = apply_parameter(cfg, "a", 20.0);
  EXPECT_EQ(a.controller.sys.B(0, 0), 20.0);
  const ExperimentConfig n = apply_parameter(cfg, "n", 3.0);
  EXPECT_EQ(n.graph.n(), 3u);
  EXPECT_EQ(n.plant_ic[1](0), 0.0);
  EXPECT_THROW(apply_parameter(cfg, "bogus", 1.0), ConfigError);
  EXPECT_THROW(apply_parameter(cfg, "step_s", 0.0), ConfigError);
}

TEST(Runner, SimulateWritesArtifacts) {
  const fs::path out = scratch("simulate");
  std::ostringstream log;
  const RunResult r = run_simulate(parse_config(base_config()), out, false, log);
  EXPECT_EQ(r.exit_code, kExitCheckFailed);  // 2 s is too short for 2% consensus
  EXPECT_EQ(r.message, "consensus failed");
  EXPECT_TRUE(fs::exists(out / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(out / "outputs.svg"));
  std::ifstream in(out / "report.json");
  const json report = json::parse(in);
  EXPECT_EQ(report["status"], "check_failed");
  EXPECT_TRUE(report["checks"]["lyapunov_monotone"]["pass"].get<bool>());
  EXPECT_EQ(report["consensus"]["initial_edge_max"].get<double>(), 4.0);
}

TEST(Runner, SimulateReportsDivergence) {
  json d = base_config();
  d["mode"] = "pair";
  d.erase("graph");
  d["controller"] = json::parse(R"({"first_order": {"a": 1, "b": -400}})");
  d["initial_conditions"]["plants"] = json::parse("[[0.1, 0]]");
  d["initial_conditions"]["controllers"] = json::parse("[[0.1]]");
  d["checks"] = json::array();
  std::ostringstream log;
  const fs::path out = scratch("diverge");
  EXPECT_THROW(parse_config(d), ConfigError);  // b must be positive
  d["controller"] = json::parse(R"({"A": [[400]], "B": [[1]], "C": [[1]]})");
  const RunResult r = run_simulate(parse_config(d), out, true, log);
  EXPECT_EQ(r.exit_code, kExitDivergence);
  std::ifstream in(out / "report.json");
  EXPECT_EQ(json::parse(in)["status"], "diverged");
}

TEST(Runner, VerifyStopsAtFirstFailure) {
  json d = base_config();
  d["delta"] = 0.2;
  std::ostringstream log;
  const RunResult r = run_verify(parse_config(d), scratch("verify"), true, log);
  EXPECT_EQ(r.exit_code, kExitCheckFailed);
  EXPECT_EQ(r.message, "osni_freq_test failed");
  EXPECT_TRUE(r.report["checks"]["ni_freq_test"]["pass"].get<bool>());
  EXPECT_NEAR(r.report["checks"]["osni_max_delta"]["delta_max"].get<double>(), 0.1, 1e-6);
}

TEST(Runner, SweepAggregatesRuns) {
  json d = base_config();
  d["checks"] = json::parse(R"(["ni_dissipation", "lyapunov"])");
  const fs::path out = scratch("sweep");
  std::ostringstream log;
  const RunResult ok = run_sweep(parse_config(d), "a", {5.0, 10.0, 20.0}, out, true, log);
  EXPECT_EQ(ok.exit_code, kExitOk);
  std::ifstream in(out / "sweep.csv");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 4);
  EXPECT_EQ(run_sweep(parse_config(d), "a", {}, scratch("sweep_empty"), true, log).exit_code, kExitConfig);
  EXPECT_EQ(run_sweep(parse_config(d), "a", {-1.0}, scratch("sweep_bad"), true, log).exit_code, kExitConfig);
}

}  // namespace
}  // namespace nicons
