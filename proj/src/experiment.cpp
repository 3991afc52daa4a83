#include "nicons/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "nicons/analysis.hpp"
#include "nicons/io.hpp"

namespace nicons {

namespace fs = std::filesystem;
using nlohmann::json;

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

std::optional<StorageFunction> ControllerSpec::storage() const {
  if (first_order) return controller_storage(first_order->a, first_order->b);
  if (certificate) return quadratic_storage(certificate->inverse());
  return std::nullopt;
}

std::optional<Mat> ControllerSpec::certificate_or_analytic() const {
  if (certificate) return certificate;
  if (first_order) return first_order_certificate(first_order->a, first_order->b);
  return std::nullopt;
}

namespace {

const std::set<std::string> kNetworkChecks = {"ni_dissipation", "osni_dissipation", "osni_like_network",
                                              "pair_identities", "lyapunov", "consensus", "positivity"};
const std::set<std::string> kPairChecks = {"ni_dissipation", "osni_dissipation", "lyapunov", "positivity"};
const std::set<std::string> kVerifyChecks = {"ni_freq_test", "osni_freq_test",    "osni_max_delta",
                                             "osni_certificate", "pair_half_delta", "gamma",
                                             "steady_state",  "positivity"};

// Small typed accessors that report the JSON pointer of a bad field.
const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(path + "/" + key, "required field missing");
  return obj.at(key);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

double positive(const json& j, const std::string& path) {
  const double v = as_number(j, path);
  if (!(v > 0.0)) throw ConfigError(path, "must be > 0");
  return v;
}

std::size_t as_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 1) throw ConfigError(path, "expected a positive integer");
  return static_cast<std::size_t>(j.get<long long>());
}

Vec as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(k) = as_number(j[k], path + "/" + std::to_string(k));
  return v;
}

Mat as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  Mat m;
  for (std::size_t r = 0; r < rows; ++r) {
    const Vec row = as_vector(j[r], path + "/" + std::to_string(r));
    if (r == 0) {
      cols = static_cast<std::size_t>(row.size());
      if (cols == 0) throw ConfigError(path, "rows must be non-empty");
      m.resize(rows, cols);
    } else if (static_cast<std::size_t>(row.size()) != cols) {
      throw ConfigError(path + "/" + std::to_string(r), "row length differs from row 0");
    }
    m.row(r) = row.transpose();
  }
  return m;
}

std::vector<Vec> as_vector_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of state vectors");
  std::vector<Vec> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(as_vector(j[k], path + "/" + std::to_string(k)));
  return out;
}

std::vector<std::string> as_string_list(const json& j, const std::string& path,
                                        const std::set<std::string>& allowed) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_string()) throw ConfigError(path + "/" + std::to_string(k), "expected a string");
    const auto s = j[k].get<std::string>();
    if (!allowed.contains(s)) throw ConfigError(path + "/" + std::to_string(k), "unknown check \"" + s + "\"");
    out.push_back(s);
  }
  return out;
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& known, const std::string& path) {
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) throw ConfigError(path + "/" + key, "unknown field");
  }
}

Graph parse_graph(const json& j) {
  if (!j.is_object()) throw ConfigError("/graph", "expected an object");
  const std::size_t n = as_count(require(j, "n", "/graph"), "/graph/n");
  std::vector<Edge> edges;
  const json& e = require(j, "edges", "/graph");
  if (!e.is_array()) throw ConfigError("/graph/edges", "expected an array of [i, j] pairs");
  for (std::size_t k = 0; k < e.size(); ++k) {
    const std::string p = "/graph/edges/" + std::to_string(k);
    if (!e[k].is_array() || e[k].size() != 2 || !e[k][0].is_number_integer() || !e[k][1].is_number_integer() ||
        e[k][0].get<long long>() < 0 || e[k][1].get<long long>() < 0) {
      throw ConfigError(p, "expected a pair of non-negative node indices");
    }
    edges.push_back({e[k][0].get<std::size_t>(), e[k][1].get<std::size_t>()});
  }
  try {
    return Graph(n, std::move(edges));
  } catch (const std::invalid_argument& err) {
    throw ConfigError("/graph", err.what());
  }
}

ControllerSpec parse_controller(const json& j) {
  if (!j.is_object()) throw ConfigError("/controller", "expected an object");
  ControllerSpec spec;
  if (j.contains("first_order")) {
    reject_unknown_keys(j, {"first_order"}, "/controller");
    const json& fo = j.at("first_order");
    FirstOrderSpec f;
    f.a = positive(require(fo, "a", "/controller/first_order"), "/controller/first_order/a");
    f.b = positive(require(fo, "b", "/controller/first_order"), "/controller/first_order/b");
    spec.first_order = f;
    spec.sys = first_order(f.a, f.b);
    return spec;
  }
  reject_unknown_keys(j, {"A", "B", "C", "D", "Y"}, "/controller");
  spec.sys.A = as_matrix(require(j, "A", "/controller"), "/controller/A");
  spec.sys.B = as_matrix(require(j, "B", "/controller"), "/controller/B");
  spec.sys.C = as_matrix(require(j, "C", "/controller"), "/controller/C");
  spec.sys.D = j.contains("D") ? as_matrix(j.at("D"), "/controller/D")
                               : Mat::Zero(spec.sys.C.rows(), spec.sys.B.cols());
  try {
    spec.sys.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError("/controller", err.what());
  }
  if (j.contains("Y")) {
    spec.certificate = as_matrix(j.at("Y"), "/controller/Y");
    if (spec.certificate->rows() != spec.sys.A.rows() || spec.certificate->cols() != spec.sys.A.cols()) {
      throw ConfigError("/controller/Y", "must be q x q");
    }
  }
  return spec;
}

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

void validate_dimensions(ExperimentConfig& cfg) {
  const std::size_t n = cfg.nodes();
  const std::size_t q = cfg.controller.sys.states();
  if (cfg.controller.sys.inputs() != 1) {
    throw ConfigError("/controller", "pendulum plants are single-input; the controller must be 1 x 1");
  }
  if (cfg.controller.sys.D.cwiseAbs().maxCoeff() != 0.0) {
    throw ConfigError("/controller/D", "closed-loop controllers must be strictly proper (D = 0)");
  }
  if (cfg.mode == LoopMode::kNetwork && !is_connected(cfg.graph)) {
    throw ConfigError("/graph", "consensus requires a connected graph");
  }
  if (cfg.mode == LoopMode::kNetwork && !is_hurwitz(cfg.controller.sys)) {
    throw ConfigError("/controller/A", "network controllers must have a Hurwitz A");
  }
  if (cfg.plant_ic.size() != n) {
    throw ConfigError("/initial_conditions/plants", "expected " + std::to_string(n) + " plant states");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cfg.plant_ic[i].size() != 2) {
      throw ConfigError("/initial_conditions/plants/" + std::to_string(i), "pendulum state has 2 entries");
    }
  }
  if (cfg.ctrl_ic.empty()) cfg.ctrl_ic.assign(n, Vec::Zero(q));
  if (cfg.ctrl_ic.size() != n) {
    throw ConfigError("/initial_conditions/controllers", "expected " + std::to_string(n) + " controller states");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<std::size_t>(cfg.ctrl_ic[i].size()) != q) {
      throw ConfigError("/initial_conditions/controllers/" + std::to_string(i),
                        "controller state has " + std::to_string(q) + " entries");
    }
  }
  if (cfg.positivity.plant_half_widths.size() == 0) {
    cfg.positivity.plant_half_widths = Vec(2);
    cfg.positivity.plant_half_widths << std::numbers::pi, 5.0;
  }
  if (cfg.positivity.ctrl_half_widths.size() == 0) cfg.positivity.ctrl_half_widths = Vec::Constant(q, 5.0);
  if (cfg.positivity.plant_half_widths.size() != 2 ||
      static_cast<std::size_t>(cfg.positivity.ctrl_half_widths.size()) != q) {
    throw ConfigError("/positivity", "half-width sizes must match the plant (2) and controller state dimensions");
  }
  const bool needs_storage = std::any_of(cfg.checks.begin(), cfg.checks.end(), [](const std::string& c) {
    return c == "osni_dissipation" || c == "osni_like_network" || c == "lyapunov" || c == "positivity";
  });
  if (needs_storage && !cfg.controller.storage()) {
    throw ConfigError("/controller/Y", "a certificate Y is required for storage-based checks");
  }
  if (cfg.mode == LoopMode::kNetwork && n != 2 &&
      std::find(cfg.checks.begin(), cfg.checks.end(), "pair_identities") != cfg.checks.end()) {
    throw ConfigError("/checks", "pair_identities needs a two-node graph");
  }
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  reject_unknown_keys(doc,
                      {"schema", "name", "mode", "graph", "plant", "controller", "delta", "initial_conditions",
                       "integrator", "checks", "check_tolerance", "consensus", "positivity", "verify"},
                      "");
  const json& schema = require(doc, "schema", "");
  if (!schema.is_number_integer() || schema.get<int>() != 1) throw ConfigError("/schema", "only schema 1 is supported");

  ExperimentConfig cfg;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ConfigError("/name", "expected a string");
    cfg.name = doc["name"].get<std::string>();
  }
  const std::string mode = doc.value("mode", "network");
  if (mode == "network") {
    cfg.mode = LoopMode::kNetwork;
  } else if (mode == "pair") {
    cfg.mode = LoopMode::kPair;
  } else {
    throw ConfigError("/mode", "expected \"network\" or \"pair\"");
  }
  if (cfg.mode == LoopMode::kNetwork) {
    cfg.graph = parse_graph(require(doc, "graph", ""));
  } else if (doc.contains("graph")) {
    throw ConfigError("/graph", "pair mode takes no graph");
  }

  const json& plant = require(doc, "plant", "");
  reject_unknown_keys(plant, {"pendulum"}, "/plant");
  const json& pend = require(plant, "pendulum", "/plant");
  reject_unknown_keys(pend, {"m", "l", "kappa", "g"}, "/plant/pendulum");
  if (pend.contains("m")) cfg.pendulum.mass_kg = positive(pend["m"], "/plant/pendulum/m");
  if (pend.contains("l")) cfg.pendulum.length_m = positive(pend["l"], "/plant/pendulum/l");
  if (pend.contains("kappa")) cfg.pendulum.kappa = positive(pend["kappa"], "/plant/pendulum/kappa");
  if (pend.contains("g")) cfg.pendulum.gravity = positive(pend["g"], "/plant/pendulum/g");

  cfg.controller = parse_controller(require(doc, "controller", ""));
  if (doc.contains("delta")) cfg.delta = positive(doc["delta"], "/delta");

  const json& ic = require(doc, "initial_conditions", "");
  reject_unknown_keys(ic, {"plants", "controllers"}, "/initial_conditions");
  cfg.plant_ic = as_vector_list(require(ic, "plants", "/initial_conditions"), "/initial_conditions/plants");
  if (ic.contains("controllers")) {
    cfg.ctrl_ic = as_vector_list(ic["controllers"], "/initial_conditions/controllers");
  }

  if (doc.contains("integrator")) {
    const json& in = doc["integrator"];
    reject_unknown_keys(in, {"step_s", "t_end_s", "record_every"}, "/integrator");
    if (in.contains("step_s")) cfg.integrator.step_s = positive(in["step_s"], "/integrator/step_s");
    if (in.contains("t_end_s")) cfg.integrator.t_end_s = positive(in["t_end_s"], "/integrator/t_end_s");
    if (in.contains("record_every")) cfg.integrator.record_every = as_count(in["record_every"], "/integrator/record_every");
    try {
      cfg.integrator.validate();
    } catch (const std::invalid_argument& err) {
      throw ConfigError("/integrator", err.what());
    }
  }

  const auto& allowed = cfg.mode == LoopMode::kNetwork ? kNetworkChecks : kPairChecks;
  if (doc.contains("checks")) {
    cfg.checks = as_string_list(doc["checks"], "/checks", allowed);
  } else if (cfg.mode == LoopMode::kNetwork) {
    cfg.checks = {"ni_dissipation", "osni_dissipation", "osni_like_network", "lyapunov", "consensus"};
  } else {
    cfg.checks = {"ni_dissipation", "osni_dissipation", "lyapunov"};
  }
  if (doc.contains("check_tolerance")) cfg.check_tolerance = positive(doc["check_tolerance"], "/check_tolerance");

  if (doc.contains("consensus")) {
    const json& c = doc["consensus"];
    reject_unknown_keys(c, {"relative", "absolute"}, "/consensus");
    if (c.contains("relative")) cfg.consensus.relative = positive(c["relative"], "/consensus/relative");
    if (c.contains("absolute") && !c["absolute"].is_null()) {
      cfg.consensus.absolute = positive(c["absolute"], "/consensus/absolute");
    }
  }
  if (doc.contains("positivity")) {
    const json& p = doc["positivity"];
    reject_unknown_keys(p, {"samples", "plant_half_widths", "ctrl_half_widths"}, "/positivity");
    if (p.contains("samples")) cfg.positivity.samples = as_count(p["samples"], "/positivity/samples");
    if (p.contains("plant_half_widths")) {
      cfg.positivity.plant_half_widths = as_vector(p["plant_half_widths"], "/positivity/plant_half_widths");
    }
    if (p.contains("ctrl_half_widths")) {
      cfg.positivity.ctrl_half_widths = as_vector(p["ctrl_half_widths"], "/positivity/ctrl_half_widths");
    }
  }

  if (doc.contains("verify")) {
    const json& v = doc["verify"];
    reject_unknown_keys(v, {"checks", "gamma", "frequency_grid", "steady_state_seed"}, "/verify");
    if (v.contains("checks")) cfg.verify_checks = as_string_list(v["checks"], "/verify/checks", kVerifyChecks);
    if (v.contains("gamma")) {
      const json& g = v["gamma"];
      reject_unknown_keys(g, {"lo", "hi", "points", "samples", "seed"}, "/verify/gamma");
      if (g.contains("lo")) cfg.gamma.lo = as_number(g["lo"], "/verify/gamma/lo");
      if (g.contains("hi")) cfg.gamma.hi = as_number(g["hi"], "/verify/gamma/hi");
      if (g.contains("points")) cfg.gamma.points = as_count(g["points"], "/verify/gamma/points");
      if (g.contains("samples")) cfg.gamma.samples = as_count(g["samples"], "/verify/gamma/samples");
      if (g.contains("seed")) cfg.gamma.seed = g["seed"].get<std::uint64_t>();
      if (!(cfg.gamma.hi > cfg.gamma.lo)) throw ConfigError("/verify/gamma", "hi must exceed lo");
      if (cfg.gamma.points < 2) throw ConfigError("/verify/gamma/points", "need at least 2 points");
    }
    if (v.contains("frequency_grid")) {
      const json& f = v["frequency_grid"];
      reject_unknown_keys(f, {"lo", "hi", "points"}, "/verify/frequency_grid");
      if (f.contains("lo")) cfg.freq_lo = positive(f["lo"], "/verify/frequency_grid/lo");
      if (f.contains("hi")) cfg.freq_hi = positive(f["hi"], "/verify/frequency_grid/hi");
      if (f.contains("points")) cfg.freq_points = as_count(f["points"], "/verify/frequency_grid/points");
      if (!(cfg.freq_hi > cfg.freq_lo) || cfg.freq_points < 2) {
        throw ConfigError("/verify/frequency_grid", "need lo < hi and at least 2 points");
      }
    }
    if (v.contains("steady_state_seed")) cfg.steady_state_seed = v["steady_state_seed"].get<std::uint64_t>();
  }
  if (cfg.verify_checks.empty()) {
    cfg.verify_checks = {"ni_freq_test", "osni_freq_test", "osni_max_delta", "osni_certificate",
                         "pair_half_delta", "gamma"};
    if (cfg.mode == LoopMode::kNetwork) cfg.verify_checks.push_back("steady_state");
  }
  if (cfg.mode == LoopMode::kPair &&
      std::find(cfg.verify_checks.begin(), cfg.verify_checks.end(), "steady_state") != cfg.verify_checks.end()) {
    throw ConfigError("/verify/checks", "steady_state needs network mode");
  }

  validate_dimensions(cfg);
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ConfigError("", std::string("JSON syntax error: ") + err.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["schema"] = 1;
  doc["name"] = cfg.name;
  doc["mode"] = cfg.mode == LoopMode::kPair ? "pair" : "network";
  if (cfg.mode == LoopMode::kNetwork) {
    json edges = json::array();
    for (const Edge& e : cfg.graph.edges()) edges.push_back({e.i, e.j});
    doc["graph"] = {{"n", cfg.graph.n()}, {"edges", edges}};
  }
  doc["plant"] = {{"pendulum",
                   {{"m", cfg.pendulum.mass_kg},
                    {"l", cfg.pendulum.length_m},
                    {"kappa", cfg.pendulum.kappa},
                    {"g", cfg.pendulum.gravity}}}};
  if (cfg.controller.first_order) {
    doc["controller"] = {{"first_order", {{"a", cfg.controller.first_order->a}, {"b", cfg.controller.first_order->b}}}};
  } else {
    json c = {{"A", matrix_json(cfg.controller.sys.A)},
              {"B", matrix_json(cfg.controller.sys.B)},
              {"C", matrix_json(cfg.controller.sys.C)},
              {"D", matrix_json(cfg.controller.sys.D)}};
    if (cfg.controller.certificate) c["Y"] = matrix_json(*cfg.controller.certificate);
    doc["controller"] = c;
  }
  doc["delta"] = cfg.delta;
  json plants = json::array(), ctrls = json::array();
  for (const Vec& v : cfg.plant_ic) plants.push_back(vector_json(v));
  for (const Vec& v : cfg.ctrl_ic) ctrls.push_back(vector_json(v));
  doc["initial_conditions"] = {{"plants", plants}, {"controllers", ctrls}};
  doc["integrator"] = {{"step_s", cfg.integrator.step_s},
                       {"t_end_s", cfg.integrator.t_end_s},
                       {"record_every", cfg.integrator.record_every}};
  doc["checks"] = cfg.checks;
  doc["check_tolerance"] = cfg.check_tolerance;
  doc["consensus"] = {{"relative", cfg.consensus.relative},
                      {"absolute", cfg.consensus.absolute ? json(*cfg.consensus.absolute) : json(nullptr)}};
  doc["positivity"] = {{"samples", cfg.positivity.samples},
                       {"plant_half_widths", vector_json(cfg.positivity.plant_half_widths)},
                       {"ctrl_half_widths", vector_json(cfg.positivity.ctrl_half_widths)}};
  doc["verify"] = {{"checks", cfg.verify_checks},
                   {"gamma",
                    {{"lo", cfg.gamma.lo},
                     {"hi", cfg.gamma.hi},
                     {"points", cfg.gamma.points},
                     {"samples", cfg.gamma.samples},
                     {"seed", cfg.gamma.seed}}},
                   {"frequency_grid", {{"lo", cfg.freq_lo}, {"hi", cfg.freq_hi}, {"points", cfg.freq_points}}},
                   {"steady_state_seed", cfg.steady_state_seed}};
  return doc;
}

ClosedLoop build_loop(const ExperimentConfig& cfg) {
  NonlinearPlant plant = pendulum_plant(cfg.pendulum);
  if (cfg.mode == LoopMode::kPair) return pair_interconnect(std::move(plant), linear_plant(cfg.controller.sys));
  return network_interconnect(std::move(plant), build_controller_network(cfg.controller.sys, cfg.graph));
}

Vec initial_state(const ExperimentConfig& cfg, const ClosedLoop& loop) {
  return loop.compose_state(cfg.plant_ic, cfg.ctrl_ic);
}

ExperimentConfig apply_parameter(const ExperimentConfig& cfg, const std::string& name, double value) {
  ExperimentConfig out = cfg;
  const std::string field = "/sweep/" + name;
  auto need_positive = [&] {
    if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError(field, "value must be > 0");
  };
  if (name == "a" || name == "b") {
    if (!out.controller.first_order) throw ConfigError(field, "sweeping a/b needs a first_order controller");
    need_positive();
    (name == "a" ? out.controller.first_order->a : out.controller.first_order->b) = value;
    out.controller.sys = first_order(out.controller.first_order->a, out.controller.first_order->b);
  } else if (name == "delta") {
    need_positive();
    out.delta = value;
  } else if (name == "kappa" || name == "m" || name == "l" || name == "g") {
    need_positive();
    double& slot = name == "kappa" ? out.pendulum.kappa
                   : name == "m"   ? out.pendulum.mass_kg
                   : name == "l"   ? out.pendulum.length_m
                                   : out.pendulum.gravity;
    slot = value;
  } else if (name == "step_s" || name == "t_end_s") {
    need_positive();
    (name == "step_s" ? out.integrator.step_s : out.integrator.t_end_s) = value;
    try {
      out.integrator.validate();
    } catch (const std::invalid_argument& err) {
      throw ConfigError(field, err.what());
    }
  } else if (name == "n") {
    if (out.mode != LoopMode::kNetwork) throw ConfigError(field, "sweeping n needs network mode");
    if (value < 1 || value != std::floor(value)) throw ConfigError(field, "n must be a positive integer");
    const auto n = static_cast<std::size_t>(value);
    out.graph = Graph::path(n);
    out.plant_ic.clear();
    for (std::size_t i = 0; i < n; ++i) {
      Vec x = Vec::Zero(2);
      x(0) = n == 1 ? 2.0 : 2.0 - 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
      out.plant_ic.push_back(x);
    }
    out.ctrl_ic.assign(n, Vec::Zero(out.controller.sys.states()));
    if (n != 2) std::erase(out.checks, std::string("pair_identities"));
  } else {
    throw ConfigError(field, "unknown sweep parameter (expected a, b, delta, kappa, m, l, g, step_s, t_end_s or n)");
  }
  validate_dimensions(out);
  return out;
}

namespace {

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  out << std::setw(2) << doc << '\n';
}

CheckReport advisory_positivity(const ExperimentConfig& cfg, const ClosedLoop& loop, json& section) {
  const CompositeStorage cs = composite_storage(loop, pendulum_storage(cfg.pendulum), *cfg.controller.storage());
  const Box box = per_node_box(loop.layout(), cfg.positivity.plant_half_widths, cfg.positivity.ctrl_half_widths);
  const PositivityReport pr = storage_positivity_scan(cs, box, cfg.positivity.samples);
  section = {{"min_value", pr.min_value},
             {"argmin", vector_json(pr.argmin)},
             {"evaluated", pr.evaluated},
             {"pass", pr.pass},
             {"advisory", true}};
  CheckReport r;
  r.name = "positivity";
  r.pass = pr.pass;
  r.samples = pr.evaluated;
  r.max_violation = std::max(0.0, -pr.min_value);
  return r;
}

}  // namespace

RunResult run_simulate(const ExperimentConfig& cfg, const fs::path& out_dir, bool quiet, std::ostream& log) {
  RunResult result;
  fs::create_directories(out_dir);
  const ClosedLoop loop = build_loop(cfg);
  const Vec x0 = initial_state(cfg, loop);
  json report = {{"schema", 1}, {"command", "simulate"}, {"config", to_json(cfg)}};

  Trajectory traj;
  try {
    traj = integrate(loop, x0, cfg.integrator);
  } catch (const DivergenceError& err) {
    report["status"] = "diverged";
    report["message"] = err.what();
    report["divergence"] = {{"time", err.time()}, {"last_finite_state", vector_json(err.last_finite_state())}};
    write_json(out_dir / "report.json", report);
    result.exit_code = kExitDivergence;
    result.message = err.what();
    result.report = report;
    return result;
  }

  const StorageFunction v1 = pendulum_storage(cfg.pendulum);
  const std::optional<StorageFunction> v2 = cfg.controller.storage();
  const double tol = cfg.check_tolerance;
  const std::size_t n = cfg.nodes();
  std::vector<CheckReport> reports;
  std::vector<ConsensusPoint> consensus;
  if (cfg.mode == LoopMode::kNetwork) consensus = consensus_metric(traj, cfg.graph);

  auto wants = [&](const char* name) { return std::find(cfg.checks.begin(), cfg.checks.end(), name) != cfg.checks.end(); };
  if (wants("ni_dissipation")) {
    for (std::size_t i = 0; i < n; ++i) reports.push_back(check_ni_dissipation(traj, v1, i, tol));
  }
  if (wants("osni_dissipation")) {
    for (std::size_t i = 0; i < n; ++i) reports.push_back(check_osni_dissipation(traj, *v2, cfg.delta, i, tol));
  }
  if (wants("osni_like_network")) reports.push_back(check_osni_like_network(traj, *v2, cfg.graph, cfg.delta, tol));
  if (wants("pair_identities")) reports.push_back(check_pair_identities(traj));
  if (wants("lyapunov")) {
    const CompositeStorage cs = composite_storage(loop, v1, *v2);
    reports.push_back(check_lyapunov_monotone(traj, cs, cfg.delta, cfg.graph, tol));
  }
  if (wants("consensus")) {
    const double initial = consensus.front().edge_max;
    const double final_gap = consensus.back().edge_max;
    double threshold = cfg.consensus.relative * initial;
    if (cfg.consensus.absolute) threshold = std::min(threshold, *cfg.consensus.absolute);
    CheckReport r;
    r.name = "consensus";
    r.samples = consensus.size();
    r.time_of_max = traj.times.back();
    r.tolerance = 0.0;
    r.max_violation = std::max(0.0, final_gap - threshold);
    r.max_abs_residual = final_gap;
    r.pass = r.max_violation <= r.tolerance;
    reports.push_back(r);
    report["consensus"] = {{"initial_edge_max", initial},
                           {"final_edge_max", final_gap},
                           {"final_all_pairs_max", consensus.back().all_pairs_max},
                           {"threshold", threshold}};
  }
  if (!consensus.empty()) {
    result.initial_edge_max = consensus.front().edge_max;
    result.final_edge_max = consensus.back().edge_max;
    result.final_all_pairs_max = consensus.back().all_pairs_max;
    report["outcome"] = to_string(classify_outcome(
        traj, cfg.graph, std::max(cfg.consensus.absolute.value_or(0.0), cfg.consensus.relative * consensus.front().edge_max)));
  }
  if (wants("positivity")) {
    json section;
    const CheckReport pos = advisory_positivity(cfg, loop, section);
    report["positivity"] = section;
    if (!pos.pass && !quiet) log << "warning: storage function not positive on the scanned box (min "
                                 << section["min_value"] << "); continuing\n";
  }

  report["checks"] = reports_to_json(reports);
  const auto failed = std::find_if(reports.begin(), reports.end(), [](const CheckReport& r) { return !r.pass; });
  report["status"] = failed == reports.end() ? "ok" : "check_failed";

  {
    std::ofstream csv(out_dir / "trajectory.csv");
    write_trajectory_csv(csv, traj, consensus.empty() ? nullptr : &consensus);
  }
  {
    std::ofstream svg(out_dir / "outputs.svg");
    write_outputs_svg(svg, traj, cfg.mode == LoopMode::kPair ? "Pair interconnection" : "Output feedback consensus");
  }
  write_json(out_dir / "report.json", report);

  if (!quiet) {
    for (const CheckReport& r : reports) {
      log << (r.pass ? "  pass  " : "  FAIL  ") << r.name << "  max_violation=" << r.max_violation << '\n';
    }
  }
  if (failed != reports.end()) {
    result.exit_code = kExitCheckFailed;
    result.message = failed->name + " failed";
  }
  result.report = std::move(report);
  return result;
}

RunResult run_verify(const ExperimentConfig& cfg, const fs::path& out_dir, bool quiet, std::ostream& log) {
  fs::create_directories(out_dir);
  const FreqGrid grid = cfg.freq_grid();
  const StateSpace& sys = cfg.controller.sys;
  json checks = json::object();
  std::vector<std::string> order;
  std::optional<double> delta_max;
  auto record = [&](const std::string& name, bool pass, json detail) {
    detail["pass"] = pass;
    checks[name] = std::move(detail);
    order.push_back(name);
  };

  for (const std::string& name : cfg.verify_checks) {
    try {
      if (name == "ni_freq_test") {
        record(name, ni_freq_test(sys, grid), json::object());
      } else if (name == "osni_freq_test") {
        const FreqSweepReport r = osni_freq_sweep(sys, cfg.delta, grid);
        record(name, r.pass, {{"delta", cfg.delta}, {"worst_eigenvalue", r.worst_eigenvalue}, {"worst_frequency", r.worst_frequency}});
      } else if (name == "osni_max_delta") {
        delta_max = osni_max_delta(sys, grid);
        record(name, cfg.delta <= *delta_max, {{"delta_max", *delta_max}, {"delta", cfg.delta}});
      } else if (name == "osni_certificate") {
        const auto Y = cfg.controller.certificate_or_analytic();
        if (!Y) {
          record(name, false, {{"error", "no certificate Y supplied"}});
          continue;
        }
        const CertificateReport r = osni_certificate_check(sys, *Y, cfg.delta);
        record(name, r.pass(),
               {{"y_positive_definite", r.y_positive_definite},
                {"inequality_holds", r.inequality_holds},
                {"b_equation_holds", r.b_equation_holds},
                {"inequality_residual", r.inequality_residual},
                {"b_residual", r.b_residual},
                {"delta", cfg.delta}});
      } else if (name == "pair_half_delta") {
        if (!delta_max) delta_max = osni_max_delta(sys, grid);
        const double pair_max = osni_max_delta(laplacian_realization(laplacian(Graph::path(2)), sys), grid);
        record(name, std::abs(pair_max - *delta_max / 2.0) <= 2e-6,
               {{"delta_max", *delta_max}, {"pair_delta_max", pair_max}});
      } else if (name == "gamma") {
        const NonlinearPlant plant = pendulum_plant(cfg.pendulum);
        GammaReport g;
        if (cfg.mode == LoopMode::kPair) {
          const auto inputs = scalar_input_grid(cfg.gamma.lo, cfg.gamma.hi, cfg.gamma.points);
          g = gamma_estimate(plant, sys, inputs);
        } else {
          std::mt19937_64 rng(cfg.gamma.seed);
          std::uniform_real_distribution<double> dist(cfg.gamma.lo, cfg.gamma.hi);
          std::vector<Vec> inputs(cfg.gamma.samples, Vec(cfg.graph.n()));
          for (Vec& u : inputs)
            for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = dist(rng);
          g = gamma_estimate(plant, build_controller_network(sys, cfg.graph), inputs);
        }
        record(name, g.gamma_hat < 1.0,
               {{"gamma_hat", g.gamma_hat}, {"maximizing_input", vector_json(g.maximizing_input)}, {"evaluated", g.ratios.size()}});
      } else if (name == "steady_state") {
        const ControllerNetwork net = build_controller_network(sys, cfg.graph);
        std::mt19937_64 rng(cfg.steady_state_seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        Vec u(net.nodes() * net.io_dim());
        for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = dist(rng);
        const CheckReport random_input = check_steady_state_relation(net, u, 1e-6);
        const CheckReport consensus_dir = check_steady_state_relation(net, Vec::Ones(u.size()), 1e-9);
        record(name, random_input.pass && consensus_dir.pass,
               {{"random_input_gap", random_input.max_violation}, {"consensus_direction_gap", consensus_dir.max_violation}});
      } else if (name == "positivity") {
        json section;
        advisory_positivity(cfg, build_loop(cfg), section);
        checks[name] = section;
        order.push_back(name);
      }
    } catch (const std::exception& err) {
      record(name, false, {{"error", err.what()}});
    }
  }

  RunResult result;
  std::optional<std::string> first_failure;
  for (const std::string& name : order) {
    const json& c = checks[name];
    const bool advisory = c.value("advisory", false);
    if (!c["pass"].get<bool>() && !advisory && !first_failure) first_failure = name;
    if (!quiet) log << (c["pass"].get<bool>() ? "  pass  " : (advisory ? "  warn  " : "  FAIL  ")) << name << '\n';
  }
  json report = {{"schema", 1}, {"command", "verify"}, {"config", to_json(cfg)}, {"checks", checks}};
  report["status"] = first_failure ? "check_failed" : "ok";
  report["first_failure"] = first_failure ? json(*first_failure) : json(nullptr);
  write_json(out_dir / "report.json", report);
  if (first_failure) {
    result.exit_code = kExitCheckFailed;
    result.message = *first_failure + " failed";
  }
  result.report = std::move(report);
  return result;
}

RunResult run_sweep(const ExperimentConfig& cfg, const std::string& parameter, const std::vector<double>& values,
                    const fs::path& out_dir, bool quiet, std::ostream& log) {
  RunResult result;
  if (values.empty()) {
    result.exit_code = kExitConfig;
    result.message = "sweep needs at least one value";
    return result;
  }
  fs::create_directories(out_dir);
  std::vector<RunResult> runs(values.size());
  std::vector<std::string> dirs(values.size());
  kernels::parallel_for(values.size(), Execution::kParallel, [&](std::size_t k) {
    std::ostringstream name;
    name << "run_" << k << "_" << parameter << "_" << values[k];
    dirs[k] = name.str();
    try {
      const ExperimentConfig run_cfg = apply_parameter(cfg, parameter, values[k]);
      std::ostringstream sink;
      runs[k] = run_simulate(run_cfg, out_dir / dirs[k], true, sink);
    } catch (const ConfigError& err) {
      runs[k].exit_code = kExitConfig;
      runs[k].message = err.what();
    } catch (const std::exception& err) {
      runs[k].exit_code = kExitConfig;
      runs[k].message = err.what();
    }
  });

  std::ofstream csv(out_dir / "sweep.csv");
  csv << "parameter,value,exit_code,status,initial_edge_max,final_edge_max,final_all_pairs_max,run_dir\n";
  auto opt = [](const std::optional<double>& v) {
    std::ostringstream os;
    if (v) os << std::setprecision(17) << *v;
    return os.str();
  };
  json rows = json::array();
  for (std::size_t k = 0; k < values.size(); ++k) {
    const RunResult& r = runs[k];
    const char* status = r.exit_code == kExitOk ? "ok"
                         : r.exit_code == kExitDivergence ? "diverged"
                         : r.exit_code == kExitCheckFailed ? "check_failed"
                                                             : "config_error";
    csv << parameter << ',' << std::setprecision(17) << values[k] << ',' << r.exit_code << ',' << status << ','
        << opt(r.initial_edge_max) << ',' << opt(r.final_edge_max) << ',' << opt(r.final_all_pairs_max) << ','
        << dirs[k] << '\n';
    if (!quiet) {
      log << "  " << parameter << "=" << values[k] << "  " << status;
      if (r.final_edge_max) log << "  final_edge_max=" << *r.final_edge_max;
      if (!r.message.empty()) log << "  (" << r.message << ")";
      log << '\n';
    }
    if (r.exit_code != kExitOk && result.exit_code == kExitOk) {
      result.exit_code = r.exit_code;
      result.message = parameter + "=" + opt(values[k]) + ": " + r.message;
    }
    rows.push_back({{"value", values[k]}, {"exit_code", r.exit_code}, {"status", status}});
  }
  result.report = {{"command", "sweep"}, {"parameter", parameter}, {"runs", rows}};
  return result;
}

}  // namespace nicons
