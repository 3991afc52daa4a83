#include "nicons/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nicons {

namespace {

// Builds a report from signed residuals r_k = lhs − rhs, evaluated once per
// index; `time_of(k)` maps an index to its sample instant.
template <class Residual, class TimeOf>
CheckReport residual_report(std::string name, std::size_t count, double tolerance, Execution exec,
                            Residual&& residual, TimeOf&& time_of) {
  std::vector<double> r(count);
  kernels::parallel_for(count, exec, [&](std::size_t k) { r[k] = residual(k); });
  CheckReport rep;
  rep.name = std::move(name);
  rep.tolerance = tolerance;
  rep.samples = count;
  if (count == 0) return rep;
  const ArgMax worst = kernels::argmax_serial(count, [&](std::size_t k) { return r[k]; });
  const ArgMax largest = kernels::argmax_serial(count, [&](std::size_t k) { return std::abs(r[k]); });
  rep.max_violation = std::max(0.0, worst.value);
  rep.time_of_max = time_of(worst.value > 0.0 ? worst.index : largest.index);
  rep.max_abs_residual = largest.value;
  rep.pass = rep.max_violation <= tolerance;
  return rep;
}

void require_node(const Trajectory& traj, std::size_t node) {
  if (node >= traj.layout.nodes) {
    throw std::invalid_argument("node " + std::to_string(node) + " out of range (trajectory has " +
                                std::to_string(traj.layout.nodes) + ")");
  }
}

void require_network(const Trajectory& traj, const Graph& g) {
  if (traj.layout.mode != LoopMode::kNetwork) {
    throw std::invalid_argument("check needs a network-mode trajectory");
  }
  if (g.n() != traj.layout.nodes) {
    throw std::invalid_argument("graph node count does not match the trajectory");
  }
}

// Σ over edges (each counted once) of |Δẏ_ij|² for per-node controller rates.
double edge_rate_energy(const Vec& ctrl_rates, std::size_t m, const Graph& g) {
  const auto mm = static_cast<Eigen::Index>(m);
  double sum = 0.0;
  for (const Edge& e : g.edges()) {
    sum += (ctrl_rates.segment(e.i * mm, mm) - ctrl_rates.segment(e.j * mm, mm)).squaredNorm();
  }
  return sum;
}

}  // namespace

CheckReport check_ni_dissipation(const Trajectory& traj, const StorageFunction& v, std::size_t node,
                                 double tolerance, Execution exec) {
  require_node(traj, node);
  const Layout& L = traj.layout;
  const auto m = static_cast<Eigen::Index>(L.io_dim);
  const auto off = static_cast<Eigen::Index>(L.plant_offset(node));
  const auto p = static_cast<Eigen::Index>(L.plant_states);
  return residual_report(
      "ni_dissipation[" + std::to_string(node) + "]", traj.size(), tolerance, exec,
      [&](std::size_t k) {
        const Signals& s = traj.samples[k];
        const double vdot = v.gradient(s.x.segment(off, p)).dot(s.xdot.segment(off, p));
        return vdot - supply_ni(s.plant_inputs.segment(node * m, m), s.plant_output_rates.segment(node * m, m));
      },
      [&](std::size_t k) { return traj.times[k]; });
}

CheckReport check_osni_dissipation(const Trajectory& traj, const StorageFunction& v, double delta,
                                   std::size_t node, double tolerance, Execution exec) {
  require_node(traj, node);
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const Layout& L = traj.layout;
  const auto m = static_cast<Eigen::Index>(L.io_dim);
  const auto off = static_cast<Eigen::Index>(L.ctrl_offset(node));
  const auto q = static_cast<Eigen::Index>(L.ctrl_states);
  return residual_report(
      "osni_dissipation[" + std::to_string(node) + "]", traj.size(), tolerance, exec,
      [&](std::size_t k) {
        const Signals& s = traj.samples[k];
        const double vdot = v.gradient(s.x.segment(off, q)).dot(s.xdot.segment(off, q));
        return vdot - supply_osni(s.ctrl_inputs.segment(node * m, m),
                                  s.ctrl_output_rates.segment(node * m, m), delta);
      },
      [&](std::size_t k) { return traj.times[k]; });
}

CheckReport check_osni_like_network(const Trajectory& traj, const StorageFunction& v2, const Graph& g,
                                    double delta, double tolerance, Execution exec) {
  require_network(traj, g);
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const Layout& L = traj.layout;
  const auto q = static_cast<Eigen::Index>(L.ctrl_states);
  return residual_report(
      "osni_like_network", traj.size(), tolerance, exec,
      [&](std::size_t k) {
        const Signals& s = traj.samples[k];
        double lhs = 0.0;
        for (const Edge& e : g.edges()) {
          const Vec d = s.x.segment(L.ctrl_offset(e.i), q) - s.x.segment(L.ctrl_offset(e.j), q);
          const Vec dd = s.xdot.segment(L.ctrl_offset(e.i), q) - s.xdot.segment(L.ctrl_offset(e.j), q);
          lhs += 0.5 * (v2.gradient(d).dot(dd) + v2.gradient(-d).dot(-dd));
        }
        // ½δ over both orientations = δ over each edge once.
        const double rhs = s.ctrl_inputs.dot(s.net_output_rates) -
                           delta * edge_rate_energy(s.ctrl_output_rates, L.io_dim, g);
        return lhs - rhs;
      },
      [&](std::size_t k) { return traj.times[k]; });
}

CheckReport check_pair_identities(const Trajectory& traj, double tolerance) {
  if (traj.layout.mode != LoopMode::kNetwork || traj.layout.nodes != 2) {
    throw std::invalid_argument("pair identities need a two-node network trajectory");
  }
  const auto m = static_cast<Eigen::Index>(traj.layout.io_dim);
  auto relative = [](double lhs, double rhs) {
    return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
  };
  CheckReport rep = residual_report(
      "pair_identities", traj.size(), tolerance, Execution::kSerial,
      [&](std::size_t k) {
        const Signals& s = traj.samples[k];
        const Vec du = s.ctrl_inputs.head(m) - s.ctrl_inputs.tail(m);
        const Vec dydot = s.ctrl_output_rates.head(m) - s.ctrl_output_rates.tail(m);
        const double first = relative(s.ctrl_inputs.dot(s.net_output_rates), du.dot(dydot));
        const double second = relative(s.net_output_rates.squaredNorm(), 2.0 * dydot.squaredNorm());
        return std::max(first, second);
      },
      [&](std::size_t k) { return traj.times[k]; });
  return rep;
}

CheckReport check_lyapunov_decrease(const Trajectory& traj, const CompositeStorage& cs, double tolerance,
                                    Execution exec) {
  const std::size_t n = traj.size();
  std::vector<double> w(n);
  kernels::parallel_for(n, exec, [&](std::size_t k) { w[k] = cs.value(traj.samples[k].x); });
  return residual_report(
      "lyapunov_decrease", n > 0 ? n - 1 : 0, tolerance, Execution::kSerial,
      [&](std::size_t k) { return w[k + 1] - w[k]; }, [&](std::size_t k) { return traj.times[k + 1]; });
}

CheckReport check_lyapunov_rate(const Trajectory& traj, const CompositeStorage& cs, double delta,
                                const Graph& g, double tolerance, Execution exec) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const Layout& L = traj.layout;
  if (L.mode == LoopMode::kNetwork) require_network(traj, g);
  return residual_report(
      "lyapunov_rate", traj.size(), tolerance, exec,
      [&](std::size_t k) {
        const Signals& s = traj.samples[k];
        const double bound = L.mode == LoopMode::kPair
                                 ? delta * s.ctrl_output_rates.squaredNorm()
                                 : delta * edge_rate_energy(s.ctrl_output_rates, L.io_dim, g);
        return cs.rate(s.x, s.xdot) + bound;
      },
      [&](std::size_t k) { return traj.times[k]; });
}

CheckReport check_lyapunov_monotone(const Trajectory& traj, const CompositeStorage& cs, double delta,
                                   const Graph& g, double tolerance, Execution exec) {
  const CheckReport dec = check_lyapunov_decrease(traj, cs, tolerance, exec);
  const CheckReport rate = check_lyapunov_rate(traj, cs, delta, g, tolerance, exec);
  CheckReport rep = dec.max_violation >= rate.max_violation ? dec : rate;
  rep.name = "lyapunov_monotone";
  rep.max_abs_residual = std::max(dec.max_abs_residual, rate.max_abs_residual);
  rep.samples = rate.samples;
  rep.pass = dec.pass && rate.pass;
  return rep;
}

ConsensusPoint consensus_at(const Vec& outputs, std::size_t io_dim, const Graph& g) {
  const auto m = static_cast<Eigen::Index>(io_dim);
  auto gap = [&](std::size_t i, std::size_t j) {
    return (outputs.segment(i * m, m) - outputs.segment(j * m, m)).norm();
  };
  ConsensusPoint c;
  for (const Edge& e : g.edges()) c.edge_max = std::max(c.edge_max, gap(e.i, e.j));
  for (std::size_t i = 0; i < g.n(); ++i)
    for (std::size_t j = i + 1; j < g.n(); ++j) c.all_pairs_max = std::max(c.all_pairs_max, gap(i, j));
  return c;
}

std::vector<ConsensusPoint> consensus_metric(const Trajectory& traj, const Graph& g) {
  require_network(traj, g);
  std::vector<ConsensusPoint> out;
  out.reserve(traj.size());
  for (const Signals& s : traj.samples) out.push_back(consensus_at(s.plant_outputs, traj.layout.io_dim, g));
  return out;
}

CheckReport check_steady_state_relation(const ControllerNetwork& net, const Vec& u2bar, double tolerance) {
  if (static_cast<std::size_t>(u2bar.size()) != net.nodes() * net.io_dim()) {
    throw std::invalid_argument("steady-state input must have n*m entries");
  }
  Eigen::EigenSolver<Mat> eig(net.node_controller().A, false);
  const double slowest = eig.eigenvalues().real().cwiseAbs().minCoeff();
  const double fastest = eig.eigenvalues().cwiseAbs().maxCoeff();
  const double horizon = 40.0 / slowest;
  const auto steps = static_cast<std::size_t>(std::ceil(std::max(100.0, horizon * fastest / 0.05)));
  IntegratorConfig cfg;
  cfg.step_s = horizon / static_cast<double>(steps);
  cfg.t_end_s = cfg.step_s * static_cast<double>(steps);
  cfg.record_every = steps;
  const VectorField field = [&](const Vec& xc) { return net.derivative(xc, u2bar); };
  const StateHistory hist = integrate_field(field, Vec::Zero(net.state_dim()), cfg);
  const Vec y2 = net.outputs(hist.states.back());
  const Vec expected = net.dc_map() * u2bar;
  const double gap = (y2 - expected).lpNorm<Eigen::Infinity>();

  CheckReport rep;
  rep.name = "steady_state_relation";
  rep.samples = 1;
  rep.tolerance = tolerance;
  rep.max_violation = gap;
  rep.max_abs_residual = gap;
  rep.time_of_max = hist.times.back();
  rep.pass = gap <= tolerance;
  return rep;
}

ConsensusOutcome classify_outcome(const Trajectory& traj, const Graph& g, double tolerance) {
  require_network(traj, g);
  if (traj.size() == 0) return ConsensusOutcome::kUndetermined;
  const Signals& last = traj.samples.back();
  const Layout& L = traj.layout;
  const double plant_norm = last.x.head(L.nodes * L.plant_states).lpNorm<Eigen::Infinity>();
  if (plant_norm <= tolerance) return ConsensusOutcome::kStatesToZero;
  if (consensus_at(last.plant_outputs, L.io_dim, g).all_pairs_max <= tolerance) {
    return ConsensusOutcome::kOutputConsensus;
  }
  return ConsensusOutcome::kUndetermined;
}

std::string to_string(ConsensusOutcome outcome) {
  switch (outcome) {
    case ConsensusOutcome::kStatesToZero: return "states_to_zero";
    case ConsensusOutcome::kOutputConsensus: return "output_consensus";
    case ConsensusOutcome::kUndetermined: return "undetermined";
  }
  return "undetermined";
}

nlohmann::json to_json(const CheckReport& r) {
  return {{"max_violation", r.max_violation}, {"time_of_max", r.time_of_max}, {"pass", r.pass},
          {"tolerance", r.tolerance},         {"max_abs_residual", r.max_abs_residual},
          {"samples", r.samples}};
}

nlohmann::json reports_to_json(std::span<const CheckReport> reports) {
  nlohmann::json doc = nlohmann::json::object();
  for (const CheckReport& r : reports) doc[r.name] = to_json(r);
  return doc;
}

}  // namespace nicons
