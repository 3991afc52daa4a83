#include "nicons/sim.hpp"

#include <cmath>
#include <sstream>

namespace nicons {

void IntegratorConfig::validate() const {
  if (!(step_s > 0.0) || !std::isfinite(step_s)) throw std::invalid_argument("step_s must be positive");
  if (!(t_end_s >= step_s) || !std::isfinite(t_end_s)) {
    throw std::invalid_argument("t_end_s must be at least step_s");
  }
  if (record_every == 0) throw std::invalid_argument("record_every must be a positive integer");
  const double ratio = t_end_s / step_s;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw std::invalid_argument("t_end_s must be an integer multiple of step_s");
  }
}

std::size_t IntegratorConfig::steps() const {
  validate();
  return static_cast<std::size_t>(std::llround(t_end_s / step_s));
}

namespace {

std::string divergence_message(double t) {
  std::ostringstream os;
  os << "divergence at t=" << t;
  return os.str();
}

// Shared stepping loop; `record(k, x)` is called for every recorded step k.
template <class Record>
void run(const VectorField& field, const Vec& x0, const IntegratorConfig& cfg, Record&& record) {
  const std::size_t steps = cfg.steps();
  if (!x0.allFinite()) throw DivergenceError(0.0, x0);
  Vec x = x0;
  record(std::size_t{0}, x);
  for (std::size_t k = 1; k <= steps; ++k) {
    Vec next = rk4_step(field, x, cfg.step_s);
    if (!next.allFinite()) throw DivergenceError(static_cast<double>(k) * cfg.step_s, x);
    x = std::move(next);
    if (k % cfg.record_every == 0 || k == steps) record(k, x);
  }
}

}  // namespace

DivergenceError::DivergenceError(double time, Vec last_finite_state)
    : std::runtime_error(divergence_message(time)), time_(time), last_state_(std::move(last_finite_state)) {}

Vec rk4_step(const VectorField& field, const Vec& x, double h) {
  const Vec k1 = field(x);
  const Vec k2 = field(x + (0.5 * h) * k1);
  const Vec k3 = field(x + (0.5 * h) * k2);
  const Vec k4 = field(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

StateHistory integrate_field(const VectorField& field, const Vec& x0, const IntegratorConfig& cfg) {
  StateHistory out;
  run(field, x0, cfg, [&](std::size_t k, const Vec& x) {
    out.times.push_back(static_cast<double>(k) * cfg.step_s);
    out.states.push_back(x);
  });
  return out;
}

Trajectory integrate(const ClosedLoop& cl, const Vec& x0, const IntegratorConfig& cfg) {
  if (static_cast<std::size_t>(x0.size()) != cl.layout().total()) {
    throw std::invalid_argument("initial state has " + std::to_string(x0.size()) + " entries, expected " +
                                std::to_string(cl.layout().total()));
  }
  Trajectory traj;
  traj.layout = cl.layout();
  traj.step_s = cfg.step_s;
  const VectorField field = [&cl](const Vec& x) { return cl.derivative(x); };
  run(field, x0, cfg, [&](std::size_t k, const Vec& x) {
    traj.times.push_back(static_cast<double>(k) * cfg.step_s);
    traj.samples.push_back(cl.evaluate(x));
  });
  return traj;
}

OrderEstimate convergence_order(const VectorField& field, const Vec& x0, const IntegratorConfig& cfg) {
  auto terminal = [&](double h) {
    IntegratorConfig c = cfg;
    c.step_s = h;
    c.record_every = c.steps();
    return integrate_field(field, x0, c).states.back();
  };
  const Vec coarse = terminal(cfg.step_s);
  const Vec mid = terminal(cfg.step_s / 2.0);
  const Vec fine = terminal(cfg.step_s / 4.0);
  const double e1 = (coarse - mid).norm();
  const double e2 = (mid - fine).norm();
  OrderEstimate est;
  if (e1 == 0.0 && e2 == 0.0) {
    est.exact = true;
    return est;
  }
  est.order = std::log2(e1 / e2);
  return est;
}

OrderEstimate convergence_order(const ClosedLoop& cl, const Vec& x0, const IntegratorConfig& cfg) {
  return convergence_order([&cl](const Vec& x) { return cl.derivative(x); }, x0, cfg);
}

}  // namespace nicons
