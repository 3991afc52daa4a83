#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nicons/network.hpp"

namespace nicons {

struct IntegratorConfig {
  double step_s = 1e-3;
  double t_end_s = 20.0;
  std::size_t record_every = 1;

  // Throws std::invalid_argument unless step_s > 0, t_end_s >= step_s,
  // record_every >= 1 and t_end_s is an integer multiple of step_s.
  void validate() const;
  std::size_t steps() const;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double time, Vec last_finite_state);

  double time() const { return time_; }
  const Vec& last_finite_state() const { return last_state_; }

 private:
  double time_;
  Vec last_state_;
};

// Recorded samples of a closed-loop run. times[k] = k_recorded * step_s
// exactly (no accumulation); the final instant t_end is always recorded.
struct Trajectory {
  Layout layout;
  double step_s = 0.0;
  std::vector<double> times;
  std::vector<Signals> samples;

  std::size_t size() const { return times.size(); }
};

using VectorField = std::function<Vec(const Vec&)>;

// One classical fourth-order Runge–Kutta step.
Vec rk4_step(const VectorField& field, const Vec& x, double h);

// Fixed-step RK4 on an autonomous field; returns the recorded states.
struct StateHistory {
  std::vector<double> times;
  std::vector<Vec> states;
};
StateHistory integrate_field(const VectorField& field, const Vec& x0, const IntegratorConfig& cfg);

// Fixed-step RK4 on the closed loop. Signals at each recorded state are
// recomputed exactly from the vector field. Throws DivergenceError on a
// non-finite state.
Trajectory integrate(const ClosedLoop& cl, const Vec& x0, const IntegratorConfig& cfg);

// Observed order from terminal states at h, h/2 and h/4:
//   p = log2(|x_h − x_{h/2}| / |x_{h/2} − x_{h/4}|).
// `exact` is set when both differences vanish (nothing to estimate).
struct OrderEstimate {
  bool exact = false;
  double order = 0.0;
};
OrderEstimate convergence_order(const VectorField& field, const Vec& x0, const IntegratorConfig& cfg);
OrderEstimate convergence_order(const ClosedLoop& cl, const Vec& x0, const IntegratorConfig& cfg);

}  // namespace nicons
