#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nicons/kernels.hpp"
#include "nicons/linsys.hpp"

namespace nicons {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// xdot = f(x, u),  y = h(x).
//
// f is assumed Lipschitz and h continuously differentiable; neither is
// checked. Every callable must be safe to invoke concurrently. `dh` may be
// left empty, in which case output rates fall back to a central-difference
// Jacobian of h.
struct NonlinearPlant {
  std::size_t state_dim = 0;
  std::size_t io_dim = 0;
  std::function<Vec(const Vec& x, const Vec& u)> f;
  std::function<Vec(const Vec& x)> h;
  std::function<Mat(const Vec& x)> dh;
};

struct StorageFunction {
  std::function<double(const Vec& x)> value;
  std::function<Vec(const Vec& x)> gradient;
};

struct PendulumParams {
  double mass_kg = 1.0;
  double length_m = 0.5;
  double kappa = 5.0;  // torsional spring, N·m/rad
  double gravity = 9.8;

  void validate() const;
};

// Pendulum with a torsional spring at the pivot; x = (angle, rate), y = angle.
NonlinearPlant pendulum_plant(const PendulumParams& p);

// V(x) = ½κx₁² + ½ml²x₂² + mgl(1 − cos x₁).
StorageFunction pendulum_storage(const PendulumParams& p);

// V(x) = ½ xᵀ P x with P symmetric.
StorageFunction quadratic_storage(const Mat& P);

// V(x) = (b / 2a) x², the storage of a / (s + b) in its (−b, a, 1) realisation.
StorageFunction controller_storage(double a, double b);

// Wraps a strictly proper linear system (D must be zero) as a plant.
NonlinearPlant linear_plant(const StateSpace& sys);

// Exact dh(x) when available, otherwise a central-difference estimate.
Mat output_jacobian(const NonlinearPlant& plant, const Vec& x);

// ydot = dh(x) f(x, u).
Vec output_rate(const NonlinearPlant& plant, const Vec& x, const Vec& u);

// Largest entry-wise gap between dh and a central-difference Jacobian at x.
double jacobian_mismatch(const NonlinearPlant& plant, const Vec& x);

// uᵀ ydot.
double supply_ni(const Vec& u, const Vec& ydot);

// uᵀ ydot − δ|ydot|²; δ must be positive.
double supply_osni(const Vec& u, const Vec& ydot, double delta);

inline constexpr double kEquilibriumTolerance = 1e-10;

// Damped Newton iteration on f(x, ubar) = 0 with a forward-difference
// Jacobian. Returns x with ||f(x, ubar)||_inf < 1e-10, or throws
// std::runtime_error("no equilibrium found from this guess").
Vec equilibrium_solve(const NonlinearPlant& plant, const Vec& ubar, const Vec& x0);

struct GammaReport {
  double gamma_hat = 0.0;
  Vec maximizing_input;
  std::vector<double> ratios;  // one per input, in order
};

// Estimates the steady-state gain bound  Ū₁ᵀȲ₂ ≤ γ|Ū₁|²  over a set of
// constant inputs. Each Ū₁ stacks one m-vector per node; every node's plant
// is driven to equilibrium from x = 0, the stacked outputs Ȳ₁ are mapped
// through `dc_map` to Ȳ₂, and the largest ratio wins.
GammaReport gamma_estimate(const NonlinearPlant& plant, const Mat& dc_map,
                           std::span<const Vec> inputs, Execution exec = Execution::kParallel);

// Pair form: Ȳ₂ = M(0) Ȳ₁.
GammaReport gamma_estimate(const NonlinearPlant& plant, const StateSpace& controller,
                           std::span<const Vec> inputs, Execution exec = Execution::kParallel);

// `count` evenly spaced scalar inputs over [lo, hi], dropping an exact zero.
std::vector<Vec> scalar_input_grid(double lo, double hi, std::size_t count);

}  // namespace nicons
