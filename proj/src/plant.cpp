#include "nicons/plant.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nicons {

void PendulumParams::validate() const {
  if (!(mass_kg > 0.0) || !(length_m > 0.0) || !(kappa > 0.0) || !(gravity > 0.0)) {
    throw std::invalid_argument("pendulum parameters m, l, kappa, g must all be positive");
  }
}

NonlinearPlant pendulum_plant(const PendulumParams& p) {
  p.validate();
  const double inertia = p.mass_kg * p.length_m * p.length_m;
  const double mgl = p.mass_kg * p.gravity * p.length_m;
  const double kappa = p.kappa;
  NonlinearPlant plant;
  plant.state_dim = 2;
  plant.io_dim = 1;
  plant.f = [=](const Vec& x, const Vec& u) {
    Vec dx(2);
    dx(0) = x(1);
    dx(1) = (-kappa * x(0) - mgl * std::sin(x(0)) + u(0)) / inertia;
    return dx;
  };
  plant.h = [](const Vec& x) { return Vec::Constant(1, x(0)); };
  plant.dh = [](const Vec&) {
    Mat j(1, 2);
    j << 1.0, 0.0;
    return j;
  };
  return plant;
}

StorageFunction pendulum_storage(const PendulumParams& p) {
  p.validate();
  const double inertia = p.mass_kg * p.length_m * p.length_m;
  const double mgl = p.mass_kg * p.gravity * p.length_m;
  const double kappa = p.kappa;
  StorageFunction v;
  v.value = [=](const Vec& x) {
    return 0.5 * kappa * x(0) * x(0) + 0.5 * inertia * x(1) * x(1) + mgl * (1.0 - std::cos(x(0)));
  };
  v.gradient = [=](const Vec& x) {
    Vec g(2);
    g(0) = kappa * x(0) + mgl * std::sin(x(0));
    g(1) = inertia * x(1);
    return g;
  };
  return v;
}

StorageFunction quadratic_storage(const Mat& P) {
  if (P.rows() != P.cols()) throw std::invalid_argument("quadratic storage needs a square P");
  const Mat sym = 0.5 * (P + P.transpose());
  StorageFunction v;
  v.value = [sym](const Vec& x) { return 0.5 * x.dot(sym * x); };
  v.gradient = [sym](const Vec& x) -> Vec { return sym * x; };
  return v;
}

StorageFunction controller_storage(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("a and b must be positive");
  return quadratic_storage(Mat::Constant(1, 1, b / a));
}

NonlinearPlant linear_plant(const StateSpace& sys) {
  sys.validate();
  if (sys.D.cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument("closed-loop linear systems must be strictly proper (D = 0)");
  }
  NonlinearPlant plant;
  plant.state_dim = sys.states();
  plant.io_dim = sys.inputs();
  plant.f = [A = sys.A, B = sys.B](const Vec& x, const Vec& u) -> Vec { return A * x + B * u; };
  plant.h = [C = sys.C](const Vec& x) -> Vec { return C * x; };
  plant.dh = [C = sys.C](const Vec&) -> Mat { return C; };
  return plant;
}

namespace {

Mat central_difference_jacobian(const NonlinearPlant& plant, const Vec& x) {
  Mat j(plant.io_dim, plant.state_dim);
  Vec probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double step = 1e-6 * (1.0 + std::abs(x(k)));
    probe(k) = x(k) + step;
    const Vec up = plant.h(probe);
    probe(k) = x(k) - step;
    const Vec down = plant.h(probe);
    probe(k) = x(k);
    j.col(k) = (up - down) / (2.0 * step);
  }
  return j;
}

std::string describe(const Vec& v) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << "]";
  return os.str();
}

}  // namespace

Mat output_jacobian(const NonlinearPlant& plant, const Vec& x) {
  if (plant.dh) return plant.dh(x);
  return central_difference_jacobian(plant, x);
}

Vec output_rate(const NonlinearPlant& plant, const Vec& x, const Vec& u) {
  return output_jacobian(plant, x) * plant.f(x, u);
}

double jacobian_mismatch(const NonlinearPlant& plant, const Vec& x) {
  if (!plant.dh) return 0.0;
  return (plant.dh(x) - central_difference_jacobian(plant, x)).cwiseAbs().maxCoeff();
}

double supply_ni(const Vec& u, const Vec& ydot) {
  if (u.size() != ydot.size()) throw std::invalid_argument("supply_ni: dimension mismatch");
  return u.dot(ydot);
}

double supply_osni(const Vec& u, const Vec& ydot, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("supply_osni: delta must be positive");
  if (u.size() != ydot.size()) throw std::invalid_argument("supply_osni: dimension mismatch");
  return u.dot(ydot) - delta * ydot.squaredNorm();
}

Vec equilibrium_solve(const NonlinearPlant& plant, const Vec& ubar, const Vec& x0) {
  if (static_cast<std::size_t>(x0.size()) != plant.state_dim ||
      static_cast<std::size_t>(ubar.size()) != plant.io_dim) {
    throw std::invalid_argument("equilibrium_solve: dimension mismatch");
  }
  const auto p = x0.size();
  Vec x = x0;
  Vec r = plant.f(x, ubar);
  for (int iter = 0; iter < 100; ++iter) {
    if (!r.allFinite()) break;
    if (r.lpNorm<Eigen::Infinity>() < kEquilibriumTolerance) return x;
    Mat jac(p, p);
    Vec probe = x;
    for (Eigen::Index k = 0; k < p; ++k) {
      const double step = 1e-7 * (1.0 + std::abs(x(k)));
      probe(k) = x(k) + step;
      jac.col(k) = (plant.f(probe, ubar) - r) / step;
      probe(k) = x(k);
    }
    const Vec dx = jac.fullPivLu().solve(-r);
    if (!dx.allFinite()) break;
    // Backtrack on the residual norm so large Newton jumps cannot cycle.
    const double norm0 = r.norm();
    double lambda = 1.0;
    Vec candidate = x + dx;
    Vec rc = plant.f(candidate, ubar);
    for (int half = 0; half < 40 && !(rc.allFinite() && rc.norm() < norm0); ++half) {
      lambda *= 0.5;
      candidate = x + lambda * dx;
      rc = plant.f(candidate, ubar);
    }
    x = candidate;
    r = rc;
  }
  if (r.allFinite() && r.lpNorm<Eigen::Infinity>() < kEquilibriumTolerance) return x;
  throw std::runtime_error("no equilibrium found from this guess (input " + describe(ubar) + ")");
}

GammaReport gamma_estimate(const NonlinearPlant& plant, const Mat& dc_map,
                           std::span<const Vec> inputs, Execution exec) {
  const auto m = static_cast<Eigen::Index>(plant.io_dim);
  if (inputs.empty()) throw std::invalid_argument("gamma_estimate: no inputs given");
  for (const Vec& u : inputs) {
    if (u.size() == 0 || u.size() % m != 0 || u.size() != dc_map.cols() || dc_map.rows() != u.size()) {
      throw std::invalid_argument("gamma_estimate: input size does not match the DC map");
    }
    if (u.squaredNorm() == 0.0) throw std::invalid_argument("gamma_estimate: inputs must be nonzero");
  }
  GammaReport report;
  report.ratios.assign(inputs.size(), 0.0);
  kernels::parallel_for(inputs.size(), exec, [&](std::size_t k) {
    const Vec& u1 = inputs[k];
    const Eigen::Index nodes = u1.size() / m;
    Vec y1(u1.size());
    for (Eigen::Index i = 0; i < nodes; ++i) {
      const Vec xbar = equilibrium_solve(plant, u1.segment(i * m, m), Vec::Zero(plant.state_dim));
      y1.segment(i * m, m) = plant.h(xbar);
    }
    const Vec y2 = dc_map * y1;
    report.ratios[k] = u1.dot(y2) / u1.squaredNorm();
  });
  const ArgMax best = kernels::argmax_serial(inputs.size(), [&](std::size_t k) { return report.ratios[k]; });
  report.gamma_hat = best.value;
  report.maximizing_input = inputs[best.index];
  return report;
}

GammaReport gamma_estimate(const NonlinearPlant& plant, const StateSpace& controller,
                           std::span<const Vec> inputs, Execution exec) {
  return gamma_estimate(plant, dc_gain(controller), inputs, exec);
}

std::vector<Vec> scalar_input_grid(double lo, double hi, std::size_t count) {
  if (count < 2 || !(hi > lo)) throw std::invalid_argument("scalar_input_grid: need lo < hi, count >= 2");
  std::vector<Vec> grid;
  grid.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double u = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    if (u != 0.0) grid.push_back(Vec::Constant(1, u));
  }
  return grid;
}

}  // namespace nicons
