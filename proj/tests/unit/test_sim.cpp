#include <gtest/gtest.h>

#include <cmath>

#include "nicons/sim.hpp"
#include "support.hpp"

namespace nicons {
namespace {

using testing::vec;

TEST(Integrator, ConfigValidation) {
  IntegratorConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.steps(), 20000u);
  c.step_s = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.step_s = 0.003;
  c.t_end_s = 0.01;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.record_every = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Integrator, SingleStepMatchesTaylorPolynomial) {
  // For ẋ = λx, one RK4 step multiplies by 1 + z + z²/2 + z³/6 + z⁴/24.
  const double lambda = -1.7, h = 0.1, z = lambda * h;
  const VectorField f = [&](const Vec& x) -> Vec { return lambda * x; };
  const Vec x1 = rk4_step(f, vec({1.0}), h);
  EXPECT_NEAR(x1(0), 1.0 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24, 1e-15);
}

TEST(Integrator, RecordedTimesAreExactMultiples) {
  const VectorField f = [](const Vec& x) -> Vec { return -x; };
  IntegratorConfig c;
  c.step_s = 0.1;
  c.t_end_s = 1.0;
  c.record_every = 3;
  const StateHistory h = integrate_field(f, vec({1.0}), c);
  ASSERT_EQ(h.times.size(), 5u);  // 0, 3, 6, 9 and the final step 10
  EXPECT_EQ(h.times[1], 3 * 0.1);
  EXPECT_EQ(h.times.back(), 10 * 0.1);
  EXPECT_NEAR(h.states.back()(0), std::exp(-1.0), 1e-6);
}

TEST(Integrator, OrderOnLinearOscillatorIsFour) {
  const VectorField f = [](const Vec& x) -> Vec { return vec({x(1), -x(0)}); };
  IntegratorConfig c;
  c.step_s = 0.05;
  c.t_end_s = 2.0;
  const OrderEstimate p = convergence_order(f, vec({1.0, 0.0}), c);
  EXPECT_FALSE(p.exact);
  EXPECT_NEAR(p.order, 4.0, 0.1);
}

TEST(Integrator, ConstantFieldIsIntegratedExactly) {
  const VectorField f = [](const Vec&) -> Vec { return vec({0.0}); };
  IntegratorConfig c;
  c.step_s = 0.5;
  c.t_end_s = 1.0;
  EXPECT_TRUE(convergence_order(f, vec({1.0}), c).exact);
}

TEST(Integrator, FourPendulumOrder) {
  const ClosedLoop cl = testing::four_pendulum_loop();
  IntegratorConfig c;
  c.step_s = 0.01;
  c.t_end_s = 2.0;
  EXPECT_NEAR(convergence_order(cl, testing::four_pendulum_initial_state(cl), c).order, 4.0, 0.3);
}

TEST(Integrator, DivergenceIsReportedWithLastFiniteState) {
  StateSpace unstable = first_order(1.0, -400.0);
  const ClosedLoop cl = pair_interconnect(pendulum_plant({}), linear_plant(unstable));
  IntegratorConfig c;
  c.step_s = 0.01;
  c.t_end_s = 20.0;
  try {
    integrate(cl, vec({0.1, 0.0, 0.1}), c);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LT(e.time(), 20.0);
    EXPECT_TRUE(e.last_finite_state().allFinite());
    EXPECT_NE(std::string(e.what()).find("divergence at t="), std::string::npos);
  }
}

TEST(Integrator, TrajectoryHasSignalsAtEverySample) {
  const ClosedLoop cl = testing::four_pendulum_loop();
  IntegratorConfig c;
  c.step_s = 0.01;
  c.t_end_s = 0.5;
  c.record_every = 5;
  const Trajectory t = integrate(cl, testing::four_pendulum_initial_state(cl), c);
  ASSERT_EQ(t.size(), 11u);
  ASSERT_EQ(t.samples.size(), t.times.size());
  EXPECT_EQ(t.samples.front().x, testing::four_pendulum_initial_state(cl));
  for (std::size_t k = 0; k < t.size(); ++k) EXPECT_EQ(t.samples[k].xdot, cl.derivative(t.samples[k].x));
  EXPECT_THROW(integrate(cl, Vec::Zero(3), c), std::invalid_argument);
}

}  // namespace
}  // namespace nicons
