#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nicons/network.hpp"
#include "support.hpp"

namespace nicons {
namespace {

using testing::four_node_graph;
using testing::vec;

Vec random_vec(std::mt19937& rng, Eigen::Index n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = u(rng);
  return v;
}

TEST(ControllerNetwork, OutputsEqualKroneckerRealization) {
  const ControllerNetwork net = build_controller_network(first_order(3.0, 2.0), four_node_graph());
  const StateSpace real = net.realization();
  std::mt19937 rng(1);
  for (int k = 0; k < 20; ++k) {
    const Vec xc = random_vec(rng, 4, 2.0);
    const Vec u = random_vec(rng, 4, 2.0);
    EXPECT_LE((net.outputs(xc) - kron(laplacian(four_node_graph()), Eigen::MatrixXd::Ones(1, 1)) * xc).norm(), 1e-14);
    EXPECT_LE((net.derivative(xc, u) - (real.A * xc + real.B * u)).norm(), 1e-14);
  }
  EXPECT_EQ(net.dc_map(), 1.5 * laplacian(four_node_graph()));
}

TEST(ControllerNetwork, IdenticalNodesCancelExactly) {
  const ControllerNetwork net = build_controller_network(first_order(3.0, 2.0), four_node_graph());
  EXPECT_EQ(net.outputs(Vec::Constant(4, 0.123456789)), Vec::Zero(4));
}

TEST(ControllerNetwork, RejectsUnstableOrFeedthroughControllers) {
  EXPECT_THROW(ControllerNetwork(first_order(1.0, -1.0), four_node_graph()), std::domain_error);
  StateSpace d = first_order(1.0, 1.0);
  d.D(0, 0) = 0.5;
  EXPECT_THROW(ControllerNetwork(d, four_node_graph()), std::invalid_argument);
}

TEST(ControllerNetwork, WarnsOnDisconnectedGraph) {
  std::ostringstream captured;
  auto* old = std::clog.rdbuf(captured.rdbuf());
  build_controller_network(first_order(1.0, 1.0), Graph(3, {{0, 1}}));
  std::clog.rdbuf(old);
  EXPECT_NE(captured.str().find("connected"), std::string::npos);
}

TEST(ClosedLoop, DisconnectedGraphIsRejected) {
  const Graph g(3, {{0, 1}});
  try {
    network_interconnect(pendulum_plant({}), ControllerNetwork(first_order(1.0, 1.0), g));
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "consensus requires a connected graph");
  }
}

TEST(ClosedLoop, NetworkLayoutAndFeedback) {
  const ClosedLoop cl = testing::four_pendulum_loop();
  EXPECT_EQ(cl.layout().total(), 12u);
  EXPECT_EQ(cl.layout().ctrl_offset(0), 8u);
  std::mt19937 rng(9);
  const Vec x = random_vec(rng, 12, 1.5);
  const Signals s = cl.evaluate(x);
  EXPECT_EQ(s.plant_inputs, s.net_outputs);
  EXPECT_EQ(s.ctrl_inputs, s.plant_outputs);
  EXPECT_EQ(s.xdot, cl.derivative(x));
  // Ẏ₂ = (L ⊗ C) ẋ_c.
  EXPECT_LE((s.net_output_rates - laplacian(four_node_graph()) * s.xdot.tail(4)).norm(), 1e-12);
  // Plant velocity equation uses u = Y₂ with a positive sign.
  const double u0 = s.net_outputs(0);
  EXPECT_NEAR(s.xdot(1), (-5.0 * x(0) - 4.9 * std::sin(x(0)) + u0) / 0.25, 1e-12);
  const Signals flipped = cl.with_feedback_sign(-1.0).evaluate(x);
  EXPECT_EQ(flipped.plant_inputs, -s.net_outputs);
}

TEST(ClosedLoop, PairModeWiring) {
  const ClosedLoop cl = testing::pendulum_pair_loop();
  EXPECT_EQ(cl.layout().total(), 3u);
  const Signals s = cl.evaluate(vec({0.4, 0.1, 0.7}));
  EXPECT_EQ(s.plant_inputs(0), 0.7);
  EXPECT_EQ(s.ctrl_inputs(0), 0.4);
  EXPECT_EQ(s.net_outputs, s.ctrl_outputs);
  EXPECT_NEAR(s.xdot(2), -10.0 * 0.7 + 10.0 * 0.4, 1e-14);
  EXPECT_THROW(pair_interconnect(pendulum_plant({}), linear_plant(laplacian_realization(laplacian(Graph::path(2)),
                                                                                          first_order(1.0, 1.0)))),
               std::invalid_argument);
}

TEST(CompositeStorage, PairValueByHand) {
  const ClosedLoop cl = testing::pendulum_pair_loop();
  const CompositeStorage w = composite_storage(cl, pendulum_storage({}), controller_storage(10.0, 10.0));
  const Vec x = vec({0.4, 0.1, 0.7});
  const double v1 = 0.5 * 5.0 * 0.16 + 0.5 * 0.25 * 0.01 + 4.9 * (1.0 - std::cos(0.4));
  const double v2 = 0.5 * 0.49;
  EXPECT_NEAR(w.value(x), v1 + v2 - 0.4 * 0.7, 1e-14);
  EXPECT_NEAR(w.cross_term(x), 0.28, 1e-15);
}

TEST(CompositeStorage, NetworkControllerPartSumsEdges) {
  const ClosedLoop cl = testing::four_pendulum_loop();
  const CompositeStorage w = composite_storage(cl, pendulum_storage({}), controller_storage(10.0, 10.0));
  Vec x = Vec::Zero(12);
  x.tail(4) = vec({1.0, 0.0, -1.0, 2.0});
  // Edges 01, 02, 03, 12 with differences 1, 2, -1, 1 and V₂(d) = d²/2.
  EXPECT_NEAR(w.controller_part(x), 0.5 * (1.0 + 4.0 + 1.0 + 1.0), 1e-14);
}

TEST(CompositeStorage, RateMatchesFiniteDifferenceAlongFlow) {
  for (const ClosedLoop& cl : {testing::four_pendulum_loop(), testing::pendulum_pair_loop()}) {
    const CompositeStorage w = composite_storage(cl, pendulum_storage({}), controller_storage(10.0, 10.0));
    std::mt19937 rng(4);
    for (int k = 0; k < 20; ++k) {
      const Vec x = random_vec(rng, static_cast<Eigen::Index>(cl.layout().total()), 2.0);
      const Vec xdot = cl.derivative(x);
      const double eps = 1e-6;
      const double fd = (w.value(x + eps * xdot) - w.value(x - eps * xdot)) / (2.0 * eps);
      EXPECT_NEAR(w.rate(x, xdot), fd, 1e-5 * (1.0 + std::abs(fd)));
    }
  }
}

TEST(Positivity, FourPendulumStorageIsPositiveOnBox) {
  const ClosedLoop cl = testing::four_pendulum_loop();
  const CompositeStorage w = composite_storage(cl, pendulum_storage({}), controller_storage(10.0, 10.0));
  const Box box = per_node_box(cl.layout(), vec({M_PI, 5.0}), vec({5.0}));
  const PositivityReport serial = storage_positivity_scan(w, box, 4000, Execution::kSerial);
  const PositivityReport parallel = storage_positivity_scan(w, box, 4000, Execution::kParallel);
  EXPECT_TRUE(serial.pass);
  EXPECT_GT(serial.min_value, 0.0);
  EXPECT_EQ(serial.min_value, parallel.min_value);
  EXPECT_EQ(serial.argmin, parallel.argmin);
}

TEST(Positivity, NegatedStorageFails) {
  const ClosedLoop cl = testing::pendulum_pair_loop();
  StorageFunction neg = pendulum_storage({});
  auto value = neg.value;
  neg.value = [value](const Vec& x) { return -value(x); };
  const CompositeStorage w = composite_storage(cl, neg, controller_storage(10.0, 10.0));
  const PositivityReport r = storage_positivity_scan(w, Box::symmetric(vec({1.0, 1.0, 1.0})), 500);
  EXPECT_FALSE(r.pass);
  EXPECT_THROW(storage_positivity_scan(w, Box{vec({0.1, 0.1, 0.1}), vec({1.0, 1.0, 1.0})}, 10),
               std::invalid_argument);
}

TEST(Halton, RadicalInverseValues) {
  const Vec p1 = halton(1, 2);
  EXPECT_DOUBLE_EQ(p1(0), 0.5);
  EXPECT_DOUBLE_EQ(p1(1), 1.0 / 3.0);
  const Vec p6 = halton(6, 3);
  EXPECT_DOUBLE_EQ(p6(0), 0.375);       // 110₂ → 0.011₂
  EXPECT_DOUBLE_EQ(p6(1), 2.0 / 9.0);   // 20₃ → 0.02₃
  EXPECT_DOUBLE_EQ(p6(2), 1.0 / 25.0 + 1.0 / 5.0);
  EXPECT_THROW(halton(1, 65), std::invalid_argument);
}

TEST(Gamma, NetworkEstimateBelowOneOnRandomInputs) {
  const ControllerNetwork net = build_controller_network(first_order(10.0, 10.0), four_node_graph());
  std::mt19937 rng(1);
  std::vector<Vec> inputs;
  for (int k = 0; k < 300; ++k) inputs.push_back(random_vec(rng, 4, 25.0));
  const GammaReport r = gamma_estimate(pendulum_plant({}), net, inputs);
  EXPECT_LT(r.gamma_hat, 1.0);
  EXPECT_GT(r.gamma_hat, 0.0);
}

}  // namespace
}  // namespace nicons
