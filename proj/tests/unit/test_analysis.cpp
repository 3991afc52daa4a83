#include <gtest/gtest.h>

#include <cmath>

#include "nicons/analysis.hpp"
#include "support.hpp"

namespace nicons {
namespace {

using testing::four_node_graph;
using testing::vec;

class FourPendulumRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    loop_ = new ClosedLoop(testing::four_pendulum_loop());
    IntegratorConfig c;
    c.step_s = 1e-3;
    c.t_end_s = 5.0;
    c.record_every = 5;
    traj_ = new Trajectory(integrate(*loop_, testing::four_pendulum_initial_state(*loop_), c));
  }
  static void TearDownTestSuite() {
    delete traj_;
    delete loop_;
  }
  static ClosedLoop* loop_;
  static Trajectory* traj_;
};
ClosedLoop* FourPendulumRun::loop_ = nullptr;
Trajectory* FourPendulumRun::traj_ = nullptr;

TEST_F(FourPendulumRun, PendulumsAreLossless) {
  for (std::size_t i = 0; i < 4; ++i) {
    const CheckReport r = check_ni_dissipation(*traj_, pendulum_storage({}), i);
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.max_abs_residual, 1e-9);
    EXPECT_EQ(r.samples, traj_->size());
  }
}

TEST_F(FourPendulumRun, ControllerDissipationDependsOnStrictness) {
  const StorageFunction v2 = controller_storage(10.0, 10.0);
  EXPECT_TRUE(check_osni_dissipation(*traj_, v2, 0.05, 0).pass);
  EXPECT_TRUE(check_osni_dissipation(*traj_, v2, 0.1, 0).pass);
  const CheckReport too_strict = check_osni_dissipation(*traj_, v2, 0.2, 0);
  EXPECT_FALSE(too_strict.pass);
  EXPECT_GT(too_strict.max_violation, 1e-6);
}

TEST_F(FourPendulumRun, NetworkStrictnessThresholdIsReciprocalGain) {
  const StorageFunction v2 = controller_storage(10.0, 10.0);
  EXPECT_TRUE(check_osni_like_network(*traj_, v2, four_node_graph(), 0.05).pass);
  EXPECT_TRUE(check_osni_like_network(*traj_, v2, four_node_graph(), 0.1).pass);
  EXPECT_FALSE(check_osni_like_network(*traj_, v2, four_node_graph(), 0.11).pass);
}

TEST_F(FourPendulumRun, LyapunovFunctionDecreases) {
  const CompositeStorage w = composite_storage(*loop_, pendulum_storage({}), controller_storage(10.0, 10.0));
  EXPECT_TRUE(check_lyapunov_decrease(*traj_, w).pass);
  EXPECT_TRUE(check_lyapunov_rate(*traj_, w, 0.05, four_node_graph()).pass);
  EXPECT_TRUE(check_lyapunov_monotone(*traj_, w, 0.05, four_node_graph()).pass);
}

TEST_F(FourPendulumRun, SerialAndParallelChecksAgree) {
  const CompositeStorage w = composite_storage(*loop_, pendulum_storage({}), controller_storage(10.0, 10.0));
  const CheckReport s = check_lyapunov_rate(*traj_, w, 0.05, four_node_graph(), 1e-6, Execution::kSerial);
  const CheckReport p = check_lyapunov_rate(*traj_, w, 0.05, four_node_graph(), 1e-6, Execution::kParallel);
  EXPECT_EQ(s.max_violation, p.max_violation);
  EXPECT_EQ(s.time_of_max, p.time_of_max);
  EXPECT_EQ(s.max_abs_residual, p.max_abs_residual);
}

TEST_F(FourPendulumRun, WrongFeedbackSignBreaksLyapunovBound) {
  const ClosedLoop flipped = loop_->with_feedback_sign(-1.0);
  IntegratorConfig c;
  c.step_s = 1e-3;
  c.t_end_s = 2.0;
  const Trajectory t = integrate(flipped, testing::four_pendulum_initial_state(flipped), c);
  const CompositeStorage w = composite_storage(flipped, pendulum_storage({}), controller_storage(10.0, 10.0));
  EXPECT_FALSE(check_lyapunov_monotone(t, w, 0.05, four_node_graph()).pass);
  // The plant itself stays lossless whatever drives it.
  EXPECT_TRUE(check_ni_dissipation(t, pendulum_storage({}), 0).pass);
}

TEST_F(FourPendulumRun, ConsensusMetricDecreasesAndClassifies) {
  const auto series = consensus_metric(*traj_, four_node_graph());
  ASSERT_EQ(series.size(), traj_->size());
  EXPECT_DOUBLE_EQ(series.front().edge_max, 4.0);
  EXPECT_DOUBLE_EQ(series.front().all_pairs_max, 4.0);
  EXPECT_LT(series.back().edge_max, series.front().edge_max);
  EXPECT_EQ(classify_outcome(*traj_, four_node_graph(), 1e-12), ConsensusOutcome::kUndetermined);
  EXPECT_EQ(classify_outcome(*traj_, four_node_graph(), 10.0), ConsensusOutcome::kStatesToZero);
}

TEST(Consensus, PointwiseMetric) {
  const ConsensusPoint p = consensus_at(vec({0.0, 1.0, 5.0, 2.0}), 1, four_node_graph());
  EXPECT_EQ(p.edge_max, 5.0);       // edge 02
  EXPECT_EQ(p.all_pairs_max, 5.0);
  const ConsensusPoint q = consensus_at(vec({0.0, 1.0, 2.0, 3.0}), 1, Graph::path(4));
  EXPECT_EQ(q.edge_max, 1.0);
  EXPECT_EQ(q.all_pairs_max, 3.0);
}

TEST(Consensus, EqualInitialAnglesStayInConsensus) {
  const ClosedLoop cl = testing::four_pendulum_loop();
  std::vector<Vec> same(4, vec({0.7, 0.0}));
  IntegratorConfig c;
  c.step_s = 1e-3;
  c.t_end_s = 1.0;
  const Trajectory t = integrate(cl, cl.compose_state(same), c);
  for (const auto& p : consensus_metric(t, four_node_graph())) EXPECT_EQ(p.edge_max, 0.0);
  EXPECT_EQ(classify_outcome(t, four_node_graph(), 1e-9), ConsensusOutcome::kOutputConsensus);
}

TEST(PairIdentities, HoldOnTwoNodeRun) {
  const ClosedLoop cl = network_interconnect(pendulum_plant({}), build_controller_network(first_order(10.0, 10.0), Graph::path(2)));
  IntegratorConfig c;
  c.step_s = 1e-3;
  c.t_end_s = 2.0;
  const Trajectory t = integrate(cl, cl.compose_state(std::vector<Vec>{vec({1.0, 0.0}), vec({-0.5, 0.3})}), c);
  EXPECT_TRUE(check_pair_identities(t).pass);
  const ClosedLoop four = testing::four_pendulum_loop();
  const Trajectory t4 = integrate(four, testing::four_pendulum_initial_state(four), c);
  EXPECT_THROW(check_pair_identities(t4), std::invalid_argument);
}

TEST(SteadyState, RandomInputAndConsensusDirection) {
  const ControllerNetwork net = build_controller_network(first_order(10.0, 10.0), four_node_graph());
  EXPECT_TRUE(check_steady_state_relation(net, vec({0.3, -0.8, 0.1, 0.9}), 1e-6).pass);
  const CheckReport ones = check_steady_state_relation(net, Vec::Ones(4), 1e-9);
  EXPECT_TRUE(ones.pass);
  EXPECT_LE(ones.max_violation, 1e-9);
}

TEST(Reports, JsonIsKeyedByName) {
  CheckReport a;
  a.name = "a";
  a.max_violation = 0.5;
  a.pass = false;
  const std::vector<CheckReport> v{a};
  const auto doc = reports_to_json(v);
  EXPECT_FALSE(doc["a"]["pass"].get<bool>());
  EXPECT_EQ(doc["a"]["max_violation"].get<double>(), 0.5);
}

}  // namespace
}  // namespace nicons
