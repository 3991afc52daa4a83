#include <gtest/gtest.h>

#include <random>

#include "nicons/graph.hpp"
#include "support.hpp"

namespace nicons {
namespace {

using testing::four_node_graph;

TEST(Graph, RejectsMalformedEdgeLists) {
  EXPECT_THROW(Graph(0, {}), std::invalid_argument);
  EXPECT_THROW(Graph(3, {{1, 1}}), std::invalid_argument);
  EXPECT_THROW(Graph(3, {{0, 1}, {1, 0}}), std::invalid_argument);
  EXPECT_THROW(Graph(3, {{0, 3}}), std::invalid_argument);
}

TEST(Graph, NormalizesEdgeOrientation) {
  const Graph g(3, {{2, 0}});
  ASSERT_EQ(g.edges().size(), 1u);
  EXPECT_EQ(g.edges()[0], (Edge{0, 2}));
  EXPECT_TRUE(g.has_edge(2, 0));
  EXPECT_TRUE(g.has_edge(0, 2));
  EXPECT_FALSE(g.has_edge(0, 1));
}

TEST(Graph, FourNodeLaplacianMatchesHandComputation) {
  Eigen::MatrixXd expected(4, 4);
  expected << 3, -1, -1, -1,
             -1, 2, -1, 0,
             -1, -1, 2, 0,
             -1, 0, 0, 1;
  EXPECT_EQ(laplacian(four_node_graph()), expected);
  EXPECT_EQ(laplacian(four_node_graph()), degree_matrix(four_node_graph()) - adjacency(four_node_graph()));
}

TEST(Graph, SpectrumAgreesWithCharacteristicPolynomialRoots) {
  const Eigen::VectorXd spectrum = laplacian_spectrum(four_node_graph());
  const double roots[] = {0.0, 1.0, 3.0, 4.0};
  ASSERT_EQ(spectrum.size(), 4);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(spectrum(k), roots[k], 1e-10);
  // det(L - λI) vanishes at each root; LU, not the eigen-solver.
  const Eigen::MatrixXd L = laplacian(four_node_graph());
  for (double r : roots) EXPECT_NEAR((L - r * Eigen::MatrixXd::Identity(4, 4)).determinant(), 0.0, 1e-10);
  EXPECT_DOUBLE_EQ(fiedler_value(four_node_graph()), 1.0);
}

TEST(Graph, TwoNodeLaplacianSquaresToTwiceItself) {
  const Eigen::MatrixXd L2 = laplacian(Graph::path(2));
  EXPECT_EQ(L2 * L2, 2.0 * L2);
}

TEST(Graph, CompleteGraphSpectrum) {
  const Eigen::VectorXd s = laplacian_spectrum(Graph::complete(5));
  EXPECT_NEAR(s(0), 0.0, 1e-12);
  for (int k = 1; k < 5; ++k) EXPECT_NEAR(s(k), 5.0, 1e-12);
}

TEST(Graph, SingleNodeHasZeroFiedlerValue) {
  EXPECT_EQ(fiedler_value(Graph(1, {})), 0.0);
  EXPECT_TRUE(is_connected(Graph(1, {})));
}

Graph random_graph(std::mt19937& rng, std::size_t n, double p) {
  std::bernoulli_distribution keep(p);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (keep(rng)) edges.push_back({i, j});
  return Graph(n, edges);
}

// Reachability oracle: (I + A)^(n-1) has no zero entry iff the graph is connected.
bool connected_by_matrix_power(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  Eigen::MatrixXd reach = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd step = Eigen::MatrixXd::Identity(n, n) + adjacency(g);
  for (Eigen::Index k = 1; k < n; ++k) reach = (reach * step).cwiseMin(1.0);
  return (reach.array() > 0.0).all();
}

TEST(GraphProperty, LaplacianInvariantsOnRandomGraphs) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const Graph g = random_graph(rng, n, 0.35);
    const Eigen::MatrixXd L = laplacian(g);
    EXPECT_EQ(L, L.transpose());
    EXPECT_LE(L.rowwise().sum().cwiseAbs().maxCoeff(), 0.0);
    const Eigen::VectorXd s = laplacian_spectrum(g);
    EXPECT_GE(s.minCoeff(), -1e-10);
    EXPECT_NEAR(s.sum(), L.trace(), 1e-9);
    EXPECT_EQ(is_connected(g), connected_by_matrix_power(g)) << "trial " << trial;
    EXPECT_EQ(is_connected(g), n == 1 || fiedler_value(g) > 1e-9) << "trial " << trial;
  }
}

TEST(GraphProperty, KroneckerMixedProduct) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rand = [&](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = u(rng);
    return m;
  };
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd A = rand(2, 3), B = rand(3, 2), C = rand(3, 2), D = rand(2, 4);
    const Eigen::MatrixXd lhs = kron(A, B) * kron(C, D);
    const Eigen::MatrixXd rhs = kron(A * C, B * D);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(kron(Eigen::MatrixXd(0, 0), Eigen::MatrixXd::Ones(2, 2)), std::invalid_argument);
}

TEST(Graph, KronBlockLayout) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 3, 4;
  const Eigen::MatrixXd k = kron(a, Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(k(0, 2), 2.0);
  EXPECT_EQ(k(3, 1), 3.0);
  EXPECT_EQ(k(2, 3), 0.0);
}

}  // namespace
}  // namespace nicons
