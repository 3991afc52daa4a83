#include "nicons/graph.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

namespace nicons {

Graph::Graph(std::size_t n, std::vector<Edge> edges) : n_(n) {
  if (n == 0) throw std::invalid_argument("graph must have at least one node");
  edges_.reserve(edges.size());
  for (Edge e : edges) {
    if (e.i >= n || e.j >= n) {
      throw std::invalid_argument("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                                  ") references a node outside 0.." + std::to_string(n - 1));
    }
    if (e.i == e.j) {
      throw std::invalid_argument("self-loop at node " + std::to_string(e.i));
    }
    if (e.i > e.j) std::swap(e.i, e.j);
    if (std::find(edges_.begin(), edges_.end(), e) != edges_.end()) {
      throw std::invalid_argument("duplicate edge (" + std::to_string(e.i) + "," +
                                  std::to_string(e.j) + ")");
    }
    edges_.push_back(e);
  }
}

Graph Graph::path(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return Graph(n, std::move(edges));
}

Graph Graph::complete(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j});
  return Graph(n, std::move(edges));
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  return std::find(edges_.begin(), edges_.end(), Edge{i, j}) != edges_.end();
}

Eigen::MatrixXd adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    a(e.i, e.j) = 1.0;
    a(e.j, e.i) = 1.0;
  }
  return a;
}

Eigen::MatrixXd degree_matrix(const Graph& g) {
  return adjacency(g).rowwise().sum().asDiagonal();
}

Eigen::MatrixXd laplacian(const Graph& g) { return degree_matrix(g) - adjacency(g); }

bool is_connected(const Graph& g) {
  std::vector<std::vector<std::size_t>> neighbours(g.n());
  for (const Edge& e : g.edges()) {
    neighbours[e.i].push_back(e.j);
    neighbours[e.j].push_back(e.i);
  }
  std::vector<bool> seen(g.n(), false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop();
    for (std::size_t w : neighbours[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        frontier.push(w);
      }
    }
  }
  return reached == g.n();
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.size() == 0 || b.size() == 0) {
    throw std::invalid_argument("kron: operands must be non-empty");
  }
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::VectorXd laplacian_spectrum(const Graph& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian(g), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Laplacian eigenvalue iteration did not converge");
  }
  return solver.eigenvalues();
}

double fiedler_value(const Graph& g) {
  if (g.n() < 2) return 0.0;
  const double lambda = laplacian_spectrum(g)(1);
  // Round-off can leave the zero eigenvalue of a disconnected graph at ±1e-16.
  return std::abs(lambda) < 1e-10 ? 0.0 : lambda;
}

}  // namespace nicons
