#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace nicons {

// Undirected, unweighted edge. Stored with i < j.
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected simple graph on nodes 0..n-1. Immutable once constructed.
class Graph {
 public:
  // Throws std::invalid_argument on n == 0, self-loops, duplicate edges
  // (in either orientation) or out-of-range indices.
  Graph(std::size_t n, std::vector<Edge> edges);

  static Graph path(std::size_t n);
  static Graph complete(std::size_t n);

  std::size_t n() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool has_edge(std::size_t i, std::size_t j) const;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
};

Eigen::MatrixXd adjacency(const Graph& g);
Eigen::MatrixXd degree_matrix(const Graph& g);

// L = D - A.
Eigen::MatrixXd laplacian(const Graph& g);

// Breadth-first reachability from node 0.
bool is_connected(const Graph& g);

// (a ⊗ b): block (i, j) equals a(i, j) * b.
Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Ascending Laplacian eigenvalues.
Eigen::VectorXd laplacian_spectrum(const Graph& g);

// Second-smallest Laplacian eigenvalue (algebraic connectivity); 0 when n == 1.
double fiedler_value(const Graph& g);

}  // namespace nicons
