#pragma once

#include <vector>

#include "nicons/graph.hpp"
#include "nicons/linsys.hpp"
#include "nicons/network.hpp"
#include "nicons/plant.hpp"
#include "nicons/sim.hpp"

namespace nicons::testing {

// Four pendulums on the star-plus-edge graph, a = b = 10.
inline Graph four_node_graph() { return Graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}}); }

inline ClosedLoop four_pendulum_loop(double a = 10.0, double b = 10.0) {
  return network_interconnect(pendulum_plant({}), build_controller_network(first_order(a, b), four_node_graph()));
}

inline Vec four_pendulum_initial_state(const ClosedLoop& cl) {
  std::vector<Vec> plants;
  for (double angle : {2.0, 1.0, -1.0, -2.0}) plants.push_back(Vec::Zero(2) + Vec::Unit(2, 0) * angle);
  return cl.compose_state(plants);
}

inline ClosedLoop pendulum_pair_loop(double a = 10.0, double b = 10.0) {
  return pair_interconnect(pendulum_plant({}), linear_plant(first_order(a, b)));
}

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

}  // namespace nicons::testing
