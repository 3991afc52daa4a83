#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "nicons/graph.hpp"
#include "nicons/kernels.hpp"
#include "nicons/network.hpp"
#include "nicons/plant.hpp"
#include "nicons/sim.hpp"

namespace nicons {

// Violations are one-sided: max(0, lhs − rhs) over all samples, so
// pass ⟺ max_violation <= tolerance. `max_abs_residual` is the largest
// |lhs − rhs| and is what equality (lossless) checks look at.
struct CheckReport {
  std::string name;
  double max_violation = 0.0;
  double time_of_max = 0.0;
  bool pass = true;
  double tolerance = 0.0;
  double max_abs_residual = 0.0;
  std::size_t samples = 0;
};

inline constexpr double kDefaultCheckTolerance = 1e-6;

// V̇(xᵢ) − u₁,ᵢᵀẏ₁,ᵢ ≤ 0 for the plant at `node`.
CheckReport check_ni_dissipation(const Trajectory& traj, const StorageFunction& v, std::size_t node,
                                 double tolerance = kDefaultCheckTolerance,
                                 Execution exec = Execution::kParallel);

// V̇(x_c) − u₂ᵀẏ_c + δ|ẏ_c|² ≤ 0 for the controller at `node` (the second
// system in pair mode).
CheckReport check_osni_dissipation(const Trajectory& traj, const StorageFunction& v, double delta,
                                   std::size_t node, double tolerance = kDefaultCheckTolerance,
                                   Execution exec = Execution::kParallel);

// d/dt[½Σᵢⱼ aᵢⱼ V₂(Δx_ij)] ≤ U₂ᵀẎ₂ − ½δ Σᵢⱼ aᵢⱼ |Δẏ_ij|² for the controller
// network, with the double sums running over both orientations of each edge.
CheckReport check_osni_like_network(const Trajectory& traj, const StorageFunction& v2, const Graph& g,
                                    double delta, double tolerance = kDefaultCheckTolerance,
                                    Execution exec = Execution::kParallel);

// Two-node identities  ũᵀẏ̃ = Δu₁₂ᵀΔẏ₁₂  and  |ẏ̃|² = 2|Δẏ₁₂|², with ũ = U₂,
// ỹ = Y₂. Residuals are relative to max(1, |lhs|, |rhs|). Throws
// std::invalid_argument unless the trajectory has exactly two nodes.
CheckReport check_pair_identities(const Trajectory& traj, double tolerance = 1e-12);

// Ŵ(t_{k+1}) − Ŵ(t_k) ≤ tol.
CheckReport check_lyapunov_decrease(const Trajectory& traj, const CompositeStorage& cs,
                                    double tolerance = kDefaultCheckTolerance,
                                    Execution exec = Execution::kParallel);

// dŴ/dt + ½δ Σᵢⱼ aᵢⱼ |Δẏ_ij|² ≤ tol (network), or dW/dt + δ|ẏ₂|² ≤ tol (pair).
CheckReport check_lyapunov_rate(const Trajectory& traj, const CompositeStorage& cs, double delta,
                                const Graph& g, double tolerance = kDefaultCheckTolerance,
                                Execution exec = Execution::kParallel);

// Both of the above; the report carries the worse of the two.
CheckReport check_lyapunov_monotone(const Trajectory& traj, const CompositeStorage& cs, double delta,
                                   const Graph& g, double tolerance = kDefaultCheckTolerance,
                                   Execution exec = Execution::kParallel);

struct ConsensusPoint {
  double edge_max = 0.0;
  double all_pairs_max = 0.0;
};

// Per sample, max |yᵢ − yⱼ| over edges and over all node pairs.
ConsensusPoint consensus_at(const Vec& outputs, std::size_t io_dim, const Graph& g);
std::vector<ConsensusPoint> consensus_metric(const Trajectory& traj, const Graph& g);

// Drives the controller network with a constant input until transients have
// decayed (RK4, horizon 40 / min|Re λ(A)|) and compares Y₂ with
// [L ⊗ M(0)] ū₂ in the max norm.
CheckReport check_steady_state_relation(const ControllerNetwork& net, const Vec& u2bar,
                                        double tolerance = kDefaultCheckTolerance);

// Which limit a network run exhibits.
enum class ConsensusOutcome { kStatesToZero, kOutputConsensus, kUndetermined };
ConsensusOutcome classify_outcome(const Trajectory& traj, const Graph& g, double tolerance);
std::string to_string(ConsensusOutcome outcome);

nlohmann::json to_json(const CheckReport& r);
// {"<name>": {...}, ...}
nlohmann::json reports_to_json(std::span<const CheckReport> reports);

}  // namespace nicons
