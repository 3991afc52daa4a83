#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nicons/graph.hpp"
#include "nicons/kernels.hpp"
#include "nicons/linsys.hpp"
#include "nicons/plant.hpp"

namespace nicons {

// n identical copies of a linear controller M(s) whose outputs are mixed by
// the graph Laplacian:
//
//   xdot_c,i = A x_c,i + B u_i,      (Y₂)_i = Σ_j a_ij C (x_c,i − x_c,j)
//
// so the network realises L ⊗ M(s) and the edge differences obey
// Δxdot_ij = A Δx_ij + B Δu_ij, Δy_ij = C Δx_ij.
class ControllerNetwork {
 public:
  // Throws std::domain_error for a non-Hurwitz controller and
  // std::invalid_argument for a feedthrough D != 0.
  ControllerNetwork(StateSpace node_controller, Graph graph);

  const StateSpace& node_controller() const { return node_; }
  const Graph& graph() const { return graph_; }
  const Mat& laplacian() const { return laplacian_; }

  std::size_t nodes() const { return graph_.n(); }
  std::size_t node_states() const { return node_.states(); }
  std::size_t io_dim() const { return node_.inputs(); }
  std::size_t state_dim() const { return nodes() * node_states(); }

  Vec derivative(const Vec& xc, const Vec& u) const;
  // Per-node C x_c,i, stacked.
  Vec node_outputs(const Vec& xc) const;
  // (L ⊗ I_m) v for a stacked per-node vector v.
  Vec mix(const Vec& per_node) const;
  Vec outputs(const Vec& xc) const { return mix(node_outputs(xc)); }

  // (I⊗A, I⊗B, L⊗C, 0).
  StateSpace realization() const;
  // L ⊗ M(0).
  Mat dc_map() const;

 private:
  StateSpace node_;
  Graph graph_;
  Mat laplacian_;
};

// Warns on std::clog when g is disconnected.
ControllerNetwork build_controller_network(const StateSpace& m_sys, const Graph& g);

enum class LoopMode { kPair, kNetwork };

// Composite state layout:
//   [x_plant_1 .. x_plant_n | x_ctrl_1 .. x_ctrl_n]
// Pair mode has a single node whose "controller" is the second plant.
struct Layout {
  LoopMode mode = LoopMode::kNetwork;
  std::size_t nodes = 1;
  std::size_t plant_states = 0;  // per node
  std::size_t ctrl_states = 0;   // per node
  std::size_t io_dim = 0;        // m

  std::size_t total() const { return nodes * (plant_states + ctrl_states); }
  std::size_t plant_offset(std::size_t i) const { return i * plant_states; }
  std::size_t ctrl_offset(std::size_t i) const { return nodes * plant_states + i * ctrl_states; }
};

// Everything the verification checks need at one composite state. All
// per-node signals are stacked node-major, m entries per node.
struct Signals {
  Vec x;
  Vec xdot;
  Vec plant_inputs;         // U₁
  Vec plant_outputs;        // Y₁
  Vec plant_output_rates;   // Ẏ₁
  Vec ctrl_inputs;          // U₂ (= Y₁)
  Vec ctrl_outputs;         // per-node controller outputs y_c,i
  Vec ctrl_output_rates;    // ẏ_c,i
  Vec net_outputs;          // Y₂
  Vec net_output_rates;     // Ẏ₂
};

// Positive-feedback interconnection. Vector-field evaluation is a pure
// function of the composite state.
class ClosedLoop {
 public:
  const Layout& layout() const { return layout_; }
  LoopMode mode() const { return layout_.mode; }
  const NonlinearPlant& plant() const { return plant_; }
  // Pair mode only.
  const NonlinearPlant& pair_controller() const;
  // Network mode only.
  const ControllerNetwork& network() const;

  Vec derivative(const Vec& x) const;
  Signals evaluate(const Vec& x) const;

  // Builds a composite state; controller states default to zero.
  Vec compose_state(std::span<const Vec> plant_states,
                    std::span<const Vec> ctrl_states = {}) const;

  // Copy with plant inputs u₁ = sign · y₂. Only used to inject faults.
  ClosedLoop with_feedback_sign(double sign) const;

 private:
  friend ClosedLoop pair_interconnect(NonlinearPlant h1, NonlinearPlant h2);
  friend ClosedLoop network_interconnect(NonlinearPlant plant, ControllerNetwork net);
  ClosedLoop() = default;

  Layout layout_;
  NonlinearPlant plant_;
  std::optional<NonlinearPlant> partner_;
  std::optional<ControllerNetwork> network_;
  double feedback_sign_ = 1.0;
};

// u₁ = y₂, u₂ = y₁ (r = 0). Throws std::invalid_argument on a dimension mismatch.
ClosedLoop pair_interconnect(NonlinearPlant h1, NonlinearPlant h2);

// n plant copies with u₁,ᵢ = (Y₂)ᵢ and controller inputs u₂,ᵢ = y₁,ᵢ.
// Throws std::invalid_argument("consensus requires a connected graph") for a
// disconnected graph, and on dimension mismatches.
ClosedLoop network_interconnect(NonlinearPlant plant, ControllerNetwork net);

// Lyapunov candidate of the closed loop:
//   pair:     W = V₁(x₁) + V₂(x₂) − h₁ᵀh₂
//   network:  Ŵ = Σᵢ V₁(xᵢ) + ½ Σᵢⱼ aᵢⱼ V₂(Δx_c,ij) − Y₁ᵀY₂
class CompositeStorage {
 public:
  CompositeStorage(ClosedLoop loop, StorageFunction v1, StorageFunction v2);

  double value(const Vec& x) const;
  // dW/dt along xdot, by the chain rule with exact gradients.
  double rate(const Vec& x, const Vec& xdot) const;

  double plant_part(const Vec& x) const;
  double controller_part(const Vec& x) const;
  double cross_term(const Vec& x) const;  // Y₁ᵀY₂

  const ClosedLoop& loop() const { return loop_; }

 private:
  ClosedLoop loop_;
  StorageFunction v1_;
  StorageFunction v2_;
};

CompositeStorage composite_storage(const ClosedLoop& cl, StorageFunction v1, StorageFunction v2);

struct Box {
  Vec lower;
  Vec upper;

  static Box symmetric(const Vec& half_widths) { return {-half_widths, half_widths}; }
};

// Box with the same per-node plant and controller half-widths.
Box per_node_box(const Layout& layout, const Vec& plant_half_widths, const Vec& ctrl_half_widths);

struct PositivityReport {
  double min_value = 0.0;
  Vec argmin;
  std::size_t evaluated = 0;
  bool pass = false;
};

inline constexpr double kOriginExclusionRadius = 1e-8;

// Evaluates the storage at `samples` Halton points of the box (points inside
// the 1e-8 ball around the origin are skipped); passes iff every value is > 0.
PositivityReport storage_positivity_scan(const CompositeStorage& cs, const Box& region,
                                         std::size_t samples,
                                         Execution exec = Execution::kParallel);

// Point `index` (0-based) of the Halton sequence in [0,1)^dim; dim <= 64.
Vec halton(std::size_t index, std::size_t dim);

// Network form of the steady-state gain estimate: Ȳ₂ = [L ⊗ M(0)] Ȳ₁.
GammaReport gamma_estimate(const NonlinearPlant& plant, const ControllerNetwork& net,
                           std::span<const Vec> inputs, Execution exec = Execution::kParallel);

}  // namespace nicons
