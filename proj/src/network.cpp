#include "nicons/network.hpp"

#include <array>
#include <iostream>
#include <stdexcept>

namespace nicons {

ControllerNetwork::ControllerNetwork(StateSpace node_controller, Graph graph)
    : node_(std::move(node_controller)), graph_(std::move(graph)), laplacian_(nicons::laplacian(graph_)) {
  node_.validate();
  if (!is_hurwitz(node_)) {
    throw std::domain_error("controller network needs a Hurwitz node controller");
  }
  if (node_.D.cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument("closed-loop controllers must be strictly proper (D = 0)");
  }
}

Vec ControllerNetwork::derivative(const Vec& xc, const Vec& u) const {
  const auto q = static_cast<Eigen::Index>(node_states());
  const auto m = static_cast<Eigen::Index>(io_dim());
  Vec dx(xc.size());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(nodes()); ++i) {
    dx.segment(i * q, q) = node_.A * xc.segment(i * q, q) + node_.B * u.segment(i * m, m);
  }
  return dx;
}

Vec ControllerNetwork::node_outputs(const Vec& xc) const {
  const auto q = static_cast<Eigen::Index>(node_states());
  const auto m = static_cast<Eigen::Index>(io_dim());
  Vec y(nodes() * io_dim());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(nodes()); ++i) {
    y.segment(i * m, m) = node_.C * xc.segment(i * q, q);
  }
  return y;
}

Vec ControllerNetwork::mix(const Vec& per_node) const {
  const auto m = static_cast<Eigen::Index>(io_dim());
  // Σ_j a_ij (v_i − v_j) edge by edge, so identical node values cancel exactly.
  Vec out = Vec::Zero(per_node.size());
  for (const Edge& e : graph_.edges()) {
    const Vec diff = per_node.segment(e.i * m, m) - per_node.segment(e.j * m, m);
    out.segment(e.i * m, m) += diff;
    out.segment(e.j * m, m) -= diff;
  }
  return out;
}

StateSpace ControllerNetwork::realization() const { return laplacian_realization(laplacian_, node_); }

Mat ControllerNetwork::dc_map() const { return kron(laplacian_, dc_gain(node_)); }

ControllerNetwork build_controller_network(const StateSpace& m_sys, const Graph& g) {
  if (!is_connected(g)) {
    std::clog << "warning: controller network graph is disconnected; consensus is not guaranteed\n";
  }
  return ControllerNetwork(m_sys, g);
}

const NonlinearPlant& ClosedLoop::pair_controller() const {
  if (!partner_) throw std::logic_error("pair_controller() on a network-mode loop");
  return *partner_;
}

const ControllerNetwork& ClosedLoop::network() const {
  if (!network_) throw std::logic_error("network() on a pair-mode loop");
  return *network_;
}

Vec ClosedLoop::derivative(const Vec& x) const {
  const Layout& L = layout_;
  const auto p = static_cast<Eigen::Index>(L.plant_states);
  const auto q = static_cast<Eigen::Index>(L.ctrl_states);
  const auto m = static_cast<Eigen::Index>(L.io_dim);
  const auto n = static_cast<Eigen::Index>(L.nodes);
  Vec dx(x.size());
  if (L.mode == LoopMode::kPair) {
    const Vec x1 = x.head(p);
    const Vec x2 = x.tail(q);
    const Vec y1 = plant_.h(x1);
    const Vec y2 = partner_->h(x2);
    dx.head(p) = plant_.f(x1, feedback_sign_ * y2);
    dx.tail(q) = partner_->f(x2, y1);
    return dx;
  }
  const Vec xc = x.tail(n * q);
  Vec y1(n * m);
  for (Eigen::Index i = 0; i < n; ++i) y1.segment(i * m, m) = plant_.h(x.segment(i * p, p));
  const Vec y2 = network_->outputs(xc);
  for (Eigen::Index i = 0; i < n; ++i) {
    dx.segment(i * p, p) = plant_.f(x.segment(i * p, p), feedback_sign_ * y2.segment(i * m, m));
  }
  dx.tail(n * q) = network_->derivative(xc, y1);
  return dx;
}

Signals ClosedLoop::evaluate(const Vec& x) const {
  const Layout& L = layout_;
  const auto p = static_cast<Eigen::Index>(L.plant_states);
  const auto q = static_cast<Eigen::Index>(L.ctrl_states);
  const auto m = static_cast<Eigen::Index>(L.io_dim);
  const auto n = static_cast<Eigen::Index>(L.nodes);
  Signals s;
  s.x = x;
  s.xdot = Vec(x.size());
  if (L.mode == LoopMode::kPair) {
    const Vec x1 = x.head(p);
    const Vec x2 = x.tail(q);
    s.plant_outputs = plant_.h(x1);
    s.ctrl_outputs = partner_->h(x2);
    s.plant_inputs = feedback_sign_ * s.ctrl_outputs;
    s.ctrl_inputs = s.plant_outputs;
    s.xdot.head(p) = plant_.f(x1, s.plant_inputs);
    s.xdot.tail(q) = partner_->f(x2, s.ctrl_inputs);
    s.plant_output_rates = output_jacobian(plant_, x1) * s.xdot.head(p);
    s.ctrl_output_rates = output_jacobian(*partner_, x2) * s.xdot.tail(q);
    s.net_outputs = s.ctrl_outputs;
    s.net_output_rates = s.ctrl_output_rates;
    return s;
  }
  const Vec xc = x.tail(n * q);
  s.plant_outputs = Vec(n * m);
  for (Eigen::Index i = 0; i < n; ++i) s.plant_outputs.segment(i * m, m) = plant_.h(x.segment(i * p, p));
  s.ctrl_outputs = network_->node_outputs(xc);
  s.net_outputs = network_->mix(s.ctrl_outputs);
  s.plant_inputs = feedback_sign_ * s.net_outputs;
  s.ctrl_inputs = s.plant_outputs;
  s.plant_output_rates = Vec(n * m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec xi = x.segment(i * p, p);
    const Vec dxi = plant_.f(xi, s.plant_inputs.segment(i * m, m));
    s.xdot.segment(i * p, p) = dxi;
    s.plant_output_rates.segment(i * m, m) = output_jacobian(plant_, xi) * dxi;
  }
  const Vec dxc = network_->derivative(xc, s.ctrl_inputs);
  s.xdot.tail(n * q) = dxc;
  s.ctrl_output_rates = network_->node_outputs(dxc);
  s.net_output_rates = network_->mix(s.ctrl_output_rates);
  return s;
}

Vec ClosedLoop::compose_state(std::span<const Vec> plant_states, std::span<const Vec> ctrl_states) const {
  const Layout& L = layout_;
  if (plant_states.size() != L.nodes) {
    throw std::invalid_argument("expected " + std::to_string(L.nodes) + " plant initial states, got " +
                                std::to_string(plant_states.size()));
  }
  if (!ctrl_states.empty() && ctrl_states.size() != L.nodes) {
    throw std::invalid_argument("expected " + std::to_string(L.nodes) +
                                " controller initial states, got " + std::to_string(ctrl_states.size()));
  }
  Vec x = Vec::Zero(L.total());
  for (std::size_t i = 0; i < L.nodes; ++i) {
    if (static_cast<std::size_t>(plant_states[i].size()) != L.plant_states) {
      throw std::invalid_argument("plant initial state " + std::to_string(i + 1) + " must have " +
                                  std::to_string(L.plant_states) + " entries");
    }
    x.segment(L.plant_offset(i), L.plant_states) = plant_states[i];
    if (!ctrl_states.empty()) {
      if (static_cast<std::size_t>(ctrl_states[i].size()) != L.ctrl_states) {
        throw std::invalid_argument("controller initial state " + std::to_string(i + 1) +
                                    " must have " + std::to_string(L.ctrl_states) + " entries");
      }
      x.segment(L.ctrl_offset(i), L.ctrl_states) = ctrl_states[i];
    }
  }
  return x;
}

ClosedLoop ClosedLoop::with_feedback_sign(double sign) const {
  ClosedLoop copy = *this;
  copy.feedback_sign_ = sign;
  return copy;
}

ClosedLoop pair_interconnect(NonlinearPlant h1, NonlinearPlant h2) {
  if (h1.io_dim != h2.io_dim) {
    throw std::invalid_argument("pair interconnection: output of each system must match the other's input");
  }
  if (h1.state_dim == 0 || h2.state_dim == 0 || h1.io_dim == 0) {
    throw std::invalid_argument("pair interconnection: empty system");
  }
  ClosedLoop cl;
  cl.layout_ = {LoopMode::kPair, 1, h1.state_dim, h2.state_dim, h1.io_dim};
  cl.plant_ = std::move(h1);
  cl.partner_ = std::move(h2);
  return cl;
}

ClosedLoop network_interconnect(NonlinearPlant plant, ControllerNetwork net) {
  if (!is_connected(net.graph())) throw std::invalid_argument("consensus requires a connected graph");
  if (plant.io_dim != net.io_dim()) {
    throw std::invalid_argument("plant input/output dimension must equal the controller's");
  }
  ClosedLoop cl;
  cl.layout_ = {LoopMode::kNetwork, net.nodes(), plant.state_dim, net.node_states(), plant.io_dim};
  cl.plant_ = std::move(plant);
  cl.network_ = std::move(net);
  return cl;
}

CompositeStorage::CompositeStorage(ClosedLoop loop, StorageFunction v1, StorageFunction v2)
    : loop_(std::move(loop)), v1_(std::move(v1)), v2_(std::move(v2)) {}

double CompositeStorage::plant_part(const Vec& x) const {
  const Layout& L = loop_.layout();
  double sum = 0.0;
  for (std::size_t i = 0; i < L.nodes; ++i) sum += v1_.value(x.segment(L.plant_offset(i), L.plant_states));
  return sum;
}

double CompositeStorage::controller_part(const Vec& x) const {
  const Layout& L = loop_.layout();
  if (L.mode == LoopMode::kPair) return v2_.value(x.tail(L.ctrl_states));
  double sum = 0.0;
  for (const Edge& e : loop_.network().graph().edges()) {
    const Vec d = x.segment(L.ctrl_offset(e.i), L.ctrl_states) - x.segment(L.ctrl_offset(e.j), L.ctrl_states);
    // a_ij and a_ji both appear in the double sum.
    sum += 0.5 * (v2_.value(d) + v2_.value(-d));
  }
  return sum;
}

double CompositeStorage::cross_term(const Vec& x) const {
  const Layout& L = loop_.layout();
  if (L.mode == LoopMode::kPair) {
    return loop_.plant().h(x.head(L.plant_states)).dot(loop_.pair_controller().h(x.tail(L.ctrl_states)));
  }
  const auto m = static_cast<Eigen::Index>(L.io_dim);
  Vec y1(L.nodes * L.io_dim);
  for (std::size_t i = 0; i < L.nodes; ++i) {
    y1.segment(i * m, m) = loop_.plant().h(x.segment(L.plant_offset(i), L.plant_states));
  }
  const Vec xc = x.tail(L.nodes * L.ctrl_states);
  return y1.dot(loop_.network().outputs(xc));
}

double CompositeStorage::value(const Vec& x) const {
  return plant_part(x) + controller_part(x) - cross_term(x);
}

double CompositeStorage::rate(const Vec& x, const Vec& xdot) const {
  const Layout& L = loop_.layout();
  const auto p = static_cast<Eigen::Index>(L.plant_states);
  const auto q = static_cast<Eigen::Index>(L.ctrl_states);
  const auto m = static_cast<Eigen::Index>(L.io_dim);
  if (L.mode == LoopMode::kPair) {
    const Vec x1 = x.head(p), x2 = x.tail(q);
    const Vec d1 = xdot.head(p), d2 = xdot.tail(q);
    const NonlinearPlant& h1 = loop_.plant();
    const NonlinearPlant& h2 = loop_.pair_controller();
    const Vec y1 = h1.h(x1), y2 = h2.h(x2);
    const Vec y1dot = output_jacobian(h1, x1) * d1;
    const Vec y2dot = output_jacobian(h2, x2) * d2;
    return v1_.gradient(x1).dot(d1) + v2_.gradient(x2).dot(d2) - (y1dot.dot(y2) + y1.dot(y2dot));
  }
  const auto n = static_cast<Eigen::Index>(L.nodes);
  const ControllerNetwork& net = loop_.network();
  double rate = 0.0;
  Vec y1(n * m), y1dot(n * m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec xi = x.segment(i * p, p);
    const Vec di = xdot.segment(i * p, p);
    rate += v1_.gradient(xi).dot(di);
    y1.segment(i * m, m) = loop_.plant().h(xi);
    y1dot.segment(i * m, m) = output_jacobian(loop_.plant(), xi) * di;
  }
  for (const Edge& e : net.graph().edges()) {
    const Vec d = x.segment(L.ctrl_offset(e.i), q) - x.segment(L.ctrl_offset(e.j), q);
    const Vec dd = xdot.segment(L.ctrl_offset(e.i), q) - xdot.segment(L.ctrl_offset(e.j), q);
    rate += 0.5 * (v2_.gradient(d).dot(dd) + v2_.gradient(-d).dot(-dd));
  }
  const Vec xc = x.tail(n * q);
  const Vec xcdot = xdot.tail(n * q);
  const Vec y2 = net.outputs(xc);
  const Vec y2dot = net.outputs(xcdot);
  return rate - (y1dot.dot(y2) + y1.dot(y2dot));
}

CompositeStorage composite_storage(const ClosedLoop& cl, StorageFunction v1, StorageFunction v2) {
  return CompositeStorage(cl, std::move(v1), std::move(v2));
}

Box per_node_box(const Layout& layout, const Vec& plant_half_widths, const Vec& ctrl_half_widths) {
  if (static_cast<std::size_t>(plant_half_widths.size()) != layout.plant_states ||
      static_cast<std::size_t>(ctrl_half_widths.size()) != layout.ctrl_states) {
    throw std::invalid_argument("per_node_box: half-width sizes do not match the layout");
  }
  Vec half(layout.total());
  for (std::size_t i = 0; i < layout.nodes; ++i) {
    half.segment(layout.plant_offset(i), layout.plant_states) = plant_half_widths;
    half.segment(layout.ctrl_offset(i), layout.ctrl_states) = ctrl_half_widths;
  }
  return Box::symmetric(half);
}

namespace {

constexpr std::array<unsigned, 64> kPrimes = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,
    59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131,
    137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
    227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};

double radical_inverse(std::size_t index, unsigned base) {
  double result = 0.0;
  double scale = 1.0 / base;
  while (index > 0) {
    result += static_cast<double>(index % base) * scale;
    index /= base;
    scale /= base;
  }
  return result;
}

}  // namespace

Vec halton(std::size_t index, std::size_t dim) {
  if (dim > kPrimes.size()) throw std::invalid_argument("halton: at most 64 dimensions");
  Vec pt(dim);
  for (std::size_t d = 0; d < dim; ++d) pt(d) = radical_inverse(index, kPrimes[d]);
  return pt;
}

PositivityReport storage_positivity_scan(const CompositeStorage& cs, const Box& region,
                                         std::size_t samples, Execution exec) {
  const auto dim = static_cast<std::size_t>(region.lower.size());
  if (dim != cs.loop().layout().total() || region.upper.size() != region.lower.size()) {
    throw std::invalid_argument("positivity scan region does not match the composite state");
  }
  if (((region.lower.array() > 0.0) || (region.upper.array() < 0.0)).any()) {
    throw std::invalid_argument("positivity scan region must contain the origin");
  }
  const Vec width = region.upper - region.lower;
  auto point = [&](std::size_t k) -> Vec {
    // Index 0 of the sequence is the corner; start at 1.
    return region.lower + width.cwiseProduct(halton(k + 1, dim));
  };
  const ArgMax best = kernels::argmin(samples, exec, [&](std::size_t k) {
    const Vec x = point(k);
    if (x.norm() < kOriginExclusionRadius) return std::numeric_limits<double>::infinity();
    return cs.value(x);
  });
  PositivityReport r;
  r.evaluated = best.count;
  if (best.count == 0) return r;
  r.min_value = best.value;
  r.argmin = point(best.index);
  r.pass = best.value > 0.0;
  return r;
}

GammaReport gamma_estimate(const NonlinearPlant& plant, const ControllerNetwork& net,
                           std::span<const Vec> inputs, Execution exec) {
  return gamma_estimate(plant, net.dc_map(), inputs, exec);
}

}  // namespace nicons
