#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gnnctrl/filters.hpp"
#include "gnnctrl/matrix.hpp"
#include "gnnctrl/rng.hpp"
#include "gnnctrl/system.hpp"

namespace gnnctrl {

enum class Nonlinearity { Tanh, Identity };

// Layered graph neural network: each layer is a polynomial graph filter
// followed by a pointwise nonlinearity. The readout stays linear when
// apply_nonlin_on_last is false, which is the controller configuration.
// With Nonlinearity::Identity the cascade collapses to a linear graph
// filter, which is how the graph-filter baseline is expressed.
struct GnnParams {
  std::vector<FilterBank> layers;
  Nonlinearity nonlinearity = Nonlinearity::Tanh;
  bool apply_nonlin_on_last = false;

  std::size_t in_dim() const { return layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.back().out_dim(); }
};

void validate_gnn(const GnnParams& p);

std::size_t gnn_parameter_count(const GnnParams& p);

// Layer sizes for construction: in -> out features with the given tap order.
struct GnnLayerSpec {
  std::size_t in = 1;
  std::size_t out = 1;
  std::size_t order = 0;
};

// Taps initialized uniform on [-a, a] with a = 1/sqrt(in * (order + 1)).
// Every layer gets the same spectral interval.
GnnParams make_gnn(const std::vector<GnnLayerSpec>& arch,
                   std::pair<double, double> interval, Nonlinearity nonlin,
                   RngStream& rng);

// Copy of p with every layer's interval replaced (used when analyzing the
// same taps against a different or wider spectrum).
GnnParams with_interval(const GnnParams& p, std::pair<double, double> interval);

// Gradient with the same nesting as the parameters: per layer, per tap.
struct GnnGradient {
  std::vector<std::vector<Matrix>> taps;
};

GnnGradient zero_gradient(const GnnParams& p);
void accumulate(GnnGradient& into, const GnnGradient& term, double scale = 1.0);

std::vector<double> flatten_params(const GnnParams& p);
void set_flat_params(GnnParams& p, std::span<const double> flat);
std::vector<double> flatten_gradient(const GnnGradient& g);

GraphSignal gnn_forward(const GnnParams& p, const Matrix& support,
                        const GraphSignal& x);

// Per-layer intermediates kept for backpropagation.
struct GnnTrace {
  std::vector<std::vector<GraphSignal>> shifted;  // S^k X_{l-1} per layer
  std::vector<GraphSignal> activated;             // layer outputs
};

GraphSignal gnn_forward_traced(const GnnParams& p, const Matrix& support,
                               const GraphSignal& x, GnnTrace& trace);

// Backpropagates g_out (gradient w.r.t. the network output) through the
// trace; tap gradients are accumulated into acc and the gradient w.r.t. the
// network input is returned.
GraphSignal gnn_backward(const GnnParams& p, const Matrix& support,
                         const GnnTrace& trace, const GraphSignal& g_out,
                         GnnGradient& acc);

// Finite-horizon closed-loop cost of running the network as the controller
// of d from x0, plus its exact gradient with respect to every tap
// (backpropagation through time over the full rollout). States with size
// above 1e12 raise DivergenceError carrying the step.
std::pair<double, GnnGradient> closed_loop_gradient(const GnnParams& p,
                                                    const DistributedSystem& d,
                                                    const CostSpec& cost,
                                                    const GraphSignal& x0,
                                                    std::size_t horizon);

enum class PenaltyKind { None, Size, Lipschitz, Both };

// Penalty value and subgradient:
//   Size:      product of per-layer filter sizes,
//   Lipschitz: sum of per-layer Lipschitz constants,
//   Both:      0.5 * (sum of Lipschitz constants + size product).
// The subgradient differentiates through the active maximizers (active
// infinity-norm row, maximizing lambda per response); ties are broken
// toward the smallest row index and smallest lambda.
std::pair<double, GnnGradient> penalty_and_gradient(const GnnParams& p,
                                                    PenaltyKind kind);

}  // namespace gnnctrl
