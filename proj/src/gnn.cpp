#include "gnnctrl/gnn.hpp"

#include <algorithm>
#include <cmath>

#include "gnnctrl/detail/bptt.hpp"
#include "gnnctrl/errors.hpp"

namespace gnnctrl {

namespace {

bool layer_has_nonlin(const GnnParams& p, std::size_t layer) {
  return p.nonlinearity != Nonlinearity::Identity &&
         (layer + 1 < p.layers.size() || p.apply_nonlin_on_last);
}

Matrix apply_tanh(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data()) v = std::tanh(v);
  return out;
}

}  // namespace

void validate_gnn(const GnnParams& p) {
  if (p.layers.empty()) throw InvalidArgumentError("gnn needs >= 1 layer");
  for (const FilterBank& fb : p.layers) validate_filter_bank(fb);
  for (std::size_t l = 1; l < p.layers.size(); ++l)
    if (p.layers[l].in_dim() != p.layers[l - 1].out_dim())
      throw DimensionError("layer feature dimensions must chain");
}

std::size_t gnn_parameter_count(const GnnParams& p) {
  std::size_t count = 0;
  for (const FilterBank& fb : p.layers)
    count += fb.taps.size() * fb.in_dim() * fb.out_dim();
  return count;
}

GnnParams make_gnn(const std::vector<GnnLayerSpec>& arch,
                   std::pair<double, double> interval, Nonlinearity nonlin,
                   RngStream& rng) {
  if (arch.empty()) throw InvalidArgumentError("gnn needs >= 1 layer");
  GnnParams p;
  p.nonlinearity = nonlin;
  p.apply_nonlin_on_last = false;
  for (const GnnLayerSpec& spec : arch) {
    if (spec.in == 0 || spec.out == 0)
      throw InvalidArgumentError("layer dimensions must be positive");
    FilterBank fb;
    fb.lambda_lo = interval.first;
    fb.lambda_hi = interval.second;
    double bound = 1.0 / std::sqrt(static_cast<double>(spec.in) *
                                   static_cast<double>(spec.order + 1));
    for (std::size_t k = 0; k <= spec.order; ++k) {
      Matrix tap(spec.in, spec.out);
      for (std::size_t i = 0; i < spec.in; ++i)
        for (std::size_t j = 0; j < spec.out; ++j)
          tap(i, j) = rng.uniform(-bound, bound);
      fb.taps.push_back(std::move(tap));
    }
    p.layers.push_back(std::move(fb));
  }
  validate_gnn(p);
  return p;
}

GnnParams with_interval(const GnnParams& p,
                        std::pair<double, double> interval) {
  GnnParams out = p;
  for (FilterBank& fb : out.layers) {
    fb.lambda_lo = interval.first;
    fb.lambda_hi = interval.second;
  }
  return out;
}

GnnGradient zero_gradient(const GnnParams& p) {
  GnnGradient g;
  g.taps.resize(p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l)
    for (const Matrix& tap : p.layers[l].taps)
      g.taps[l].emplace_back(tap.rows(), tap.cols());
  return g;
}

void accumulate(GnnGradient& into, const GnnGradient& term, double scale) {
  if (into.taps.size() != term.taps.size())
    throw DimensionError("gradient layer count mismatch");
  for (std::size_t l = 0; l < into.taps.size(); ++l) {
    if (into.taps[l].size() != term.taps[l].size())
      throw DimensionError("gradient tap count mismatch");
    for (std::size_t k = 0; k < into.taps[l].size(); ++k)
      into.taps[l][k] += term.taps[l][k] * scale;
  }
}

std::vector<double> flatten_params(const GnnParams& p) {
  std::vector<double> flat;
  for (const FilterBank& fb : p.layers)
    for (const Matrix& tap : fb.taps)
      flat.insert(flat.end(), tap.data().begin(), tap.data().end());
  return flat;
}

void set_flat_params(GnnParams& p, std::span<const double> flat) {
  std::size_t pos = 0;
  for (FilterBank& fb : p.layers) {
    for (Matrix& tap : fb.taps) {
      if (pos + tap.size() > flat.size())
        throw DimensionError("flat parameter vector too short");
      std::copy(flat.begin() + pos, flat.begin() + pos + tap.size(),
                tap.data().begin());
      pos += tap.size();
    }
  }
  if (pos != flat.size())
    throw DimensionError("flat parameter vector length mismatch");
}

std::vector<double> flatten_gradient(const GnnGradient& g) {
  std::vector<double> flat;
  for (const auto& layer : g.taps)
    for (const Matrix& tap : layer)
      flat.insert(flat.end(), tap.data().begin(), tap.data().end());
  return flat;
}

GraphSignal gnn_forward(const GnnParams& p, const Matrix& support,
                        const GraphSignal& x) {
  validate_gnn(p);
  GraphSignal h = x;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    h = apply_filter(p.layers[l], support, h);
    if (layer_has_nonlin(p, l)) h = apply_tanh(h);
  }
  return h;
}

GraphSignal gnn_forward_traced(const GnnParams& p, const Matrix& support,
                               const GraphSignal& x, GnnTrace& trace) {
  validate_gnn(p);
  trace.shifted.assign(p.layers.size(), {});
  trace.activated.assign(p.layers.size(), GraphSignal());
  GraphSignal h = x;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const FilterBank& fb = p.layers[l];
    if (h.cols() != fb.in_dim())
      throw DimensionError("signal features must match tap rows");
    std::vector<GraphSignal>& shifts = trace.shifted[l];
    shifts.reserve(fb.taps.size());
    shifts.push_back(h);
    GraphSignal y = h * fb.taps[0];
    for (std::size_t k = 1; k < fb.taps.size(); ++k) {
      shifts.push_back(support * shifts.back());
      y += shifts.back() * fb.taps[k];
    }
    h = layer_has_nonlin(p, l) ? apply_tanh(y) : std::move(y);
    trace.activated[l] = h;
  }
  return h;
}

GraphSignal gnn_backward(const GnnParams& p, const Matrix& support,
                         const GnnTrace& trace, const GraphSignal& g_out,
                         GnnGradient& acc) {
  const Matrix support_t = support.transpose();
  GraphSignal g = g_out;
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const FilterBank& fb = p.layers[l];
    if (layer_has_nonlin(p, l)) {
      // d tanh collapses to 1 - activated^2 since activations are stored.
      const GraphSignal& act = trace.activated[l];
      for (std::size_t i = 0; i < g.size(); ++i)
        g.data()[i] *= 1.0 - act.data()[i] * act.data()[i];
    }
    for (std::size_t k = 0; k < fb.taps.size(); ++k)
      acc.taps[l][k] += trace.shifted[l][k].transpose() * g;
    GraphSignal g_in = g * fb.taps[0].transpose();
    GraphSignal w = g;
    for (std::size_t k = 1; k < fb.taps.size(); ++k) {
      w = support_t * w;
      g_in += w * fb.taps[k].transpose();
    }
    g = std::move(g_in);
  }
  return g;
}

std::pair<double, GnnGradient> closed_loop_gradient(const GnnParams& p,
                                                    const DistributedSystem& d,
                                                    const CostSpec& cost,
                                                    const GraphSignal& x0,
                                                    std::size_t horizon) {
  validate_gnn(p);
  if (p.in_dim() != d.f_dim || p.out_dim() != d.g_dim)
    throw DimensionError("gnn feature dims must match the system");
  GnnGradient grad = zero_gradient(p);
  std::vector<GnnTrace> traces(horizon);
  double loss = detail::bptt_rollout(
      d, cost.state_weight, cost.control_weight, x0, horizon,
      [&](std::size_t t, const Matrix& x) {
        return gnn_forward_traced(p, d.support, x, traces[t]);
      },
      [&](std::size_t t, const Matrix& g_u) {
        return gnn_backward(p, d.support, traces[t], g_u, grad);
      });
  return {loss, std::move(grad)};
}

std::pair<double, GnnGradient> penalty_and_gradient(const GnnParams& p,
                                                    PenaltyKind kind) {
  validate_gnn(p);
  GnnGradient grad = zero_gradient(p);
  if (kind == PenaltyKind::None) return {0.0, std::move(grad)};

  const std::size_t n_layers = p.layers.size();
  double value = 0.0;

  if (kind == PenaltyKind::Size || kind == PenaltyKind::Both) {
    std::vector<FilterExtrema> details;
    details.reserve(n_layers);
    double product = 1.0;
    for (const FilterBank& fb : p.layers) {
      details.push_back(filter_size_detail(fb));
      product *= details.back().norm;
    }
    double weight = kind == PenaltyKind::Both ? 0.5 : 1.0;
    value += weight * product;
    for (std::size_t l = 0; l < n_layers; ++l) {
      double rest = 1.0;
      for (std::size_t m = 0; m < n_layers; ++m)
        if (m != l) rest *= details[m].norm;
      if (rest == 0.0) continue;
      const FilterExtrema& det = details[l];
      std::size_t f = det.active_row;
      for (std::size_t g = 0; g < p.layers[l].out_dim(); ++g) {
        double lambda = det.args(f, g);
        double sign = det.signs(f, g);
        if (sign == 0.0) continue;
        double power = 1.0;
        for (std::size_t k = 0; k < p.layers[l].taps.size(); ++k) {
          grad.taps[l][k](f, g) += weight * rest * sign * power;
          power *= lambda;
        }
      }
    }
  }

  if (kind == PenaltyKind::Lipschitz || kind == PenaltyKind::Both) {
    double weight = kind == PenaltyKind::Both ? 0.5 : 1.0;
    for (std::size_t l = 0; l < n_layers; ++l) {
      FilterExtrema det = filter_lipschitz_detail(p.layers[l]);
      value += weight * det.norm;
      std::size_t f = det.active_row;
      for (std::size_t g = 0; g < p.layers[l].out_dim(); ++g) {
        double lambda = det.args(f, g);
        double sign = det.signs(f, g);
        if (sign == 0.0) continue;
        // d/d tap_k of |h'(lambda*)| = sign * k * lambda*^(k-1), k >= 1.
        double power = 1.0;
        for (std::size_t k = 1; k < p.layers[l].taps.size(); ++k) {
          grad.taps[l][k](f, g) +=
              weight * sign * static_cast<double>(k) * power;
          power *= lambda;
        }
      }
    }
  }

  return {value, std::move(grad)};
}

}  // namespace gnnctrl
