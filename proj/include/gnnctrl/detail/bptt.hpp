#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gnnctrl/errors.hpp"
#include "gnnctrl/matrix.hpp"
#include "gnnctrl/system.hpp"

namespace gnnctrl::detail {

// Shared backpropagation-through-time skeleton for trainable controllers.
//
//   forward(t, X_t) -> U_t        (must record whatever backward needs)
//   backward(t, G_U) -> G_X       (gradient through the controller at step t,
//                                  accumulating parameter gradients itself)
//
// Loss is the truncated quadratic cost sum over t < horizon of
// tr(X^T X Q) + tr(U^T U R). States with l21 size above 1e12 abort with
// DivergenceError.
template <class Fwd, class Bwd>
double bptt_rollout(const DistributedSystem& d, const Matrix& q_weight,
                    const Matrix& r_weight, const Matrix& x0,
                    std::size_t horizon, Fwd&& forward, Bwd&& backward) {
  validate_system(d);
  if (x0.rows() != d.n_nodes() || x0.cols() != d.f_dim)
    throw DimensionError("initial state shape mismatch");

  const Matrix a_t = d.sys_graph.transpose();
  const Matrix abar_t = d.sys_feat.transpose();
  const Matrix b_t = d.ctrl_graph.transpose();
  const Matrix bbar_t = d.ctrl_feat.transpose();

  std::vector<Matrix> states;
  std::vector<Matrix> controls;
  states.reserve(horizon + 1);
  controls.reserve(horizon);
  states.push_back(x0);

  double loss = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const Matrix& x = states.back();
    if (l21_norm(x) > 1e12)
      throw DivergenceError("state size exceeded 1e12 at step " +
                                std::to_string(t),
                            t);
    Matrix u = forward(t, x);
    // Step cost tr(X^T X Q) + tr(U^T U R), the squared weighted sizes.
    Matrix xq = x * q_weight;
    Matrix ur = u * r_weight;
    double step = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      step += x.data()[i] * xq.data()[i];
    for (std::size_t i = 0; i < u.size(); ++i)
      step += u.data()[i] * ur.data()[i];
    loss += step;
    states.push_back(d.sys_graph * x * d.sys_feat +
                     d.ctrl_graph * u * d.ctrl_feat);
    controls.push_back(std::move(u));
  }

  Matrix carry(d.n_nodes(), d.f_dim);
  for (std::size_t t = horizon; t-- > 0;) {
    Matrix g_u = controls[t] * r_weight * 2.0;
    Matrix g_x = states[t] * q_weight * 2.0;
    if (carry.max_abs() != 0.0) {
      g_u += b_t * carry * bbar_t;
      g_x += a_t * carry * abar_t;
    }
    g_x += backward(t, g_u);
    carry = std::move(g_x);
  }
  return loss;
}

}  // namespace gnnctrl::detail
