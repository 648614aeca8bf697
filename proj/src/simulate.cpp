#include "gnnctrl/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "gnnctrl/errors.hpp"
#include "gnnctrl/filters.hpp"

namespace gnnctrl {

double summable_size(const Disturbance& dist) {
  double total = 0.0;
  for (const Matrix& e : dist.signals) total += l21_norm(e);
  return total;
}

TrajectoryRecord rollout(const DistributedSystem& d, const Controller& ctrl,
                         const Matrix& x0, std::size_t horizon,
                         const CostSpec& cost, const Disturbance* dist) {
  validate_system(d);
  if (x0.rows() != d.n_nodes() || x0.cols() != d.f_dim)
    throw DimensionError("initial state shape mismatch");
  if (dist && dist->signals.size() < horizon)
    throw DimensionError("disturbance shorter than the horizon");

  TrajectoryRecord rec;
  rec.states.reserve(horizon + 1);
  rec.states.push_back(x0);
  rec.state_sizes.push_back(l21_norm(x0));

  for (std::size_t t = 0; t < horizon; ++t) {
    const Matrix& x = rec.states.back();
    if (rec.state_sizes.back() > 1e12) {
      rec.diverged_at = t;
      break;
    }
    Matrix u = ctrl.evaluate(x, d.support);
    if (u.rows() != d.n_nodes() || u.cols() != d.g_dim)
      throw DimensionError("controller output shape mismatch");
    if (dist) u += dist->signals[t];

    Matrix xq = x * cost.state_weight;
    Matrix ur = u * cost.control_weight;
    double step = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      step += x.data()[i] * xq.data()[i];
    for (std::size_t i = 0; i < u.size(); ++i)
      step += u.data()[i] * ur.data()[i];
    rec.step_costs.push_back(step);
    rec.total_cost += step;

    Matrix next =
        d.sys_graph * x * d.sys_feat + d.ctrl_graph * u * d.ctrl_feat;
    rec.states.push_back(std::move(next));
    rec.state_sizes.push_back(l21_norm(rec.states.back()));
    rec.controls.push_back(std::move(u));
  }
  rec.stable = classify_stable(rec);
  return rec;
}

bool classify_stable(const TrajectoryRecord& rec) {
  if (rec.diverged_at.has_value()) return false;
  if (rec.state_sizes.empty()) return false;
  double initial = rec.state_sizes.front();
  if (initial == 0.0) {
    return std::all_of(rec.state_sizes.begin(), rec.state_sizes.end(),
                       [](double v) { return v == 0.0; });
  }
  double peak = *std::max_element(rec.state_sizes.begin(),
                                  rec.state_sizes.end());
  return peak <= 1e3 * initial && rec.state_sizes.back() < initial;
}

IssResult iss_check(const DistributedSystem& d, const GnnParams& p,
                    const Matrix& x0, const Disturbance& dist,
                    std::size_t horizon) {
  validate_system(d);
  validate_gnn(p);
  if (p.in_dim() != d.f_dim || p.out_dim() != d.g_dim)
    throw DimensionError("gnn feature dims must match the system");

  GnnParams covered = with_interval(p, default_interval({d.support}));
  double c_phi = 1.0;
  for (const FilterBank& fb : covered.layers) c_phi *= filter_size(fb);

  IssResult out;
  out.xi = spectral_norm(d.sys_graph) * inf_norm(d.sys_feat) +
           c_phi * spectral_norm(d.ctrl_graph) * inf_norm(d.ctrl_feat);
  if (out.xi >= 1.0)
    throw NotApplicableError("stability constant is not < 1");

  out.beta0 = l21_norm(x0) / (1.0 - out.xi);
  out.beta1 = spectral_norm(d.ctrl_graph) * inf_norm(d.ctrl_feat) /
              (1.0 - out.xi);

  GnnController ctrl(covered, "gnn");
  CostSpec unit = make_cost_spec(Matrix::identity(d.f_dim),
                                 Matrix::identity(d.g_dim));
  TrajectoryRecord rec = rollout(d, ctrl, x0, horizon, unit, &dist);
  out.lhs = 0.0;
  for (double s : rec.state_sizes) out.lhs += s;
  out.rhs = out.beta0 + out.beta1 * summable_size(dist);
  out.holds = out.lhs <= out.rhs + 1e-9;
  return out;
}

}  // namespace gnnctrl
