#include "gnnctrl/stability.hpp"

#include <algorithm>
#include <cmath>

#include "gnnctrl/controllers.hpp"
#include "gnnctrl/errors.hpp"
#include "gnnctrl/filters.hpp"
#include "gnnctrl/simulate.hpp"

namespace gnnctrl {

namespace {

struct SizeSummary {
  double c_phi = 1.0;
  double gamma_phi = 0.0;
};

SizeSummary summarize_sizes(const GnnParams& p) {
  SizeSummary out;
  for (const FilterBank& fb : p.layers) {
    double size = filter_size(fb);
    out.c_phi *= size;
    if (size > 0.0) out.gamma_phi += filter_lipschitz(fb) / size;
  }
  return out;
}

double xi_of(const DistributedSystem& d, double c_phi) {
  return spectral_norm(d.sys_graph) * inf_norm(d.sys_feat) +
         c_phi * spectral_norm(d.ctrl_graph) * inf_norm(d.ctrl_feat);
}

void check_compatible(const DistributedSystem& d, const GnnParams& p) {
  validate_system(d);
  validate_gnn(p);
  if (p.in_dim() != d.f_dim || p.out_dim() != d.g_dim)
    throw DimensionError("gnn feature dims must match the system");
}

}  // namespace

StabilityReport stability_constant(const DistributedSystem& d,
                                   const GnnParams& p) {
  check_compatible(d, p);
  GnnParams covered = with_interval(p, default_interval({d.support}));
  SizeSummary sizes = summarize_sizes(covered);
  StabilityReport out;
  out.c_phi = sizes.c_phi;
  out.gamma_phi = sizes.gamma_phi;
  out.xi = xi_of(d, sizes.c_phi);
  out.is_sufficiently_stable = out.xi < 1.0;
  if (out.is_sufficiently_stable) {
    out.beta0_per_unit_x0 = 1.0 / (1.0 - out.xi);
    out.beta1 = spectral_norm(d.ctrl_graph) * inf_norm(d.ctrl_feat) /
                (1.0 - out.xi);
  }
  return out;
}

StabilityChangeReport stability_change_bound(const DistributedSystem& d,
                                             const DistributedSystem& d_hat,
                                             const GnnParams& p) {
  check_compatible(d, p);
  check_compatible(d_hat, p);
  GnnParams covered =
      with_interval(p, default_interval({d.support, d_hat.support}));
  SizeSummary sizes = summarize_sizes(covered);

  StabilityChangeReport out;
  out.xi = xi_of(d, sizes.c_phi);
  out.xi_hat = xi_of(d_hat, sizes.c_phi);
  out.distance = system_distance(d, d_hat);
  out.c_xi_hat = spectral_norm(d.sys_graph) + inf_norm(d_hat.sys_feat) +
                 sizes.c_phi * (spectral_norm(d.ctrl_graph) +
                                inf_norm(d_hat.ctrl_feat));
  out.lhs = std::abs(out.xi - out.xi_hat);
  out.rhs = out.c_xi_hat * out.distance;
  out.holds = out.lhs <= out.rhs + 1e-9;
  return out;
}

double deviation_time_factor(double m, std::size_t t) {
  if (t == 0) return 0.0;
  return static_cast<double>(t) * std::pow(m, static_cast<double>(t - 1));
}

double cor1_envelope(double m) {
  if (!(m > 0.0 && m < 1.0))
    throw NotApplicableError("envelope requires 0 < m < 1");
  return -std::exp(-1.0) / (m * std::log(m));
}

DeviationReport deviation_bound(const DistributedSystem& d,
                                const DistributedSystem& d_hat,
                                const GnnParams& p, const Matrix& x0,
                                std::size_t horizon) {
  check_compatible(d, p);
  check_compatible(d_hat, p);
  GnnParams covered =
      with_interval(p, default_interval({d.support, d_hat.support}));
  SizeSummary sizes = summarize_sizes(covered);

  DeviationReport out;
  out.xi = xi_of(d, sizes.c_phi);
  out.xi_hat = xi_of(d_hat, sizes.c_phi);
  out.distance = system_distance(d, d_hat);
  out.c_xi_hat = spectral_norm(d.sys_graph) + inf_norm(d_hat.sys_feat) +
                 sizes.c_phi * (spectral_norm(d.ctrl_graph) +
                                inf_norm(d_hat.ctrl_feat));
  double n = static_cast<double>(d.n_nodes());
  out.c_phi_hat = out.c_xi_hat +
                  sizes.c_phi * sizes.gamma_phi *
                      spectral_norm(d_hat.ctrl_graph) *
                      inf_norm(d_hat.ctrl_feat) * (1.0 + 8.0 * std::sqrt(n));

  GnnController ctrl(covered, "gnn");
  CostSpec unit = make_cost_spec(Matrix::identity(d.f_dim),
                                 Matrix::identity(d.g_dim));
  TrajectoryRecord nominal = rollout(d, ctrl, x0, horizon, unit);
  TrajectoryRecord perturbed = rollout(d_hat, ctrl, x0, horizon, unit);
  out.truncated =
      nominal.diverged_at.has_value() || perturbed.diverged_at.has_value();

  double m = std::max(out.xi, out.xi_hat);
  double x0_size = l21_norm(x0);
  std::size_t steps =
      std::min(nominal.states.size(), perturbed.states.size());
  out.empirical.reserve(steps);
  out.bound.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    double dev = l21_norm(nominal.states[t] - perturbed.states[t]);
    double env = out.c_phi_hat * deviation_time_factor(m, t) * x0_size *
                 out.distance;
    out.empirical.push_back(dev);
    out.bound.push_back(env);
    if (env > 0.0) out.max_ratio = std::max(out.max_ratio, dev / env);
  }
  if (m > 0.0 && m < 1.0)
    out.uniform_constant = cor1_envelope(m) * out.c_phi_hat;
  return out;
}

bool cor1_limit_check(const DistributedSystem& d,
                      const DistributedSystem& d_hat, const GnnParams& p,
                      const Matrix& x0, std::size_t horizon) {
  check_compatible(d, p);
  check_compatible(d_hat, p);
  GnnParams covered =
      with_interval(p, default_interval({d.support, d_hat.support}));
  SizeSummary sizes = summarize_sizes(covered);
  double xi = xi_of(d, sizes.c_phi);
  double xi_hat = xi_of(d_hat, sizes.c_phi);
  if (xi >= 1.0 || xi_hat >= 1.0)
    throw NotApplicableError("limit check requires xi < 1 on both systems");

  GnnController ctrl(covered, "gnn");
  CostSpec unit = make_cost_spec(Matrix::identity(d.f_dim),
                                 Matrix::identity(d.g_dim));
  TrajectoryRecord nominal = rollout(d, ctrl, x0, horizon, unit);
  TrajectoryRecord perturbed = rollout(d_hat, ctrl, x0, horizon, unit);
  double final_dev =
      l21_norm(nominal.states.back() - perturbed.states.back());
  return final_dev < 1e-6 * l21_norm(x0);
}

}  // namespace gnnctrl
