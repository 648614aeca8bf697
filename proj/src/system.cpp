#include "gnnctrl/system.hpp"

#include <algorithm>
#include <cmath>

#include "gnnctrl/errors.hpp"

namespace gnnctrl {

void validate_system(const DistributedSystem& d) {
  const std::size_t n = d.support.rows();
  if (n == 0 || d.support.cols() != n)
    throw DimensionError("support must be square and nonempty");
  if (d.sys_graph.rows() != n || d.sys_graph.cols() != n)
    throw DimensionError("sys_graph must match the support's shape");
  if (d.ctrl_graph.rows() != n || d.ctrl_graph.cols() != n)
    throw DimensionError("ctrl_graph must match the support's shape");
  if (d.sys_feat.rows() != d.f_dim || d.sys_feat.cols() != d.f_dim)
    throw DimensionError("sys_feat must be f_dim x f_dim");
  if (d.ctrl_feat.rows() != d.g_dim || d.ctrl_feat.cols() != d.f_dim)
    throw DimensionError("ctrl_feat must be g_dim x f_dim");
  double scale = std::max(1.0, d.support.frobenius_norm());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(d.support(i, j) - d.support(j, i)) > 1e-10 * scale)
        throw InvalidArgumentError("support must be symmetric");
}

CostSpec make_cost_spec(Matrix state_weight, Matrix control_weight) {
  if (state_weight.rows() != state_weight.cols() || state_weight.rows() == 0)
    throw DimensionError("state weight must be square");
  if (control_weight.rows() != control_weight.cols() ||
      control_weight.rows() == 0)
    throw DimensionError("control weight must be square");
  Spectrum qs = sym_eig(state_weight);
  if (qs.values.front() < -1e-10 * std::max(1.0, std::abs(qs.values.back())))
    throw InvalidArgumentError("state weight must be PSD");
  Spectrum rs = sym_eig(control_weight);
  if (rs.values.front() <= 1e-10)
    throw InvalidArgumentError("control weight must be positive definite");
  return CostSpec{std::move(state_weight), std::move(control_weight)};
}

DistributedSystem generate_system(const Graph& g, double a_norm, double b_norm,
                                  RngStream& rng, std::size_t f_dim,
                                  std::size_t g_dim) {
  if (a_norm < 0.0 || b_norm <= 0.0)
    throw InvalidArgumentError("requires a_norm >= 0 and b_norm > 0");
  if (f_dim == 0 || g_dim == 0)
    throw InvalidArgumentError("feature dimensions must be positive");
  DistributedSystem d;
  d.support = build_support(g);
  Spectrum spec = sym_eig(d.support);
  const std::size_t n = g.n;

  auto draw_rescaled = [&](double target) {
    std::vector<double> vals(n);
    double top = 0.0;
    do {
      top = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        vals[i] = rng.normal();
        top = std::max(top, std::abs(vals[i]));
      }
    } while (top == 0.0);
    for (double& v : vals) v *= target / top;
    return vals;
  };

  auto from_eigenvalues = [&](const std::vector<double>& vals) {
    // V diag(vals) V^T with V the support's eigenvectors (ascending order).
    Matrix scaled = spec.vectors;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= vals[j];
    return scaled * spec.vectors.transpose();
  };

  d.sys_graph = from_eigenvalues(draw_rescaled(a_norm));
  d.ctrl_graph = from_eigenvalues(draw_rescaled(b_norm));
  d.sys_feat = Matrix::identity(f_dim);
  Matrix ctrl_feat(g_dim, f_dim);
  for (std::size_t i = 0; i < std::min(g_dim, f_dim); ++i) ctrl_feat(i, i) = 1.0;
  d.ctrl_feat = std::move(ctrl_feat);
  d.f_dim = f_dim;
  d.g_dim = g_dim;
  return d;
}

double system_distance(const DistributedSystem& a, const DistributedSystem& b) {
  if (a.n_nodes() != b.n_nodes() || a.f_dim != b.f_dim || a.g_dim != b.g_dim)
    throw DimensionError("system_distance requires matching dimensions");
  double dist = spectral_norm(a.support - b.support);
  dist = std::max(dist, spectral_norm(a.sys_graph - b.sys_graph));
  dist = std::max(dist, spectral_norm(a.ctrl_graph - b.ctrl_graph));
  dist = std::max(dist, inf_norm(a.sys_feat - b.sys_feat));
  dist = std::max(dist, inf_norm(a.ctrl_feat - b.ctrl_feat));
  return dist;
}

DistributedSystem perturb_system(const DistributedSystem& d, double eps,
                                 RngStream& rng) {
  if (eps < 0.0) throw InvalidArgumentError("eps must be >= 0");
  validate_system(d);
  const std::size_t n = d.n_nodes();
  auto symmetric_direction = [&]() {
    Matrix z(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) z(i, j) = rng.normal();
    Matrix sym = (z + z.transpose()) * 0.5;
    double norm = spectral_norm(sym);
    if (norm == 0.0) throw InvalidArgumentError("degenerate perturbation draw");
    sym *= 1.0 / norm;
    return sym;
  };
  DistributedSystem out = d;
  if (eps > 0.0) {
    out.support = d.support + symmetric_direction() * eps;
    out.sys_graph = d.sys_graph + symmetric_direction() * eps;
    out.ctrl_graph = d.ctrl_graph + symmetric_direction() * eps;
  }
  return out;
}

}  // namespace gnnctrl
