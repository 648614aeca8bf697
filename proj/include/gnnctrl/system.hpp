#pragma once

#include <cstddef>

#include "gnnctrl/graph.hpp"
#include "gnnctrl/matrix.hpp"
#include "gnnctrl/rng.hpp"

namespace gnnctrl {

// Networked linear system. States are N x F graph signals, controls N x G;
// one step of the dynamics is
//   X(t+1) = sys_graph * X(t) * sys_feat + ctrl_graph * U(t) * ctrl_feat.
// sys_graph and ctrl_graph share the support's eigenvectors when generated
// by generate_system; perturbed copies generally stop respecting the
// support's sparsity pattern, which is accepted.
struct DistributedSystem {
  Matrix support;    // N x N, symmetric
  Matrix sys_graph;  // N x N
  Matrix sys_feat;   // F x F
  Matrix ctrl_graph; // N x N
  Matrix ctrl_feat;  // G x F
  std::size_t f_dim = 1;
  std::size_t g_dim = 1;

  std::size_t n_nodes() const noexcept { return support.rows(); }
};

void validate_system(const DistributedSystem& d);

// Quadratic cost weights. state_weight is F x F PSD, control_weight is
// G x G positive definite (minimum eigenvalue > 1e-10).
struct CostSpec {
  Matrix state_weight;
  Matrix control_weight;
};

CostSpec make_cost_spec(Matrix state_weight, Matrix control_weight);

// Support = normalized adjacency of g. sys_graph and ctrl_graph share the
// support's eigenvectors; their eigenvalues are standard normal draws
// rescaled so the largest magnitude equals a_norm (resp. b_norm). Feature
// matrices are identity-like (exactly identity for f_dim = g_dim = 1, the
// generated family's default). Requires a_norm >= 0 and b_norm > 0; a_norm
// = 0 yields a zero sys_graph.
DistributedSystem generate_system(const Graph& g, double a_norm, double b_norm,
                                  RngStream& rng, std::size_t f_dim = 1,
                                  std::size_t g_dim = 1);

// Largest of the five component distances: spectral norm of the support,
// sys_graph and ctrl_graph differences, infinity norm of the feature matrix
// differences. Dimensions must match.
double system_distance(const DistributedSystem& a, const DistributedSystem& b);

// Adds an independent symmetric perturbation of spectral norm exactly eps to
// each of support, sys_graph and ctrl_graph; feature matrices are kept, so
// system_distance(d, result) == eps up to numerics.
DistributedSystem perturb_system(const DistributedSystem& d, double eps,
                                 RngStream& rng);

}  // namespace gnnctrl
