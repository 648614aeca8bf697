#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gnnctrl/gnn.hpp"
#include "gnnctrl/matrix.hpp"
#include "gnnctrl/rng.hpp"
#include "gnnctrl/system.hpp"

namespace gnnctrl {

// State-feedback controller: maps an N x F state (and the support it lives
// on) to an N x G control. Trainable controllers additionally expose flat
// parameter access and an exact closed-loop gradient over a finite horizon.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual Matrix evaluate(const Matrix& state, const Matrix& support) const = 0;
  virtual std::string kind() const = 0;
  virtual std::size_t parameter_count() const = 0;
  virtual bool trainable() const { return false; }
  virtual std::unique_ptr<Controller> clone() const = 0;

  virtual std::vector<double> parameters() const;
  virtual void set_parameters(std::span<const double> flat);
  virtual std::pair<double, std::vector<double>> loss_and_gradient(
      const DistributedSystem& d, const CostSpec& cost, const Matrix& x0,
      std::size_t horizon) const;
  // Parameter-regularization penalty; only filter-based controllers have one.
  virtual std::pair<double, std::vector<double>> penalty_gradient(
      PenaltyKind kind) const;
};

struct RiccatiSolution {
  Matrix p_mat;
  Matrix gain;
  std::size_t iterations = 0;
  double residual = 0.0;
};

// Discrete-time Riccati fixed point P <- Q + A^T P A
//   - A^T P B (R + B^T P B)^{-1} B^T P A, started from P = Q, stopped when
// the Frobenius update drops below 1e-11 relative or after 100000 steps
// (ConvergenceError). gain = (R + B^T P B)^{-1} B^T P A.
RiccatiSolution solve_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                           const Matrix& r);

// u = -gain x with the gain from solve_dare on the node-level system; the
// generated family has scalar features so the cost weights broadcast to
// q * I and r * I. Not trainable.
class OptimalController final : public Controller {
 public:
  OptimalController(RiccatiSolution solution, std::size_t g_dim);
  Matrix evaluate(const Matrix& state, const Matrix& support) const override;
  std::string kind() const override { return "optimal"; }
  std::size_t parameter_count() const override { return 0; }
  std::unique_ptr<Controller> clone() const override;
  const RiccatiSolution& riccati() const noexcept { return solution_; }

 private:
  RiccatiSolution solution_;
  std::size_t g_dim_;
};

// u = 0.
class OpenLoopController final : public Controller {
 public:
  explicit OpenLoopController(std::size_t g_dim) : g_dim_(g_dim) {}
  Matrix evaluate(const Matrix& state, const Matrix& support) const override;
  std::string kind() const override { return "open_loop"; }
  std::size_t parameter_count() const override { return 0; }
  std::unique_ptr<Controller> clone() const override;

 private:
  std::size_t g_dim_;
};

// Graph neural network (or, with the identity nonlinearity, plain graph
// filter) used as a controller. The support passed to evaluate is the one
// the filters run on, so the same parameters transfer across systems.
class GnnController final : public Controller {
 public:
  GnnController(GnnParams params, std::string kind_tag);
  Matrix evaluate(const Matrix& state, const Matrix& support) const override;
  std::string kind() const override { return kind_; }
  std::size_t parameter_count() const override;
  bool trainable() const override { return true; }
  std::unique_ptr<Controller> clone() const override;
  std::vector<double> parameters() const override;
  void set_parameters(std::span<const double> flat) override;
  std::pair<double, std::vector<double>> loss_and_gradient(
      const DistributedSystem& d, const CostSpec& cost, const Matrix& x0,
      std::size_t horizon) const override;
  std::pair<double, std::vector<double>> penalty_gradient(
      PenaltyKind kind) const override;
  const GnnParams& params() const noexcept { return params_; }

 private:
  GnnParams params_;
  std::string kind_;
};

// Centralized two-layer perceptron on the stacked state vector:
// u = W2 tanh(W1 x), no biases. Scalar features only.
class MlpController final : public Controller {
 public:
  MlpController(Matrix w1, Matrix w2);
  Matrix evaluate(const Matrix& state, const Matrix& support) const override;
  std::string kind() const override { return "mlp"; }
  std::size_t parameter_count() const override { return w1_.size() + w2_.size(); }
  bool trainable() const override { return true; }
  std::unique_ptr<Controller> clone() const override;
  std::vector<double> parameters() const override;
  void set_parameters(std::span<const double> flat) override;
  std::pair<double, std::vector<double>> loss_and_gradient(
      const DistributedSystem& d, const CostSpec& cost, const Matrix& x0,
      std::size_t horizon) const override;

  std::size_t n_nodes() const noexcept { return w2_.rows(); }
  std::size_t hidden_dim() const noexcept { return w2_.cols(); }

 private:
  Matrix w1_;  // hidden x N
  Matrix w2_;  // N x hidden
};

// Distributed per-node perceptron. Node i sees a 2-vector (its own state,
// the mean of its one-hop neighbors' states as read off the support's
// sparsity) and applies its own weights:
//   u_i = w2_i^T tanh(w1_i z_i).
// Per-node weights are kept per row so they can be copied onto the nearest
// node of another graph.
class DmlpController final : public Controller {
 public:
  DmlpController(Matrix w1, Matrix w2, std::size_t hidden);
  Matrix evaluate(const Matrix& state, const Matrix& support) const override;
  std::string kind() const override { return "dmlp"; }
  std::size_t parameter_count() const override { return w1_.size() + w2_.size(); }
  bool trainable() const override { return true; }
  std::unique_ptr<Controller> clone() const override;
  std::vector<double> parameters() const override;
  void set_parameters(std::span<const double> flat) override;
  std::pair<double, std::vector<double>> loss_and_gradient(
      const DistributedSystem& d, const CostSpec& cost, const Matrix& x0,
      std::size_t horizon) const override;

  std::size_t hidden_dim() const noexcept { return hidden_; }
  std::size_t n_nodes() const noexcept { return w2_.rows(); }
  // New controller for a graph with to_positions: each target node takes the
  // weights of the positionally nearest source node (index tie-break).
  std::unique_ptr<DmlpController> replicate_to(const Matrix& from_positions,
                                               const Matrix& to_positions) const;

 private:
  Matrix w1_;  // (N * hidden) x 2, node i owns rows [i*hidden, (i+1)*hidden)
  Matrix w2_;  // N x hidden
  std::size_t hidden_;
};

std::unique_ptr<OptimalController> make_optimal_controller(
    const DistributedSystem& d, const CostSpec& cost);
std::unique_ptr<OpenLoopController> make_open_loop_controller(std::size_t g_dim);
std::unique_ptr<GnnController> make_gnn_controller(GnnParams params);
// Linear graph filter baseline: a GnnController with identity nonlinearity.
std::unique_ptr<GnnController> make_gf_controller(
    const std::vector<GnnLayerSpec>& arch, std::pair<double, double> interval,
    RngStream& rng);
std::unique_ptr<MlpController> make_mlp_controller(std::size_t n_nodes,
                                                   std::size_t hidden_factor,
                                                   RngStream& rng);
std::unique_ptr<DmlpController> make_dmlp_controller(std::size_t n_nodes,
                                                     std::size_t hidden,
                                                     RngStream& rng);

}  // namespace gnnctrl
