#include "gnnctrl/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gnnctrl/detail/bptt.hpp"
#include "gnnctrl/errors.hpp"

namespace gnnctrl {

namespace {

std::vector<std::vector<std::size_t>> neighbors_from_support(
    const Matrix& support) {
  std::vector<std::vector<std::size_t>> adj(support.rows());
  for (std::size_t i = 0; i < support.rows(); ++i)
    for (std::size_t j = 0; j < support.cols(); ++j)
      if (i != j && support(i, j) != 0.0) adj[i].push_back(j);
  return adj;
}

void require_scalar_features(const DistributedSystem& d, const char* who) {
  if (d.f_dim != 1 || d.g_dim != 1)
    throw InvalidArgumentError(std::string(who) +
                               " requires scalar node features");
}

}  // namespace

std::vector<double> Controller::parameters() const {
  throw NotApplicableError(kind() + " has no trainable parameters");
}

void Controller::set_parameters(std::span<const double>) {
  throw NotApplicableError(kind() + " has no trainable parameters");
}

std::pair<double, std::vector<double>> Controller::loss_and_gradient(
    const DistributedSystem&, const CostSpec&, const Matrix&,
    std::size_t) const {
  throw NotApplicableError(kind() + " has no trainable parameters");
}

std::pair<double, std::vector<double>> Controller::penalty_gradient(
    PenaltyKind kind) const {
  if (kind == PenaltyKind::None)
    return {0.0, std::vector<double>(trainable() ? parameter_count() : 0, 0.0)};
  throw NotApplicableError(this->kind() + " has no filter penalty");
}

RiccatiSolution solve_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                           const Matrix& r) {
  const std::size_t n = a.rows();
  const std::size_t m = b.cols();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
      r.rows() != m || r.cols() != m)
    throw DimensionError("solve_dare shape mismatch");

  const Matrix a_t = a.transpose();
  const Matrix b_t = b.transpose();
  auto step = [&](const Matrix& p) {
    Matrix pa = p * a;
    Matrix pb = p * b;
    Matrix gram = r + b_t * pb;                // R + B^T P B
    Matrix gain = solve_linear(gram, b_t * pa);  // (..)^{-1} B^T P A
    return std::pair<Matrix, Matrix>(q + a_t * pa - (a_t * pb) * gain, gain);
  };

  Matrix p = q;
  std::size_t iterations = 0;
  const std::size_t max_iterations = 100000;
  while (true) {
    auto [next, gain] = step(p);
    ++iterations;
    double delta = (next - p).frobenius_norm();
    p = std::move(next);
    if (delta <= 1e-11 * p.frobenius_norm()) break;
    if (iterations >= max_iterations)
      throw ConvergenceError("riccati fixed point did not converge");
  }
  auto [recomputed, gain] = step(p);
  RiccatiSolution out;
  out.residual = (recomputed - p).frobenius_norm();
  out.p_mat = std::move(p);
  out.gain = std::move(gain);
  out.iterations = iterations;
  return out;
}

OptimalController::OptimalController(RiccatiSolution solution,
                                     std::size_t g_dim)
    : solution_(std::move(solution)), g_dim_(g_dim) {}

Matrix OptimalController::evaluate(const Matrix& state,
                                   const Matrix& /*support*/) const {
  if (state.cols() != 1 || state.rows() != solution_.gain.cols())
    throw DimensionError("optimal controller state shape mismatch");
  return solution_.gain * state * -1.0;
}

std::unique_ptr<Controller> OptimalController::clone() const {
  return std::make_unique<OptimalController>(*this);
}

Matrix OpenLoopController::evaluate(const Matrix& state,
                                    const Matrix& /*support*/) const {
  return Matrix(state.rows(), g_dim_);
}

std::unique_ptr<Controller> OpenLoopController::clone() const {
  return std::make_unique<OpenLoopController>(*this);
}

GnnController::GnnController(GnnParams params, std::string kind_tag)
    : params_(std::move(params)), kind_(std::move(kind_tag)) {
  validate_gnn(params_);
}

Matrix GnnController::evaluate(const Matrix& state,
                               const Matrix& support) const {
  return gnn_forward(params_, support, state);
}

std::size_t GnnController::parameter_count() const {
  return gnn_parameter_count(params_);
}

std::unique_ptr<Controller> GnnController::clone() const {
  return std::make_unique<GnnController>(*this);
}

std::vector<double> GnnController::parameters() const {
  return flatten_params(params_);
}

void GnnController::set_parameters(std::span<const double> flat) {
  set_flat_params(params_, flat);
}

std::pair<double, std::vector<double>> GnnController::loss_and_gradient(
    const DistributedSystem& d, const CostSpec& cost, const Matrix& x0,
    std::size_t horizon) const {
  auto [loss, grad] = closed_loop_gradient(params_, d, cost, x0, horizon);
  return {loss, flatten_gradient(grad)};
}

std::pair<double, std::vector<double>> GnnController::penalty_gradient(
    PenaltyKind kind) const {
  auto [value, grad] = penalty_and_gradient(params_, kind);
  return {value, flatten_gradient(grad)};
}

MlpController::MlpController(Matrix w1, Matrix w2)
    : w1_(std::move(w1)), w2_(std::move(w2)) {
  if (w1_.rows() != w2_.cols() || w1_.cols() != w2_.rows())
    throw DimensionError("mlp weights must be hidden x N and N x hidden");
}

Matrix MlpController::evaluate(const Matrix& state,
                               const Matrix& /*support*/) const {
  if (state.cols() != 1 || state.rows() != w1_.cols())
    throw DimensionError("mlp state shape mismatch");
  Matrix h = w1_ * state;
  for (double& v : h.data()) v = std::tanh(v);
  return w2_ * h;
}

std::unique_ptr<Controller> MlpController::clone() const {
  return std::make_unique<MlpController>(*this);
}

std::vector<double> MlpController::parameters() const {
  std::vector<double> flat(w1_.data().begin(), w1_.data().end());
  flat.insert(flat.end(), w2_.data().begin(), w2_.data().end());
  return flat;
}

void MlpController::set_parameters(std::span<const double> flat) {
  if (flat.size() != w1_.size() + w2_.size())
    throw DimensionError("mlp flat parameter length mismatch");
  std::copy(flat.begin(), flat.begin() + w1_.size(), w1_.data().begin());
  std::copy(flat.begin() + w1_.size(), flat.end(), w2_.data().begin());
}

std::pair<double, std::vector<double>> MlpController::loss_and_gradient(
    const DistributedSystem& d, const CostSpec& cost, const Matrix& x0,
    std::size_t horizon) const {
  require_scalar_features(d, "mlp controller");
  Matrix grad_w1(w1_.rows(), w1_.cols());
  Matrix grad_w2(w2_.rows(), w2_.cols());
  std::vector<Matrix> inputs(horizon), hiddens(horizon);
  const Matrix w1_t = w1_.transpose();
  const Matrix w2_t = w2_.transpose();

  double loss = detail::bptt_rollout(
      d, cost.state_weight, cost.control_weight, x0, horizon,
      [&](std::size_t t, const Matrix& x) {
        Matrix h = w1_ * x;
        for (double& v : h.data()) v = std::tanh(v);
        inputs[t] = x;
        hiddens[t] = h;
        return w2_ * h;
      },
      [&](std::size_t t, const Matrix& g_u) {
        grad_w2 += g_u * hiddens[t].transpose();
        Matrix g_h = w2_t * g_u;
        for (std::size_t i = 0; i < g_h.size(); ++i) {
          double h = hiddens[t].data()[i];
          g_h.data()[i] *= 1.0 - h * h;
        }
        grad_w1 += g_h * inputs[t].transpose();
        return w1_t * g_h;
      });

  std::vector<double> flat(grad_w1.data().begin(), grad_w1.data().end());
  flat.insert(flat.end(), grad_w2.data().begin(), grad_w2.data().end());
  return {loss, std::move(flat)};
}

DmlpController::DmlpController(Matrix w1, Matrix w2, std::size_t hidden)
    : w1_(std::move(w1)), w2_(std::move(w2)), hidden_(hidden) {
  if (hidden_ == 0) throw InvalidArgumentError("hidden dim must be positive");
  if (w1_.cols() != 2 || w1_.rows() != w2_.rows() * hidden_ ||
      w2_.cols() != hidden_)
    throw DimensionError("dmlp weight shapes inconsistent");
}

Matrix DmlpController::evaluate(const Matrix& state,
                                const Matrix& support) const {
  const std::size_t n = w2_.rows();
  if (state.cols() != 1 || state.rows() != n ||
      support.rows() != n || support.cols() != n)
    throw DimensionError("dmlp state shape mismatch");
  auto adj = neighbors_from_support(support);
  Matrix u(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    if (!adj[i].empty()) {
      for (std::size_t j : adj[i]) mean += state(j, 0);
      mean /= static_cast<double>(adj[i].size());
    }
    double out = 0.0;
    for (std::size_t h = 0; h < hidden_; ++h) {
      double pre = w1_(i * hidden_ + h, 0) * state(i, 0) +
                   w1_(i * hidden_ + h, 1) * mean;
      out += w2_(i, h) * std::tanh(pre);
    }
    u(i, 0) = out;
  }
  return u;
}

std::unique_ptr<Controller> DmlpController::clone() const {
  return std::make_unique<DmlpController>(*this);
}

std::vector<double> DmlpController::parameters() const {
  std::vector<double> flat(w1_.data().begin(), w1_.data().end());
  flat.insert(flat.end(), w2_.data().begin(), w2_.data().end());
  return flat;
}

void DmlpController::set_parameters(std::span<const double> flat) {
  if (flat.size() != w1_.size() + w2_.size())
    throw DimensionError("dmlp flat parameter length mismatch");
  std::copy(flat.begin(), flat.begin() + w1_.size(), w1_.data().begin());
  std::copy(flat.begin() + w1_.size(), flat.end(), w2_.data().begin());
}

std::pair<double, std::vector<double>> DmlpController::loss_and_gradient(
    const DistributedSystem& d, const CostSpec& cost, const Matrix& x0,
    std::size_t horizon) const {
  require_scalar_features(d, "dmlp controller");
  const std::size_t n = w2_.rows();
  if (d.n_nodes() != n) throw DimensionError("dmlp node count mismatch");
  auto adj = neighbors_from_support(d.support);

  Matrix grad_w1(w1_.rows(), 2);
  Matrix grad_w2(n, hidden_);
  std::vector<Matrix> inputs(horizon), means(horizon), hiddens(horizon);

  double loss = detail::bptt_rollout(
      d, cost.state_weight, cost.control_weight, x0, horizon,
      [&](std::size_t t, const Matrix& x) {
        Matrix mean(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
          double m = 0.0;
          if (!adj[i].empty()) {
            for (std::size_t j : adj[i]) m += x(j, 0);
            m /= static_cast<double>(adj[i].size());
          }
          mean(i, 0) = m;
        }
        Matrix hidden(n, hidden_);
        Matrix u(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
          double out = 0.0;
          for (std::size_t h = 0; h < hidden_; ++h) {
            double pre = w1_(i * hidden_ + h, 0) * x(i, 0) +
                         w1_(i * hidden_ + h, 1) * mean(i, 0);
            hidden(i, h) = std::tanh(pre);
            out += w2_(i, h) * hidden(i, h);
          }
          u(i, 0) = out;
        }
        inputs[t] = x;
        means[t] = std::move(mean);
        hiddens[t] = std::move(hidden);
        return u;
      },
      [&](std::size_t t, const Matrix& g_u) {
        Matrix g_x(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
          double g_mean = 0.0;
          for (std::size_t h = 0; h < hidden_; ++h) {
            double act = hiddens[t](i, h);
            grad_w2(i, h) += g_u(i, 0) * act;
            double g_pre = g_u(i, 0) * w2_(i, h) * (1.0 - act * act);
            grad_w1(i * hidden_ + h, 0) += g_pre * inputs[t](i, 0);
            grad_w1(i * hidden_ + h, 1) += g_pre * means[t](i, 0);
            g_x(i, 0) += g_pre * w1_(i * hidden_ + h, 0);
            g_mean += g_pre * w1_(i * hidden_ + h, 1);
          }
          if (!adj[i].empty()) {
            double share = g_mean / static_cast<double>(adj[i].size());
            for (std::size_t j : adj[i]) g_x(j, 0) += share;
          }
        }
        return g_x;
      });

  std::vector<double> flat(grad_w1.data().begin(), grad_w1.data().end());
  flat.insert(flat.end(), grad_w2.data().begin(), grad_w2.data().end());
  return {loss, std::move(flat)};
}

std::unique_ptr<DmlpController> DmlpController::replicate_to(
    const Matrix& from_positions, const Matrix& to_positions) const {
  const std::size_t n_from = w2_.rows();
  if (from_positions.rows() != n_from || from_positions.cols() != 2 ||
      to_positions.cols() != 2)
    throw DimensionError("replicate_to position shape mismatch");
  const std::size_t n_to = to_positions.rows();
  Matrix w1(n_to * hidden_, 2);
  Matrix w2(n_to, hidden_);
  for (std::size_t i = 0; i < n_to; ++i) {
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n_from; ++j) {
      double dx = to_positions(i, 0) - from_positions(j, 0);
      double dy = to_positions(i, 1) - from_positions(j, 1);
      double dist = dx * dx + dy * dy;
      if (dist < best) {
        best = dist;
        nearest = j;
      }
    }
    for (std::size_t h = 0; h < hidden_; ++h) {
      w1(i * hidden_ + h, 0) = w1_(nearest * hidden_ + h, 0);
      w1(i * hidden_ + h, 1) = w1_(nearest * hidden_ + h, 1);
      w2(i, h) = w2_(nearest, h);
    }
  }
  return std::make_unique<DmlpController>(std::move(w1), std::move(w2),
                                          hidden_);
}

std::unique_ptr<OptimalController> make_optimal_controller(
    const DistributedSystem& d, const CostSpec& cost) {
  validate_system(d);
  require_scalar_features(d, "optimal controller");
  const std::size_t n = d.n_nodes();
  Matrix q = Matrix::identity(n) * cost.state_weight(0, 0);
  Matrix r = Matrix::identity(n) * cost.control_weight(0, 0);
  RiccatiSolution sol = solve_dare(d.sys_graph, d.ctrl_graph, q, r);
  return std::make_unique<OptimalController>(std::move(sol), d.g_dim);
}

std::unique_ptr<OpenLoopController> make_open_loop_controller(
    std::size_t g_dim) {
  return std::make_unique<OpenLoopController>(g_dim);
}

std::unique_ptr<GnnController> make_gnn_controller(GnnParams params) {
  return std::make_unique<GnnController>(std::move(params), "gnn");
}

std::unique_ptr<GnnController> make_gf_controller(
    const std::vector<GnnLayerSpec>& arch, std::pair<double, double> interval,
    RngStream& rng) {
  GnnParams p = make_gnn(arch, interval, Nonlinearity::Identity, rng);
  return std::make_unique<GnnController>(std::move(p), "gf");
}

std::unique_ptr<MlpController> make_mlp_controller(std::size_t n_nodes,
                                                   std::size_t hidden_factor,
                                                   RngStream& rng) {
  if (n_nodes == 0 || hidden_factor == 0)
    throw InvalidArgumentError("mlp sizes must be positive");
  const std::size_t hidden = n_nodes * hidden_factor;
  double a1 = 1.0 / std::sqrt(static_cast<double>(n_nodes));
  double a2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  Matrix w1(hidden, n_nodes);
  for (double& v : w1.data()) v = rng.uniform(-a1, a1);
  Matrix w2(n_nodes, hidden);
  for (double& v : w2.data()) v = rng.uniform(-a2, a2);
  return std::make_unique<MlpController>(std::move(w1), std::move(w2));
}

std::unique_ptr<DmlpController> make_dmlp_controller(std::size_t n_nodes,
                                                     std::size_t hidden,
                                                     RngStream& rng) {
  if (n_nodes == 0 || hidden == 0)
    throw InvalidArgumentError("dmlp sizes must be positive");
  double a1 = 1.0 / std::sqrt(2.0);
  double a2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  Matrix w1(n_nodes * hidden, 2);
  for (double& v : w1.data()) v = rng.uniform(-a1, a1);
  Matrix w2(n_nodes, hidden);
  for (double& v : w2.data()) v = rng.uniform(-a2, a2);
  return std::make_unique<DmlpController>(std::move(w1), std::move(w2), hidden);
}

}  // namespace gnnctrl
