#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "gnnctrl/controllers.hpp"
#include "gnnctrl/errors.hpp"
#include "gnnctrl/filters.hpp"
#include "gnnctrl/graph.hpp"
#include "gnnctrl/matrix.hpp"
#include "gnnctrl/rng.hpp"
#include "gnnctrl/simulate.hpp"
#include "gnnctrl/system.hpp"

using namespace gnnctrl;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

DistributedSystem small_system(std::uint64_t key, double a_norm = 0.95) {
  RngStream root(616, key);
  for (std::uint64_t attempt = 0;; ++attempt) {
    RngStream r = root.substream(attempt);
    Graph g = generate_geometric_graph(9, 2, r);
    if (!is_connected(g)) continue;
    RngStream sys = root.substream(4000 + attempt);
    return generate_system(g, a_norm, 1.0, sys);
  }
}

// Positive root of the scalar Riccati quadratic
// b^2 P^2 + (r - q b^2 - a^2 r) P - q r = 0.
double scalar_dare(double a, double b, double q, double r) {
  double bb = b * b;
  double lin = r - q * bb - a * a * r;
  return (-lin + std::sqrt(lin * lin + 4.0 * bb * q * r)) / (2.0 * bb);
}

// Central differences on any trainable controller.
std::vector<double> fd_gradient(Controller& ctrl, const DistributedSystem& d,
                                const CostSpec& cost, const Matrix& x0,
                                std::size_t horizon, double h) {
  std::vector<double> flat = ctrl.parameters();
  std::vector<double> grad(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    double keep = flat[i];
    flat[i] = keep + h;
    ctrl.set_parameters(flat);
    double up = ctrl.loss_and_gradient(d, cost, x0, horizon).first;
    flat[i] = keep - h;
    ctrl.set_parameters(flat);
    double down = ctrl.loss_and_gradient(d, cost, x0, horizon).first;
    flat[i] = keep;
    grad[i] = (up - down) / (2.0 * h);
  }
  ctrl.set_parameters(flat);
  return grad;
}

void check_gradient(Controller& ctrl, const DistributedSystem& d,
                    const CostSpec& cost, const Matrix& x0,
                    std::size_t horizon) {
  auto [value, grad] = ctrl.loss_and_gradient(d, cost, x0, horizon);
  CHECK(value > 0.0);
  std::vector<double> fd = fd_gradient(ctrl, d, cost, x0, horizon, 1e-6);
  REQUIRE(grad.size() == fd.size());
  double scale = 1.0;
  for (double g : fd) scale = std::max(scale, std::abs(g));
  for (std::size_t i = 0; i < fd.size(); ++i)
    CHECK(grad[i] == doctest::Approx(fd[i]).epsilon(1e-4).scale(scale));
}

}  // namespace

TEST_CASE("solve_dare reproduces the scalar closed form") {
  for (double a : {0.5, 0.9, 1.2}) {
    for (double r : {0.5, 1.0, 2.0}) {
      Matrix am{{a}}, bm{{1.0}}, qm{{1.0}}, rm{{r}};
      RiccatiSolution sol = solve_dare(am, bm, qm, rm);
      double expected = scalar_dare(a, 1.0, 1.0, r);
      CHECK(sol.p_mat(0, 0) == doctest::Approx(expected).epsilon(1e-9));
      double gain = a * expected / (r + expected);
      CHECK(sol.gain(0, 0) == doctest::Approx(gain).epsilon(1e-9));
    }
  }
}

TEST_CASE("solve_dare fixed point has a tiny residual on matrix systems") {
  RngStream rng(51, 0);
  for (int trial = 0; trial < 5; ++trial) {
    std::size_t n = 3 + rng.uniform_index(4);
    Matrix a = random_matrix(n, n, rng);
    a *= 0.9 / spectral_norm(a);
    Matrix b = random_matrix(n, n, rng);
    Matrix q = Matrix::identity(n);
    Matrix r = Matrix::identity(n);
    RiccatiSolution sol = solve_dare(a, b, q, r);
    const Matrix& p = sol.p_mat;
    Matrix btpb = b.transpose() * p * b;
    Matrix inner = solve_linear(r + btpb, b.transpose() * p * a);
    Matrix rhs = q + a.transpose() * p * a -
                 a.transpose() * p * b * inner;
    CHECK((p - rhs).max_abs() < 1e-8 * (1.0 + p.max_abs()));
    CHECK((sol.gain - inner).max_abs() < 1e-9 * (1.0 + inner.max_abs()));
    // Value matrix is symmetric PSD.
    CHECK((p - p.transpose()).max_abs() < 1e-8);
  }
}

TEST_CASE("optimal controller minimizes cost among gain tweaks") {
  DistributedSystem d = small_system(0);
  CostSpec cost = make_cost_spec(Matrix::identity(1), Matrix::identity(1));
  auto opt = make_optimal_controller(d, cost);
  RngStream rng(52, 1);
  Matrix x0 = random_matrix(d.n_nodes(), 1, rng);
  const std::size_t horizon = 120;  // long enough to stand in for infinity
  double jstar = rollout(d, *opt, x0, horizon, cost).total_cost;

  // Any static linear feedback u = -(K + delta) x costs at least as much.
  auto open = make_open_loop_controller(1);
  CHECK(jstar <= rollout(d, *open, x0, horizon, cost).total_cost);
  for (int trial = 0; trial < 3; ++trial) {
    Matrix delta = random_matrix(d.n_nodes(), d.n_nodes(), rng);
    delta *= 0.05 / spectral_norm(delta);
    struct Tweaked final : Controller {
      const OptimalController* base;
      Matrix delta;
      Matrix evaluate(const Matrix& x, const Matrix& s) const override {
        return base->evaluate(x, s) - delta * x;
      }
      std::string kind() const override { return "tweaked"; }
      std::size_t parameter_count() const override { return 0; }
      std::unique_ptr<Controller> clone() const override { return nullptr; }
    };
    Tweaked tweaked;
    tweaked.base = opt.get();
    tweaked.delta = delta;
    CHECK(jstar <= rollout(d, tweaked, x0, horizon, cost).total_cost + 1e-9);
  }
}

TEST_CASE("optimal controller on a single node matches the scalar law") {
  Graph g;
  g.n = 1;
  Matrix support(1, 1);
  DistributedSystem d;
  d.support = Matrix{{0.0}};
  d.sys_graph = Matrix{{0.9}};
  d.sys_feat = Matrix{{1.0}};
  d.ctrl_graph = Matrix{{1.0}};
  d.ctrl_feat = Matrix{{1.0}};
  CostSpec cost = make_cost_spec(Matrix::identity(1), Matrix::identity(1));
  auto opt = make_optimal_controller(d, cost);
  Matrix x{{2.0}};
  double p = scalar_dare(0.9, 1.0, 1.0, 1.0);
  double gain = 0.9 * p / (1.0 + p);
  Matrix u = opt->evaluate(x, d.support);
  CHECK(u(0, 0) == doctest::Approx(-gain * 2.0).epsilon(1e-9));
}

TEST_CASE("open loop controller returns zeros of the right shape") {
  auto open = make_open_loop_controller(2);
  Matrix x(5, 1);
  Matrix u = open->evaluate(x, Matrix(5, 5));
  CHECK(u.rows() == 5);
  CHECK(u.cols() == 2);
  CHECK(u.max_abs() == 0.0);
  CHECK(open->kind() == "open_loop");
  CHECK(!open->trainable());
}

TEST_CASE("mlp closed-loop gradient matches central differences") {
  DistributedSystem d = small_system(1);
  CostSpec cost = make_cost_spec(Matrix::identity(1), Matrix::identity(1));
  RngStream rng(53, 2);
  auto mlp = make_mlp_controller(d.n_nodes(), 2, rng);
  CHECK(mlp->trainable());
  CHECK(mlp->parameter_count() ==
        2 * d.n_nodes() * (2 * d.n_nodes()));  // hidden = 2N, in = out = N
  Matrix x0 = random_matrix(d.n_nodes(), 1, rng);
  check_gradient(*mlp, d, cost, x0, 5);
}

TEST_CASE("dmlp closed-loop gradient matches central differences") {
  DistributedSystem d = small_system(2);
  CostSpec cost = make_cost_spec(Matrix::identity(1), Matrix::identity(1));
  RngStream rng(54, 3);
  auto dmlp = make_dmlp_controller(d.n_nodes(), 3, rng);
  CHECK(dmlp->parameter_count() == d.n_nodes() * 3 * 2 + d.n_nodes() * 3);
  Matrix x0 = random_matrix(d.n_nodes(), 1, rng);
  check_gradient(*dmlp, d, cost, x0, 5);
}

TEST_CASE("gnn controller gradient matches central differences") {
  DistributedSystem d = small_system(3);
  CostSpec cost = make_cost_spec(Matrix::identity(1), Matrix::identity(1));
  RngStream rng(55, 4);
  auto interval = default_interval({d.support});
  auto gnn = make_gnn_controller(
      make_gnn({{1, 3, 2}, {3, 1, 0}}, interval, Nonlinearity::Tanh, rng));
  CHECK(gnn->kind() == "gnn");
  Matrix x0 = random_matrix(d.n_nodes(), 1, rng);
  check_gradient(*gnn, d, cost, x0, 6);
}

TEST_CASE("gf controller is linear and reports its own kind") {
  DistributedSystem d = small_system(4);
  RngStream rng(56, 5);
  auto interval = default_interval({d.support});
  auto gf = make_gf_controller({{1, 4, 3}, {4, 1, 0}}, interval, rng);
  CHECK(gf->kind() == "gf");
  Matrix x = random_matrix(d.n_nodes(), 1, rng);
  Matrix z = random_matrix(d.n_nodes(), 1, rng);
  Matrix lhs = gf->evaluate(x * 2.0 + z * -3.0, d.support);
  Matrix rhs = gf->evaluate(x, d.support) * 2.0 + gf->evaluate(z, d.support) * -3.0;
  CHECK((lhs - rhs).max_abs() < 1e-10 * (1.0 + rhs.max_abs()));
}

TEST_CASE("dmlp sees its own state and the neighbor mean") {
  // Two nodes joined by one edge: the neighbor mean of node 0 is node 1's
  // state. Make node 0's weights pass through input 0 (own) and node 1's
  // pass through input 1 (neighbor mean), then check each column is used.
  Matrix w1(2 * 1, 2);  // hidden = 1
  w1(0, 0) = 1.0;  // node 0, own state
  w1(0, 1) = 0.0;
  w1(1, 0) = 0.0;  // node 1, neighbor mean
  w1(1, 1) = 1.0;
  Matrix w2(2, 1);
  w2(0, 0) = 1.0;
  w2(1, 0) = 1.0;
  DmlpController dmlp(w1, w2, 1);
  Matrix support{{0.0, 0.7}, {0.7, 0.0}};
  Matrix x{{0.3}, {-0.2}};
  Matrix u = dmlp.evaluate(x, support);
  CHECK(u(0, 0) == doctest::Approx(std::tanh(0.3)));
  CHECK(u(1, 0) == doctest::Approx(std::tanh(0.3)));  // node 1 reads node 0
}

TEST_CASE("dmlp replication copies the nearest node's weights") {
  RngStream rng(57, 6);
  auto dmlp = make_dmlp_controller(3, 2, rng);
  Matrix from(3, 2);
  from(0, 0) = 0.0; from(0, 1) = 0.0;
  from(1, 0) = 1.0; from(1, 1) = 0.0;
  from(2, 0) = 0.0; from(2, 1) = 1.0;
  Matrix to(4, 2);
  to(0, 0) = 0.1; to(0, 1) = 0.1;   // nearest: source 0
  to(1, 0) = 0.9; to(1, 1) = 0.05;  // nearest: source 1
  to(2, 0) =  .05; to(2, 1) = 0.95; // nearest: source 2
  to(3, 0) = 0.0; to(3, 1) = 0.0;   // exact tie with source 0's position
  auto rep = dmlp->replicate_to(from, to);
  REQUIRE(rep->n_nodes() == 4);
  std::vector<double> src = dmlp->parameters();
  std::vector<double> dst = rep->parameters();
  // w1 rows: node i owns rows [i*hidden, (i+1)*hidden), 2 entries per row;
  // w2 rows follow after all of w1 in the flat layout.
  auto w1_at = [&](const std::vector<double>& flat, std::size_t node,
                   std::size_t row, std::size_t col) {
    return flat[(node * 2 + row) * 2 + col];
  };
  std::size_t expected_src[4] = {0, 1, 2, 0};
  for (std::size_t node = 0; node < 4; ++node)
    for (std::size_t row = 0; row < 2; ++row)
      for (std::size_t col = 0; col < 2; ++col)
        CHECK(w1_at(dst, node, row, col) ==
              w1_at(src, expected_src[node], row, col));
}

TEST_CASE("clone produces an independent deep copy") {
  DistributedSystem d = small_system(5);
  RngStream rng(58, 7);
  auto interval = default_interval({d.support});
  auto gnn = make_gnn_controller(
      make_gnn({{1, 2, 1}, {2, 1, 0}}, interval, Nonlinearity::Tanh, rng));
  auto copy = gnn->clone();
  std::vector<double> flat = gnn->parameters();
  std::vector<double> zeros(flat.size(), 0.0);
  gnn->set_parameters(zeros);
  CHECK(copy->parameters() == flat);  // unaffected by the original's change
  CHECK(copy->kind() == "gnn");
}

TEST_CASE("set_parameters validates the flat length") {
  RngStream rng(59, 8);
  auto mlp = make_mlp_controller(4, 2, rng);
  std::vector<double> wrong(mlp->parameter_count() + 1, 0.0);
  CHECK_THROWS_AS(mlp->set_parameters(wrong), DimensionError);
}

TEST_CASE("non-trainable controllers refuse parameter access") {
  auto open = make_open_loop_controller(1);
  CHECK_THROWS_AS(open->parameters(), NotApplicableError);
  DistributedSystem d = small_system(6);
  CostSpec cost = make_cost_spec(Matrix::identity(1), Matrix::identity(1));
  Matrix x0(d.n_nodes(), 1);
  CHECK_THROWS_AS(open->loss_and_gradient(d, cost, x0, 3),
                  NotApplicableError);
}
