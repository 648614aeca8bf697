#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gnnctrl/errors.hpp"
#include "gnnctrl/filters.hpp"
#include "gnnctrl/gnn.hpp"
#include "gnnctrl/graph.hpp"
#include "gnnctrl/matrix.hpp"
#include "gnnctrl/rng.hpp"
#include "gnnctrl/stability.hpp"
#include "gnnctrl/system.hpp"

using namespace gnnctrl;

namespace {

DistributedSystem stable_system(std::uint64_t key, double a_norm) {
  RngStream root(919, key);
  for (std::uint64_t attempt = 0;; ++attempt) {
    RngStream r = root.substream(attempt);
    Graph g = generate_geometric_graph(9, 2, r);
    if (!is_connected(g)) continue;
    RngStream sys = root.substream(7000 + attempt);
    return generate_system(g, a_norm, 1.0, sys);
  }
}

GnnParams contractive_gnn(const DistributedSystem& d, double xi_target,
                          RngStream& rng) {
  auto interval = default_interval({d.support});
  GnnParams p = make_gnn({{1, 2, 2}, {2, 1, 0}}, interval,
                         Nonlinearity::Tanh, rng);
  double a_part = spectral_norm(d.sys_graph) * inf_norm(d.sys_feat);
  double b_part = spectral_norm(d.ctrl_graph) * inf_norm(d.ctrl_feat);
  double c_phi = filter_size(p.layers[0]) * filter_size(p.layers[1]);
  double target = (xi_target - a_part) / b_part;
  double factor = std::sqrt(target / c_phi);
  for (auto& layer : p.layers)
    for (Matrix& tap : layer.taps) tap *= factor;
  return p;
}

}  // namespace

TEST_CASE("stability constant recomposes from the norm parts") {
  DistributedSystem d = stable_system(0, 0.4);
  RngStream rng(81, 0);
  GnnParams p = make_gnn({{1, 3, 2}, {3, 1, 1}},
                         default_interval({d.support}), Nonlinearity::Tanh,
                         rng);
  StabilityReport rep = stability_constant(d, p);
  double c_phi = filter_size(p.layers[0]) * filter_size(p.layers[1]);
  double expected = spectral_norm(d.sys_graph) * inf_norm(d.sys_feat) +
                    c_phi * spectral_norm(d.ctrl_graph) * inf_norm(d.ctrl_feat);
  CHECK(rep.xi == doctest::Approx(expected).epsilon(1e-10));
  CHECK(rep.c_phi == doctest::Approx(c_phi).epsilon(1e-10));
  double gamma = filter_lipschitz(p.layers[0]) / filter_size(p.layers[0]) +
                 filter_lipschitz(p.layers[1]) / filter_size(p.layers[1]);
  CHECK(rep.gamma_phi == doctest::Approx(gamma).epsilon(1e-10));
  CHECK(rep.is_sufficiently_stable == (rep.xi < 1.0));
  if (rep.xi < 1.0) {
    REQUIRE(rep.beta0_per_unit_x0.has_value());
    CHECK(*rep.beta0_per_unit_x0 == doctest::Approx(1.0 / (1.0 - rep.xi)));
  } else {
    CHECK(!rep.beta0_per_unit_x0.has_value());
  }
}

TEST_CASE("contractive closed loops decay geometrically in practice") {
  DistributedSystem d = stable_system(1, 0.35);
  RngStream rng(82, 1);
  GnnParams p = contractive_gnn(d, 0.7, rng);
  StabilityReport rep = stability_constant(d, p);
  REQUIRE(rep.xi == doctest::Approx(0.7).epsilon(1e-9));
  // ||X(t)|| <= xi^t ||X(0)|| for the undisturbed loop.
  Matrix x(d.n_nodes(), 1);
  for (std::size_t i = 0; i < d.n_nodes(); ++i) x(i, 0) = rng.normal();
  double x0_size = l21_norm(x);
  for (int t = 1; t <= 25; ++t) {
    GraphSignal u = gnn_forward(p, d.support, x);
    x = d.sys_graph * x * d.sys_feat + d.ctrl_graph * u * d.ctrl_feat;
    CHECK(l21_norm(x) <= std::pow(0.7, t) * x0_size + 1e-12);
  }
}

TEST_CASE("stability change bound is exact algebra on both sides") {
  DistributedSystem d = stable_system(2, 0.5);
  RngStream rng(83, 2);
  RngStream prng(83, 3);
  DistributedSystem d_hat = perturb_system(d, 0.05, prng);
  GnnParams p = make_gnn({{1, 2, 1}, {2, 1, 0}},
                         default_interval({d.support, d_hat.support}),
                         Nonlinearity::Tanh, rng);
  StabilityChangeReport rep = stability_change_bound(d, d_hat, p);
  // Recompose the pieces: shared C_phi on the union interval.
  double c_phi = filter_size(p.layers[0]) * filter_size(p.layers[1]);
  double xi = spectral_norm(d.sys_graph) * inf_norm(d.sys_feat) +
              c_phi * spectral_norm(d.ctrl_graph) * inf_norm(d.ctrl_feat);
  double xi_hat =
      spectral_norm(d_hat.sys_graph) * inf_norm(d_hat.sys_feat) +
      c_phi * spectral_norm(d_hat.ctrl_graph) * inf_norm(d_hat.ctrl_feat);
  CHECK(rep.xi == doctest::Approx(xi).epsilon(1e-10));
  CHECK(rep.xi_hat == doctest::Approx(xi_hat).epsilon(1e-10));
  CHECK(rep.lhs == doctest::Approx(std::abs(xi - xi_hat)).epsilon(1e-10));
  double c = spectral_norm(d.sys_graph) + inf_norm(d_hat.sys_feat) +
             c_phi * (spectral_norm(d.ctrl_graph) + inf_norm(d_hat.ctrl_feat));
  CHECK(rep.c_xi_hat == doctest::Approx(c).epsilon(1e-10));
  CHECK(rep.distance ==
        doctest::Approx(system_distance(d, d_hat)).epsilon(1e-10));
  CHECK(rep.rhs == doctest::Approx(c * rep.distance).epsilon(1e-10));
  CHECK(rep.holds);
}

TEST_CASE("deviation bound envelopes the empirical gap") {
  DistributedSystem d = stable_system(3, 0.3);
  RngStream rng(84, 4);
  GnnParams p = contractive_gnn(d, 0.75, rng);
  RngStream prng(84, 5);
  DistributedSystem d_hat = perturb_system(d, 1e-3, prng);
  Matrix x0(d.n_nodes(), 1);
  for (std::size_t i = 0; i < d.n_nodes(); ++i) x0(i, 0) = rng.normal();
  DeviationReport rep = deviation_bound(d, d_hat, p, x0, 40);
  REQUIRE(rep.empirical.size() == 41);
  REQUIRE(rep.bound.size() == 41);
  CHECK(rep.empirical[0] == 0.0);
  CHECK(rep.bound[0] == 0.0);
  for (std::size_t t = 1; t < rep.bound.size(); ++t)
    CHECK(rep.empirical[t] <= rep.bound[t] * (1.0 + 1e-9) + 1e-15);
  CHECK(rep.max_ratio <= 1.0 + 1e-9);
  CHECK(!rep.truncated);
  // Bound profile is c_phi_hat * t * m^(t-1) * dist * ||X(0)||.
  double m = std::max(rep.xi, rep.xi_hat);
  double x0_size = l21_norm(x0);
  for (std::size_t t = 1; t < rep.bound.size(); ++t) {
    double expected =
        rep.c_phi_hat * deviation_time_factor(m, t) * rep.distance * x0_size;
    CHECK(rep.bound[t] == doctest::Approx(expected).epsilon(1e-10));
  }
  REQUIRE(rep.uniform_constant.has_value());
  double cap = *rep.uniform_constant;
  for (std::size_t t = 0; t < rep.bound.size(); ++t)
    CHECK(rep.bound[t] <= cap * rep.distance * x0_size * (1.0 + 1e-9));
}

TEST_CASE("deviation time factor and its envelope match the calculus") {
  CHECK(deviation_time_factor(0.5, 0) == 0.0);
  CHECK(deviation_time_factor(0.5, 1) == doctest::Approx(1.0));
  CHECK(deviation_time_factor(0.5, 3) == doctest::Approx(3.0 * 0.25));
  for (double m : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
    // Continuous maximum of t m^(t-1) sits at t* = -1/log m with value
    // -e^(-1)/(m log m); the discrete peak can only be below it.
    double cap = cor1_envelope(m);
    CHECK(cap == doctest::Approx(-std::exp(-1.0) /
                                 (m * std::log(m))).epsilon(1e-12));
    double peak = 0.0;
    for (std::size_t t = 1; t < 3000; ++t)
      peak = std::max(peak, deviation_time_factor(m, t));
    CHECK(peak <= cap * (1.0 + 1e-12));
    // When t* >= 1 (m >= 1/e) the integer peak comes within 25% of the
    // continuous cap; below that the peak is pinned at t = 1.
    if (m >= std::exp(-1.0)) CHECK(peak >= 0.75 * cap);
    else CHECK(peak == 1.0);
  }
  CHECK_THROWS_AS(cor1_envelope(1.0), NotApplicableError);
  CHECK_THROWS_AS(cor1_envelope(0.0), NotApplicableError);
}

TEST_CASE("deviation limit check detects vanishing asymptotic gap") {
  DistributedSystem d = stable_system(4, 0.3);
  RngStream rng(85, 6);
  GnnParams p = contractive_gnn(d, 0.6, rng);
  RngStream prng(85, 7);
  DistributedSystem d_hat = perturb_system(d, 1e-3, prng);
  Matrix x0(d.n_nodes(), 1);
  for (std::size_t i = 0; i < d.n_nodes(); ++i) x0(i, 0) = rng.normal();
  CHECK(cor1_limit_check(d, d_hat, p, x0));
  // Non-contractive pairs are not applicable.
  DistributedSystem wild = stable_system(5, 1.3);
  RngStream rng2(86, 8);
  GnnParams q = make_gnn({{1, 1, 1}}, default_interval({wild.support}),
                         Nonlinearity::Tanh, rng2);
  RngStream prng2(86, 9);
  DistributedSystem wild_hat = perturb_system(wild, 1e-3, prng2);
  CHECK_THROWS_AS(cor1_limit_check(wild, wild_hat, q, x0),
                  NotApplicableError);
}

TEST_CASE("deviation of identical systems is zero") {
  DistributedSystem d = stable_system(6, 0.4);
  RngStream rng(87, 10);
  GnnParams p = contractive_gnn(d, 0.8, rng);
  Matrix x0(d.n_nodes(), 1);
  for (std::size_t i = 0; i < d.n_nodes(); ++i) x0(i, 0) = rng.normal();
  DeviationReport rep = deviation_bound(d, d, p, x0, 20);
  CHECK(rep.distance == 0.0);
  for (double e : rep.empirical) CHECK(e == 0.0);
  StabilityChangeReport ch = stability_change_bound(d, d, p);
  CHECK(ch.lhs == 0.0);
  CHECK(ch.rhs == 0.0);
  CHECK(ch.holds);
}
