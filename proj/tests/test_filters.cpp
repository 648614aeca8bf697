#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gnnctrl/errors.hpp"
#include "gnnctrl/filters.hpp"
#include "gnnctrl/graph.hpp"
#include "gnnctrl/matrix.hpp"
#include "gnnctrl/rng.hpp"

using namespace gnnctrl;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

Matrix random_symmetric(std::size_t n, RngStream& rng) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double v = rng.normal() * 0.4;
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

FilterBank random_bank(std::size_t in, std::size_t out, std::size_t order,
                       double lo, double hi, RngStream& rng) {
  FilterBank fb;
  fb.lambda_lo = lo;
  fb.lambda_hi = hi;
  for (std::size_t k = 0; k <= order; ++k)
    fb.taps.push_back(random_matrix(in, out, rng));
  return fb;
}

// Filter application through explicitly formed powers of the support.
GraphSignal dense_power_oracle(const FilterBank& fb, const Matrix& s,
                               const GraphSignal& x) {
  Matrix power = Matrix::identity(s.rows());
  Matrix acc(x.rows(), fb.out_dim());
  for (std::size_t k = 0; k < fb.taps.size(); ++k) {
    if (k > 0) power = power * s;
    acc += power * x * fb.taps[k];
  }
  return acc;
}

// Grid maximum of |h_fg| (use_derivative = false) or |h'_fg| over the
// interval; 20001 points bound the bisection-based implementation.
double grid_extremum(const FilterBank& fb, std::size_t f, std::size_t g,
                     bool use_derivative) {
  const int kPoints = 20001;
  double best = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    double lam = fb.lambda_lo +
                 (fb.lambda_hi - fb.lambda_lo) * i / double(kPoints - 1);
    double v;
    if (use_derivative) {
      v = 0.0;
      for (std::size_t k = 1; k < fb.taps.size(); ++k)
        v += double(k) * fb.taps[k](f, g) * std::pow(lam, double(k - 1));
    } else {
      v = freq_response(fb, f, g, lam);
    }
    best = std::max(best, std::abs(v));
  }
  return best;
}

double grid_norm(const FilterBank& fb, bool use_derivative) {
  double best = 0.0;
  for (std::size_t f = 0; f < fb.in_dim(); ++f) {
    double row = 0.0;
    for (std::size_t g = 0; g < fb.out_dim(); ++g)
      row += grid_extremum(fb, f, g, use_derivative);
    best = std::max(best, row);
  }
  return best;
}

}  // namespace

TEST_CASE("apply_filter matches the dense power oracle") {
  RngStream rng(21, 0);
  for (int trial = 0; trial < 15; ++trial) {
    std::size_t n = 3 + rng.uniform_index(8);
    std::size_t in = 1 + rng.uniform_index(3);
    std::size_t out = 1 + rng.uniform_index(3);
    std::size_t order = rng.uniform_index(5);
    Matrix s = random_symmetric(n, rng);
    FilterBank fb = random_bank(in, out, order, -2.0, 2.0, rng);
    GraphSignal x = random_matrix(n, in, rng);
    GraphSignal got = apply_filter(fb, s, x);
    GraphSignal expected = dense_power_oracle(fb, s, x);
    CHECK((got - expected).max_abs() < 1e-10 * (1.0 + expected.max_abs()));
  }
}

TEST_CASE("freq_response is the tap polynomial") {
  FilterBank fb;
  fb.taps = {Matrix{{2.0}}, Matrix{{-1.0}}, Matrix{{0.5}}};
  fb.lambda_lo = -1.0;
  fb.lambda_hi = 1.0;
  for (double lam : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
    double expected = 2.0 - lam + 0.5 * lam * lam;
    CHECK(freq_response(fb, 0, 0, lam) == doctest::Approx(expected));
  }
}

TEST_CASE("filter_size matches a fine-grid oracle") {
  RngStream rng(22, 1);
  for (int trial = 0; trial < 12; ++trial) {
    std::size_t in = 1 + rng.uniform_index(3);
    std::size_t out = 1 + rng.uniform_index(3);
    std::size_t order = rng.uniform_index(5);
    double lo = rng.uniform(-1.5, -0.1);
    double hi = rng.uniform(0.1, 1.5);
    FilterBank fb = random_bank(in, out, order, lo, hi, rng);
    double grid = grid_norm(fb, false);
    CHECK(filter_size(fb) == doctest::Approx(grid).epsilon(1e-6));
    CHECK(filter_size(fb) >= grid - 1e-9);  // never below any sampled point
  }
}

TEST_CASE("filter_lipschitz matches a fine-grid oracle") {
  RngStream rng(23, 2);
  for (int trial = 0; trial < 12; ++trial) {
    std::size_t in = 1 + rng.uniform_index(3);
    std::size_t out = 1 + rng.uniform_index(3);
    std::size_t order = 1 + rng.uniform_index(4);
    FilterBank fb = random_bank(in, out, order, -1.2, 1.0, rng);
    double grid = grid_norm(fb, true);
    CHECK(filter_lipschitz(fb) == doctest::Approx(grid).epsilon(1e-6));
    CHECK(filter_lipschitz(fb) >= grid - 1e-9);
  }
}

TEST_CASE("constant filters have zero Lipschitz constant") {
  FilterBank fb;
  fb.taps = {Matrix{{3.0, -1.0}}};
  CHECK(filter_lipschitz(fb) == doctest::Approx(0.0));
  CHECK(filter_size(fb) == doctest::Approx(4.0));  // |3| + |-1| on row 0
}

TEST_CASE("known quadratic attains its size at the interior extremum") {
  // h(lambda) = 1 - lambda^2 on [-1, 1]: max |h| = 1 at lambda = 0.
  FilterBank fb;
  fb.taps = {Matrix{{1.0}}, Matrix{{0.0}}, Matrix{{-1.0}}};
  fb.lambda_lo = -1.0;
  fb.lambda_hi = 1.0;
  CHECK(filter_size(fb) == doctest::Approx(1.0));
  FilterExtrema ext = filter_size_detail(fb);
  CHECK(ext.args(0, 0) == doctest::Approx(0.0).epsilon(1e-9));
  // Derivative -2 lambda peaks at the endpoints with |h'| = 2.
  CHECK(filter_lipschitz(fb) == doctest::Approx(2.0));
}

TEST_CASE("filter output is linear in the signal") {
  RngStream rng(24, 3);
  Matrix s = random_symmetric(6, rng);
  FilterBank fb = random_bank(2, 3, 3, -2.0, 2.0, rng);
  GraphSignal x = random_matrix(6, 2, rng);
  GraphSignal z = random_matrix(6, 2, rng);
  GraphSignal lhs = apply_filter(fb, s, x * 1.7 + z * (-0.4));
  GraphSignal rhs = apply_filter(fb, s, x) * 1.7 + apply_filter(fb, s, z) * (-0.4);
  CHECK((lhs - rhs).max_abs() < 1e-10 * (1.0 + rhs.max_abs()));
}

TEST_CASE("default_interval covers every support spectrum exactly") {
  RngStream rng(25, 4);
  std::vector<Matrix> supports;
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < 3; ++i) {
    Matrix s = random_symmetric(5 + i, rng);
    Spectrum sp = sym_eig(s);
    lo = std::min(lo, sp.values.front());
    hi = std::max(hi, sp.values.back());
    supports.push_back(std::move(s));
  }
  auto [got_lo, got_hi] = default_interval(supports);
  CHECK(got_lo == doctest::Approx(lo).epsilon(1e-9));
  CHECK(got_hi == doctest::Approx(hi).epsilon(1e-9));
  CHECK_THROWS_AS(default_interval({}), InvalidArgumentError);
}

TEST_CASE("validate_filter_bank rejects malformed banks") {
  FilterBank fb;
  CHECK_THROWS_AS(validate_filter_bank(fb), InvalidArgumentError);  // no taps
  fb.taps = {Matrix{{1.0}}, Matrix(2, 2)};
  CHECK_THROWS_AS(validate_filter_bank(fb), DimensionError);  // mixed shapes
  fb.taps = {Matrix{{1.0}}};
  fb.lambda_lo = 1.0;
  fb.lambda_hi = -1.0;
  CHECK_THROWS_AS(validate_filter_bank(fb), InvalidArgumentError);
}
