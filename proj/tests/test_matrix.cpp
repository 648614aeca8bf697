#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gnnctrl/errors.hpp"
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
      double v = rng.normal();
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

// Independent largest-singular-value oracle: one-sided Jacobi on the
// columns of A. Rotations orthogonalize column pairs until every inner
// product is negligible; singular values are the column norms.
double jacobi_svd_largest(Matrix a) {
  std::size_t n = a.cols();
  for (std::size_t sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) {
          app += a(i, p) * a(i, p);
          aqq += a(i, q) * a(i, q);
          apq += a(i, p) * a(i, q);
        }
        off = std::max(off, std::abs(apq) / std::sqrt(app * aqq + 1e-300));
        if (std::abs(apq) < 1e-15 * std::sqrt(app * aqq) + 1e-300) continue;
        double tau = (aqq - app) / (2.0 * apq);
        double t = (tau >= 0 ? 1.0 : -1.0) /
                   (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        for (std::size_t i = 0; i < a.rows(); ++i) {
          double vp = a(i, p), vq = a(i, q);
          a(i, p) = c * vp - s * vq;
          a(i, q) = s * vp + c * vq;
        }
      }
    if (off < 1e-14) break;
  }
  double best = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double norm2 = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) norm2 += a(i, j) * a(i, j);
    best = std::max(best, std::sqrt(norm2));
  }
  return best;
}

}  // namespace

TEST_CASE("matrix arithmetic matches hand results") {
  Matrix a{{1.0, 2.0}, {3.0, 4.0}};
  Matrix b{{5.0, 6.0}, {7.0, 8.0}};
  Matrix prod = a * b;
  CHECK(prod(0, 0) == doctest::Approx(19.0));
  CHECK(prod(0, 1) == doctest::Approx(22.0));
  CHECK(prod(1, 0) == doctest::Approx(43.0));
  CHECK(prod(1, 1) == doctest::Approx(50.0));
  Matrix sum = a + b;
  CHECK(sum(1, 1) == doctest::Approx(12.0));
  Matrix scaled = a * 2.0;
  CHECK(scaled(1, 0) == doctest::Approx(6.0));
  Matrix t = a.transpose();
  CHECK(t(0, 1) == doctest::Approx(3.0));
  CHECK(Matrix::identity(3)(2, 2) == doctest::Approx(1.0));
  CHECK(Matrix::identity(3)(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("matrix rejects non-finite data and shape mismatches") {
  CHECK_THROWS_AS(Matrix(1, 1, {std::nan("")}), InvalidArgumentError);
  Matrix a(2, 3);
  Matrix b(3, 3);
  CHECK_THROWS_AS(a + b, DimensionError);
  CHECK_THROWS_AS(b * a, DimensionError);
}

TEST_CASE("spectral norm agrees with a one-sided Jacobi SVD oracle") {
  RngStream rng(2024, 1);
  for (int i = 0; i < 30; ++i) {
    std::size_t rows = 2 + rng.uniform_index(8);
    std::size_t cols = 2 + rng.uniform_index(8);
    Matrix m = random_matrix(rows, cols, rng);
    double expected = jacobi_svd_largest(m);
    CHECK(spectral_norm(m) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(spectral_norm_power(m) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("spectral norm handles known cases") {
  Matrix diag{{3.0, 0.0}, {0.0, -4.0}};
  CHECK(spectral_norm(diag) == doctest::Approx(4.0));
  // Rank one: norm is the product of the factor norms.
  Matrix outer(3, 3);
  double u[3] = {1.0, 2.0, 2.0}, v[3] = {2.0, 1.0, 2.0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) outer(i, j) = u[i] * v[j];
  CHECK(spectral_norm(outer) == doctest::Approx(9.0));
}

TEST_CASE("sym_eig reconstructs the input with orthonormal vectors") {
  RngStream rng(7, 2);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 2 + rng.uniform_index(9);
    Matrix m = random_symmetric(n, rng);
    Spectrum s = sym_eig(m);
    REQUIRE(s.values.size() == n);
    CHECK(std::is_sorted(s.values.begin(), s.values.end()));
    // V diag(w) V^T == M
    Matrix rec(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          acc += s.vectors(i, k) * s.values[k] * s.vectors(j, k);
        rec(i, j) = acc;
      }
    CHECK((rec - m).max_abs() < 1e-9 * (1.0 + m.max_abs()));
    Matrix gram = s.vectors.transpose() * s.vectors;
    CHECK((gram - Matrix::identity(n)).max_abs() < 1e-10);
  }
}

TEST_CASE("sym_eig rejects asymmetric input") {
  Matrix m{{1.0, 2.0}, {0.5, 1.0}};
  CHECK_THROWS_AS(sym_eig(m), InvalidArgumentError);
}

TEST_CASE("solve_linear residual is tiny and pivoting handles row order") {
  RngStream rng(11, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 2 + rng.uniform_index(7);
    Matrix a = random_matrix(n, n, rng);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 3.0;  // well conditioned
    Matrix b = random_matrix(n, 2, rng);
    Matrix x = solve_linear(a, b);
    CHECK((a * x - b).max_abs() < 1e-9);
  }
  // Zero leading pivot forces a swap.
  Matrix a{{0.0, 1.0}, {1.0, 0.0}};
  Matrix b{{2.0}, {3.0}};
  Matrix x = solve_linear(a, b);
  CHECK(x(0, 0) == doctest::Approx(3.0));
  CHECK(x(1, 0) == doctest::Approx(2.0));
  Matrix sing{{1.0, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(solve_linear(sing, b), SingularMatrixError);
}

TEST_CASE("norms match their definitions") {
  Matrix m{{1.0, -2.0}, {3.0, 4.0}};
  CHECK(inf_norm(m) == doctest::Approx(7.0));          // |3| + |4|
  double l21 = std::sqrt(1.0 + 9.0) + std::sqrt(4.0 + 16.0);
  CHECK(l21_norm(m) == doctest::Approx(l21));
  CHECK(m.frobenius_norm() == doctest::Approx(std::sqrt(30.0)));
  CHECK(m.max_abs() == doctest::Approx(4.0));
}

TEST_CASE("sym_sqrt squares back to the input") {
  RngStream rng(5, 4);
  Matrix base = random_matrix(4, 4, rng);
  Matrix psd = base.transpose() * base;  // PSD by construction
  Matrix root = sym_sqrt(psd);
  CHECK((root * root - psd).max_abs() < 1e-9);
  Matrix neg{{-1.0, 0.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(sym_sqrt(neg), InvalidArgumentError);
}

TEST_CASE("rng streams are deterministic and decorrelated") {
  RngStream a(42, 9);
  RngStream b(42, 9);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c(42, 10);
  int same = 0;
  RngStream a2(42, 9);
  for (int i = 0; i < 64; ++i) same += (a2.next_u64() == c.next_u64());
  CHECK(same == 0);
  // substream(key) is itself deterministic
  RngStream s1 = RngStream(1, 2).substream(77);
  RngStream s2 = RngStream(1, 2).substream(77);
  CHECK(s1.next_u64() == s2.next_u64());
}

TEST_CASE("rng uniform and normal land in sane ranges") {
  RngStream rng(3, 1);
  double mean = 0.0, var = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    double z = rng.normal();
    mean += z;
    var += z * z;
  }
  mean /= n;
  var = var / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}
