#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace gnnctrl {

// Dense row-major matrix of doubles. Graph signals are stored as matrices
// with one row per node and one column per feature.
class Matrix {
 public:
  Matrix() = default;
  // Zero-initialized rows x cols.
  Matrix(std::size_t rows, std::size_t cols);
  // Takes ownership of row-major data; every entry must be finite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transpose() const;
  Matrix operator+(const Matrix& other) const;
  Matrix operator-(const Matrix& other) const;
  Matrix operator*(const Matrix& other) const;
  Matrix operator*(double scalar) const;
  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double scalar);

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool is_finite() const noexcept;
  double frobenius_norm() const;
  double max_abs() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(double scalar, const Matrix& m);

// Eigendecomposition of a symmetric matrix: values ascending, vectors stored
// as the columns of an orthonormal matrix, M = V diag(values) V^T.
struct Spectrum {
  std::vector<double> values;
  Matrix vectors;
};

// Largest singular value. Authoritative path: symmetric eigendecomposition
// of M^T M. Requires a nonempty finite matrix.
double spectral_norm(const Matrix& m);

// Fast path: power iteration on M^T M with relative tolerance 1e-12 and at
// most 10000 iterations; falls back to the eigendecomposition path if the
// iteration stalls.
double spectral_norm_power(const Matrix& m);

// Maximum absolute row sum.
double inf_norm(const Matrix& m);

// Sum over columns of the euclidean column norms (the graph-signal size).
double l21_norm(const Matrix& m);

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Off-diagonal
// Frobenius mass is driven below 1e-12 relative to the input's norm.
// Symmetry is validated to 1e-10 relative tolerance.
Spectrum sym_eig(const Matrix& m);

// Symmetric square root via sym_eig; eigenvalues must be >= -1e-10, and tiny
// negative values are clamped to zero.
Matrix sym_sqrt(const Matrix& m);

// Solves a x = b for square a by Gaussian elimination with partial pivoting.
// b may hold multiple right-hand sides as columns. Pivots with magnitude
// <= 1e-12 raise SingularMatrixError.
Matrix solve_linear(const Matrix& a, const Matrix& b);

}  // namespace gnnctrl
