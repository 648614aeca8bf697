#include "gnnctrl/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gnnctrl/errors.hpp"

namespace gnnctrl {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw DimensionError(msg);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw DimensionError("matrix data length does not match rows*cols");
  if (!is_finite())
    throw InvalidArgumentError("matrix entries must be finite");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_)
      throw DimensionError("ragged initializer for matrix");
    data_.insert(data_.end(), row.begin(), row.end());
  }
  if (!is_finite())
    throw InvalidArgumentError("matrix entries must be finite");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transpose() const {
  Matrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

Matrix Matrix::operator+(const Matrix& other) const {
  require(same_shape(other), "shape mismatch in matrix addition");
  Matrix out = *this;
  out += other;
  return out;
}

Matrix Matrix::operator-(const Matrix& other) const {
  require(same_shape(other), "shape mismatch in matrix subtraction");
  Matrix out = *this;
  out -= other;
  return out;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require(same_shape(other), "shape mismatch in matrix addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require(same_shape(other), "shape mismatch in matrix subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix Matrix::operator*(const Matrix& other) const {
  require(cols_ == other.rows_, "shape mismatch in matrix product");
  Matrix out(rows_, other.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) {
      double aik = (*this)(i, k);
      if (aik == 0.0) continue;
      const double* brow = &other.data_[k * other.cols_];
      double* orow = &out.data_[i * other.cols_];
      for (std::size_t j = 0; j < other.cols_; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix Matrix::operator*(double scalar) const {
  Matrix out = *this;
  out *= scalar;
  return out;
}

Matrix& Matrix::operator*=(double scalar) {
  for (double& v : data_) v *= scalar;
  return *this;
}

Matrix operator*(double scalar, const Matrix& m) { return m * scalar; }

bool Matrix::is_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

double Matrix::frobenius_norm() const {
  double sum = 0.0;
  for (double v : data_) sum += v * v;
  return std::sqrt(sum);
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double inf_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0)
    throw DimensionError("inf_norm of empty matrix");
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) row += std::abs(m(i, j));
    best = std::max(best, row);
  }
  return best;
}

double l21_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0)
    throw DimensionError("l21_norm of empty matrix");
  double total = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double sq = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) sq += m(i, j) * m(i, j);
    total += std::sqrt(sq);
  }
  return total;
}

namespace {

double off_diagonal_norm(const Matrix& m) {
  double sum = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j) sum += m(i, j) * m(i, j);
  return std::sqrt(sum);
}

}  // namespace

Spectrum sym_eig(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionError("sym_eig requires a nonempty square matrix");
  const std::size_t n = m.rows();
  double scale = m.frobenius_norm();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-10 * std::max(1.0, scale))
        throw InvalidArgumentError("sym_eig requires a symmetric matrix");

  Matrix a = m;
  Matrix v = Matrix::identity(n);
  const double tol = 1e-12 * std::max(scale, 1e-300);
  const int max_sweeps = 100;
  int sweep = 0;
  while (off_diagonal_norm(a) > tol) {
    if (++sweep > max_sweeps)
      throw ConvergenceError("jacobi eigensolver did not converge");
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) <= tol / (n * n)) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = std::copysign(1.0, theta) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return diag[x] < diag[y]; });

  Spectrum out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t src = order[j];
    out.values[j] = diag[src];
    // Sign convention: largest-magnitude entry of each eigenvector positive.
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(v(i, src)) > best) {
        best = std::abs(v(i, src));
        arg = i;
      }
    }
    double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = sign * v(i, src);
  }
  return out;
}

Matrix sym_sqrt(const Matrix& m) {
  Spectrum s = sym_eig(m);
  double scale = std::max(1.0, std::abs(s.values.back()));
  Matrix d(m.rows(), m.rows());
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (s.values[i] < -1e-10 * scale)
      throw InvalidArgumentError("sym_sqrt requires a PSD matrix");
    d(i, i) = std::sqrt(std::max(0.0, s.values[i]));
  }
  return s.vectors * d * s.vectors.transpose();
}

double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0)
    throw DimensionError("spectral_norm of empty matrix");
  if (!m.is_finite())
    throw InvalidArgumentError("spectral_norm requires finite entries");
  // Work with the smaller Gram matrix of the two options.
  Matrix gram = m.rows() >= m.cols() ? m.transpose() * m : m * m.transpose();
  // Symmetrize away rounding asymmetry before the Jacobi sweep.
  Matrix sym = (gram + gram.transpose()) * 0.5;
  Spectrum s = sym_eig(sym);
  double top = std::max(s.values.back(), 0.0);
  return std::sqrt(top);
}

double spectral_norm_power(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0)
    throw DimensionError("spectral_norm of empty matrix");
  if (!m.is_finite())
    throw InvalidArgumentError("spectral_norm requires finite entries");
  Matrix gram = m.rows() >= m.cols() ? m.transpose() * m : m * m.transpose();
  gram = (gram + gram.transpose()) * 0.5;
  const std::size_t n = gram.rows();

  // Deterministic start vector with all coordinates active.
  Matrix v(n, 1);
  for (std::size_t i = 0; i < n; ++i)
    v(i, 0) = 1.0 + 0.5 * static_cast<double>(i % 7) / 7.0;
  double vnorm = v.frobenius_norm();
  v *= 1.0 / vnorm;

  double lambda = 0.0;
  for (int iter = 0; iter < 10000; ++iter) {
    Matrix w = gram * v;
    double wnorm = w.frobenius_norm();
    if (wnorm == 0.0) return 0.0;  // start vector is in the null space bundle
    double next = 0.0;
    for (std::size_t i = 0; i < n; ++i) next += v(i, 0) * w(i, 0);
    w *= 1.0 / wnorm;
    if (iter > 0 && std::abs(next - lambda) <= 1e-12 * std::max(1.0, std::abs(next))) {
      return std::sqrt(std::max(next, 0.0));
    }
    lambda = next;
    v = w;
  }
  // Stalled (e.g. nearly tied top eigenvalues): defer to the robust path.
  return spectral_norm(m);
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols())
    throw DimensionError("solve_linear requires a square system");
  if (a.rows() != b.rows())
    throw DimensionError("solve_linear shape mismatch");
  const std::size_t n = a.rows();
  const std::size_t k = b.cols();
  Matrix lu = a;
  Matrix x = b;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(lu(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(lu(r, col)) > best) {
        best = std::abs(lu(r, col));
        pivot = r;
      }
    }
    if (best <= 1e-12)
      throw SingularMatrixError("pivot below singularity threshold");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(col, j), lu(pivot, j));
      for (std::size_t j = 0; j < k; ++j) std::swap(x(col, j), x(pivot, j));
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      double factor = lu(r, col) / lu(col, col);
      if (factor == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) lu(r, j) -= factor * lu(col, j);
      for (std::size_t j = 0; j < k; ++j) x(r, j) -= factor * x(col, j);
    }
  }
  for (std::size_t ri = n; ri-- > 0;) {
    for (std::size_t j = 0; j < k; ++j) {
      double sum = x(ri, j);
      for (std::size_t c = ri + 1; c < n; ++c) sum -= lu(ri, c) * x(c, j);
      x(ri, j) = sum / lu(ri, ri);
    }
  }
  return x;
}

}  // namespace gnnctrl
