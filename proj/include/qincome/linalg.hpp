#pragma once

// Minimal dense linear algebra: just enough for design matrices, BFGS
// updates and inverting small observed-information matrices.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qincome::linalg {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline std::vector<double> matvec(const Matrix& m,
                                  const std::vector<double>& v) {
  if (m.cols() != v.size())
    throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Inverse via LU with partial pivoting; nullopt when numerically singular.
inline std::optional<Matrix> invert(const Matrix& a) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw std::invalid_argument("invert: matrix not square");
  Matrix lu = a;
  Matrix inv = Matrix::identity(n);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > best) {
        best = std::abs(lu(i, k));
        piv = i;
      }
    }
    if (!(best > 1e-300)) return std::nullopt;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(lu(piv, j), lu(k, j));
        std::swap(inv(piv, j), inv(k, j));
      }
    }
    const double d = lu(k, k);
    for (std::size_t j = 0; j < n; ++j) {
      lu(k, j) /= d;
      inv(k, j) /= d;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const double f = lu(i, k);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        lu(i, j) -= f * lu(k, j);
        inv(i, j) -= f * inv(k, j);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!std::isfinite(inv(i, j))) return std::nullopt;
  return inv;
}

// Numerical column rank via Gaussian elimination on the Gram matrix.
inline std::size_t column_rank(const Matrix& x, double tol = 1e-10) {
  const std::size_t k = x.cols();
  Matrix g(k, k);
  double scale = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) acc += x(r, i) * x(r, j);
      g(i, j) = acc;
      if (i == j) scale = std::max(scale, std::abs(acc));
    }
  if (scale == 0.0) return 0;

  std::size_t rank = 0;
  std::vector<bool> used(k, false);
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = k;
    double best = tol * scale;
    for (std::size_t i = 0; i < k; ++i) {
      if (!used[i] && std::abs(g(i, col)) > best) {
        best = std::abs(g(i, col));
        piv = i;
      }
    }
    if (piv == k) continue;
    used[piv] = true;
    ++rank;
    for (std::size_t i = 0; i < k; ++i) {
      if (i == piv || g(i, col) == 0.0) continue;
      const double f = g(i, col) / g(piv, col);
      for (std::size_t j = 0; j < k; ++j) g(i, j) -= f * g(piv, j);
    }
  }
  return rank;
}

}  // namespace qincome::linalg
