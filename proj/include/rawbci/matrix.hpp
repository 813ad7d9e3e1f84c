#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace rawbci {

// Dense row-major matrix of 64-bit floats. The single numeric carrier for
// signals, weights, activations and gradients. All reductions run
// left-to-right so results are bitwise reproducible run to run.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("Matrix: dimensions must be positive, got " +
                                  shape_string(rows, cols));
    }
  }

  // Row-literal constructor, mostly for tests and small fixtures.
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    if (rows_ == 0) throw std::invalid_argument("Matrix: empty row list");
    cols_ = rows.begin()->size();
    if (cols_ == 0) throw std::invalid_argument("Matrix: empty column list");
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) {
        throw std::invalid_argument("Matrix: ragged row literal");
      }
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix zeros(std::size_t rows, std::size_t cols) {
    return Matrix(rows, cols, 0.0);
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  std::string shape() const { return shape_string(rows_, cols_); }

  static std::string shape_string(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void check_same_shape(const Matrix& a, const Matrix& b,
                             const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                a.shape() + " vs " + b.shape());
  }
}

/// a x b matrix product. Accumulation over the inner dimension runs in
/// ascending index order for every output entry.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: dimension mismatch " + a.shape() +
                                " * " + b.shape());
  }
  Matrix out(a.rows(), b.cols(), 0.0);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* out_row = &out.data()[i * m];
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      const double* b_row = &b.data()[p * m];
      for (std::size_t j = 0; j < m; ++j) {
        out_row[j] += aip * b_row[j];
      }
    }
  }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out(j, i) = a(i, j);
    }
  }
  return out;
}

/// Adds the 1 x cols `row` to every row of `a`.
inline Matrix add_row_broadcast(const Matrix& a, const Matrix& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw std::invalid_argument("add_row_broadcast: row must be 1x" +
                                std::to_string(a.cols()) + ", got " +
                                row.shape());
  }
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out(i, j) += row(0, j);
    }
  }
  return out;
}

/// Per-column mean, 1 x cols.
inline Matrix col_mean(const Matrix& a) {
  Matrix out(1, a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out(0, j) += a(i, j);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j) out(0, j) *= inv_n;
  return out;
}

/// Per-column population (divide-by-N) variance, 1 x cols. The two-pass
/// formula keeps every entry >= 0.
inline Matrix col_var(const Matrix& a) {
  const Matrix mean = col_mean(a);
  Matrix out(1, a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double d = a(i, j) - mean(0, j);
      out(0, j) += d * d;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j) out(0, j) *= inv_n;
  return out;
}

/// Per-column sum, 1 x cols.
inline Matrix col_sum(const Matrix& a) {
  Matrix out(1, a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out(0, j) += a(i, j);
    }
  }
  return out;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "add");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

inline Matrix sub(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "sub");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "hadamard");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
  return out;
}

inline Matrix scale(const Matrix& a, double s) {
  Matrix out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

inline bool all_finite(const Matrix& a) {
  for (double v : a.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace rawbci
