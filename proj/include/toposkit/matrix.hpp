#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "toposkit/rng.hpp"

namespace toposkit {

// Dense real matrix, row-major, 64-bit floats. Every constructor rejects
// non-finite entries so downstream checks can assume finiteness.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}

  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw std::invalid_argument("Matrix: " + std::to_string(data_.size()) +
                                  " entries for shape " + shape_str());
    }
    check_finite();
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::size_t r = rows.size();
    std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw std::invalid_argument("Matrix::from_rows: ragged rows");
      std::size_t j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    m.check_finite();
    return m;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix random(std::size_t rows, std::size_t cols, SplitRng& rng,
                       double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (auto& v : m.data_) v = rng.uniform(lo, hi);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix& operator+=(const Matrix& other) {
    require_same_shape(other, "operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
  }

  Matrix& operator-=(const Matrix& other) {
    require_same_shape(other, "operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

  friend Matrix operator*(double s, Matrix m) {
    for (auto& v : m.data_) v *= s;
    return m;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  void check_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) throw std::invalid_argument("Matrix: non-finite entry");
  }

 private:
  void require_same_shape(const Matrix& other, const char* op) const {
    if (!same_shape(other))
      throw std::invalid_argument(std::string(op) + ": shape mismatch (" + shape_str() +
                                  " vs " + other.shape_str() + ")");
  }

  std::size_t rows_, cols_;
  std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: dimension mismatch (" + a.shape_str() + " vs " +
                                b.shape_str() + ")");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

// Column-wise softmax with max subtraction, so arbitrarily large scores stay
// finite. Each output column is strictly positive and sums to 1.
inline Matrix softmax_columns(const Matrix& s) {
  s.check_finite();
  Matrix out(s.rows(), s.cols());
  for (std::size_t j = 0; j < s.cols(); ++j) {
    double mx = -HUGE_VAL;
    for (std::size_t i = 0; i < s.rows(); ++i) mx = std::max(mx, s(i, j));
    double sum = 0.0;
    for (std::size_t i = 0; i < s.rows(); ++i) {
      out(i, j) = std::exp(s(i, j) - mx);
      sum += out(i, j);
    }
    for (std::size_t i = 0; i < s.rows(); ++i) out(i, j) /= sum;
  }
  return out;
}

inline Matrix relu(const Matrix& m) {
  Matrix out = m;
  for (auto& v : out.data()) v = std::max(0.0, v);
  return out;
}

// Bijection on {0..n-1}. Convention for column permutation: applying p to X
// yields output column j = input column p(j), matching X*P for the 0/1 matrix
// with P(k, j) = [k == p(j)].
class Permutation {
 public:
  explicit Permutation(std::vector<std::size_t> mapping) : map_(std::move(mapping)) {
    std::vector<bool> seen(map_.size(), false);
    for (std::size_t v : map_) {
      if (v >= map_.size() || seen[v])
        throw std::invalid_argument("Permutation: mapping is not a bijection");
      seen[v] = true;
    }
  }

  static Permutation identity(std::size_t n) {
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), std::size_t{0});
    return Permutation(std::move(m));
  }

  static Permutation random(std::size_t n, SplitRng& rng) {
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i)
      std::swap(m[i - 1], m[rng.uniform_int(0, i - 1)]);
    return Permutation(std::move(m));
  }

  std::size_t size() const { return map_.size(); }
  std::size_t operator()(std::size_t j) const { return map_[j]; }

  Permutation inverse() const {
    std::vector<std::size_t> inv(map_.size());
    for (std::size_t j = 0; j < map_.size(); ++j) inv[map_[j]] = j;
    return Permutation(std::move(inv));
  }

  Matrix to_matrix() const {
    Matrix p(map_.size(), map_.size());
    for (std::size_t j = 0; j < map_.size(); ++j) p(map_[j], j) = 1.0;
    return p;
  }

 private:
  std::vector<std::size_t> map_;
};

inline Matrix apply_permutation(const Matrix& x, const Permutation& p) {
  if (x.cols() != p.size()) {
    throw std::invalid_argument("apply_permutation: " + x.shape_str() + " vs permutation of size " +
                                std::to_string(p.size()));
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j)
    for (std::size_t i = 0; i < x.rows(); ++i) out(i, j) = x(i, p(j));
  return out;
}

inline double max_abs(const Matrix& m) {
  double mx = 0.0;
  for (double v : m.data()) mx = std::max(mx, std::fabs(v));
  return mx;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("max_abs_diff: shape mismatch (" + a.shape_str() + " vs " +
                                b.shape_str() + ")");
  double mx = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    mx = std::max(mx, std::fabs(a.data()[k] - b.data()[k]));
  return mx;
}

// Central-difference gradient, the oracle all analytic Jacobians are checked
// against. Throws if f evaluates to a non-finite value, naming the coordinate.
inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& at, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_difference_gradient: step must be > 0");
  std::vector<double> grad(at.size(), 0.0);
  std::vector<double> x = at;
  for (std::size_t i = 0; i < at.size(); ++i) {
    x[i] = at[i] + step;
    double fp = f(x);
    x[i] = at[i] - step;
    double fm = f(x);
    x[i] = at[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::invalid_argument("finite_difference_gradient: non-finite evaluation at coordinate " +
                                  std::to_string(i));
    }
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

// Text form: `rows cols` header line, then one whitespace-separated row per
// line, 17 significant digits (enough to round-trip any double).
inline std::string matrix_to_text(const Matrix& m) {
  std::ostringstream os;
  os.precision(17);
  os << m.rows() << " " << m.cols() << "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) os << " ";
      os << m(i, j);
    }
    os << "\n";
  }
  return os.str();
}

inline Matrix matrix_from_stream(std::istream& is) {
  std::size_t rows = 0, cols = 0;
  if (!(is >> rows >> cols)) throw std::invalid_argument("matrix text: missing header");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (!(is >> m(i, j))) throw std::invalid_argument("matrix text: truncated entries");
  m.check_finite();
  return m;
}

inline Matrix matrix_from_text(const std::string& text) {
  std::istringstream is(text);
  return matrix_from_stream(is);
}

}  // namespace toposkit
