#pragma once

// Dense row-major matrices and vectors of doubles, plus the handful of
// products the network and kernel code need. Dimensions always travel with
// the data; nothing broadcasts implicitly.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace finer {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t len, double fill = 0.0) : data_(len, fill) {}
  explicit Vector(std::vector<double> data) : data_(std::move(data)) {}
  Vector(std::initializer_list<double> values) : data_(values) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  const std::vector<double>& values() const noexcept { return data_; }

  /// Resizes and sets every entry to `fill`.
  void assign(std::size_t len, double fill) { data_.assign(len, fill); }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  /// Builds from nested rows; every row must have the same length.
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  Matrix transposed() const;

  /// Changes the shape, keeping the allocation when it is large enough.
  /// Contents are unspecified afterwards.
  void reshape(std::size_t rows, std::size_t cols);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a · b
Matrix matmul(const Matrix& a, const Matrix& b);
/// a · bᵀ
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// aᵀ · b
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// Same products written into `out`, which is reshaped and reuses its storage.
// `out` must not alias an operand.
void matmul_into(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_nt_into(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_tn_into(const Matrix& a, const Matrix& b, Matrix& out);

/// out = a · wᵀ with `bias` added to every row (a dense layer).
void affine_into(const Matrix& a, const Matrix& w, const Vector& bias, Matrix& out);

/// Adds `bias` to every row of `m` in place. `bias.size()` must equal `m.cols()`.
void add_to_rows(Matrix& m, const Vector& bias);
/// Column sums accumulated top to bottom.
Vector column_sums(const Matrix& m);
void column_sums_into(const Matrix& m, Vector& out);

Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

double trace(const Matrix& m);
double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);
double max_abs(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> v) noexcept;

/// Throws NonFiniteError naming `what` if any entry is NaN or infinite.
void require_finite(std::span<const double> v, const char* what);

struct EigenDecomposition {
  Vector values;   ///< descending
  Matrix vectors;  ///< column i pairs with values[i]
  int sweeps = 0;
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The input must be square and symmetric to 1e-9 of its largest entry; it is
/// symmetrized before rotating. Throws ConvergenceError (carrying the final
/// off-diagonal Frobenius norm) if `max_sweeps` sweeps do not suffice.
EigenDecomposition sym_eigen(const Matrix& k, int max_sweeps = 100);

}  // namespace finer
