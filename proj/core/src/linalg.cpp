#include "finer/linalg.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

#include "finer/errors.hpp"

namespace finer {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const Matrix& m) {
  return ConstMap(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

MutMap view(Matrix& m) {
  return MutMap(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

// Products where one operand is only a few columns wide skip Eigen's blocked
// kernel, whose packing overhead dominates there.
constexpr std::size_t kThin = 4;

// out(r, :) = init + Σ_k a(r, k) · bt(k, :), with bt stored k-major. A null
// init means zero.
void thin_inner_product(const Matrix& a, const double* bt, std::size_t cols, const double* init, Matrix& out) {
  const std::size_t inner = a.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double* __restrict o = out.data() + r * cols;
    const double* ar = a.data() + r * inner;
    if (init)
      std::copy(init, init + cols, o);
    else
      std::fill(o, o + cols, 0.0);
    for (std::size_t k = 0; k < inner; ++k) {
      const double s = ar[k];
      const double* __restrict b = bt + k * cols;
      for (std::size_t c = 0; c < cols; ++c) o[c] += s * b[c];
    }
  }
}

// out(r, j) = init(j) + a(r, :) · w(j, :) for a w with few rows. Each dot
// product runs in eight fixed lanes so it vectorises without reassociation.
void thin_outer_nt(const Matrix& a, const Matrix& w, const double* init, Matrix& out) {
  constexpr std::size_t kLanes = 8;
  const std::size_t n = a.cols();
  const std::size_t m = w.rows();
  const std::size_t body = n - n % kLanes;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* ar = a.data() + r * n;
    for (std::size_t j = 0; j < m; ++j) {
      const double* wj = w.data() + j * n;
      double acc[kLanes] = {};
      for (std::size_t c = 0; c < body; c += kLanes)
        for (std::size_t l = 0; l < kLanes; ++l) acc[l] += ar[c + l] * wj[c + l];
      double sum = 0.0;
      for (std::size_t c = body; c < n; ++c) sum += ar[c] * wj[c];
      for (double v : acc) sum += v;
      out.data()[r * m + j] = (init ? init[j] : 0.0) + sum;
    }
  }
}

// out = aᵀ·b when a or b has few columns: one pass over the rows, summing
// rank-1 updates in row order.
void thin_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t p = a.cols();
  const std::size_t q = b.cols();
  if (p <= kThin) {
    std::fill(out.span().begin(), out.span().end(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const double* __restrict br = b.data() + r * q;
      for (std::size_t i = 0; i < p; ++i) {
        const double s = a.data()[r * p + i];
        double* __restrict o = out.data() + i * q;
        for (std::size_t c = 0; c < q; ++c) o[c] += s * br[c];
      }
    }
    return;
  }
  std::vector<double> acc(q * p, 0.0);  // acc(j, i) = out(i, j)
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* __restrict ar = a.data() + r * p;
    for (std::size_t j = 0; j < q; ++j) {
      const double s = b.data()[r * q + j];
      double* __restrict o = acc.data() + j * p;
      for (std::size_t i = 0; i < p; ++i) o[i] += s * ar[i];
    }
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < q; ++j) out(i, j) = acc[j * p + i];
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  FINER_REQUIRE(data_.size() == rows * cols, "Matrix: data length " + std::to_string(data_.size()) +
                                                 " != " + std::to_string(rows) + "x" + std::to_string(cols));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    FINER_REQUIRE(row.size() == c, "Matrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

void Matrix::reshape(std::size_t rows, std::size_t cols) {
  rows_ = rows;
  cols_ = cols;
  data_.resize(rows * cols);
}

// Single-threaded Eigen GEMM: the reduction order is fixed for a given build,
// so products are bit-reproducible run to run.
void matmul_into(const Matrix& a, const Matrix& b, Matrix& out) {
  FINER_REQUIRE(a.cols() == b.rows(), "matmul: dimension mismatch " + shape(a) + " * " + shape(b));
  out.reshape(a.rows(), b.cols());
  if (a.cols() <= kThin) {
    thin_inner_product(a, b.data(), b.cols(), nullptr, out);
    return;
  }
  view(out).noalias() = view(a) * view(b);
}

void matmul_nt_into(const Matrix& a, const Matrix& b, Matrix& out) {
  FINER_REQUIRE(a.cols() == b.cols(), "matmul_nt: dimension mismatch " + shape(a) + " * " + shape(b) + "^T");
  out.reshape(a.rows(), b.rows());
  if (a.cols() <= kThin) {
    const Matrix bt = b.transposed();
    thin_inner_product(a, bt.data(), bt.cols(), nullptr, out);
    return;
  }
  if (b.rows() <= kThin) {
    thin_outer_nt(a, b, nullptr, out);
    return;
  }
  view(out).noalias() = view(a) * view(b).transpose();
}

void affine_into(const Matrix& a, const Matrix& w, const Vector& bias, Matrix& out) {
  FINER_REQUIRE(a.cols() == w.cols(), "affine: dimension mismatch " + shape(a) + " * " + shape(w) + "^T");
  FINER_REQUIRE(bias.size() == w.rows(), "affine: bias length mismatch");
  out.reshape(a.rows(), w.rows());
  if (a.cols() <= kThin) {
    const Matrix wt = w.transposed();
    thin_inner_product(a, wt.data(), wt.cols(), bias.data(), out);
    return;
  }
  if (w.rows() <= kThin) {
    thin_outer_nt(a, w, bias.data(), out);
    return;
  }
  for (std::size_t r = 0; r < out.rows(); ++r) std::copy(bias.begin(), bias.end(), out.data() + r * out.cols());
  view(out).noalias() += view(a) * view(w).transpose();
}

void matmul_tn_into(const Matrix& a, const Matrix& b, Matrix& out) {
  FINER_REQUIRE(a.rows() == b.rows(), "matmul_tn: dimension mismatch " + shape(a) + "^T * " + shape(b));
  out.reshape(a.cols(), b.cols());
  if (a.rows() == 0) {
    std::fill(out.span().begin(), out.span().end(), 0.0);
    return;
  }
  if (a.cols() <= kThin || b.cols() <= kThin) {
    thin_tn(a, b, out);
    return;
  }
  view(out).noalias() = view(a).transpose() * view(b);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out;
  matmul_into(a, b, out);
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  Matrix out;
  matmul_nt_into(a, b, out);
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  Matrix out;
  matmul_tn_into(a, b, out);
  return out;
}

void add_to_rows(Matrix& m, const Vector& bias) {
  FINER_REQUIRE(bias.size() == m.cols(), "add_to_rows: bias length mismatch");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
  }
}

void column_sums_into(const Matrix& m, Vector& out) {
  out.assign(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c];
  }
}

Vector column_sums(const Matrix& m) {
  Vector out;
  column_sums_into(m, out);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  FINER_REQUIRE(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  FINER_REQUIRE(a.rows() == b.rows() && a.cols() == b.cols(), "subtract: shape mismatch");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix scale(const Matrix& a, double s) {
  Matrix out = a;
  for (double& x : out.span()) x *= s;
  return out;
}

double trace(const Matrix& m) {
  FINER_REQUIRE(m.rows() == m.cols(), "trace: matrix not square");
  double t = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double x : m.span()) s += x * x;
  return std::sqrt(s);
}

double max_abs(std::span<const double> v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

double max_abs(const Matrix& m) { return max_abs(m.span()); }

double dot(std::span<const double> a, std::span<const double> b) {
  FINER_REQUIRE(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool all_finite(std::span<const double> v) noexcept {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void require_finite(std::span<const double> v, const char* what) {
  if (!all_finite(v)) throw NonFiniteError(std::string(what) + ": non-finite value");
}

}  // namespace finer
