#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "finer/errors.hpp"
#include "finer/linalg.hpp"

namespace finer {
namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// Applies the rotation that annihilates a(p,q) to a (both sides) and to the
// accumulated eigenvector matrix v (right side).
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const std::size_t n = a.rows();
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  const double app = a(p, p);
  const double aqq = a(q, q);
  a(p, p) = app - t * apq;
  a(q, q) = aqq + t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;

  for (std::size_t r = 0; r < n; ++r) {
    if (r == p || r == q) continue;
    const double arp = a(r, p);
    const double arq = a(r, q);
    const double np = c * arp - s * arq;
    const double nq = s * arp + c * arq;
    a(r, p) = np;
    a(p, r) = np;
    a(r, q) = nq;
    a(q, r) = nq;
  }
  for (std::size_t r = 0; r < n; ++r) {
    auto row = v.row(r);
    const double vp = row[p];
    const double vq = row[q];
    row[p] = c * vp - s * vq;
    row[q] = s * vp + c * vq;
  }
}

}  // namespace

EigenDecomposition sym_eigen(const Matrix& k, int max_sweeps) {
  FINER_REQUIRE(k.rows() == k.cols(),
                "sym_eigen: matrix is " + std::to_string(k.rows()) + "x" + std::to_string(k.cols()) + ", not square");
  const std::size_t n = k.rows();
  require_finite(k.span(), "sym_eigen input");

  const double scale = max_abs(k);
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) asym = std::max(asym, std::abs(k(i, j) - k(j, i)));
  FINER_REQUIRE(asym <= 1e-9 * scale, "sym_eigen: matrix not symmetric (max |k - k^T| = " + std::to_string(asym) + ")");

  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (k(i, j) + k(j, i));
  Matrix v = Matrix::identity(n);

  const double eps = std::numeric_limits<double>::epsilon();
  const double tol = eps * static_cast<double>(std::max<std::size_t>(n, 1)) * frobenius_norm(a);

  EigenDecomposition out;
  double off = off_diagonal_norm(a);
  int sweep = 0;
  while (off > tol && off > 0.0) {
    if (sweep == max_sweeps) {
      throw ConvergenceError("sym_eigen: no convergence after " + std::to_string(max_sweeps) +
                                 " sweeps, off-diagonal norm " + std::to_string(off),
                             off);
    }
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Entries below rounding level relative to both diagonal terms are
        // dropped; rotating them only churns noise.
        const double g = 100.0 * std::abs(apq);
        if (sweep > 4 && std::abs(a(p, p)) + g == std::abs(a(p, p)) && std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        rotate(a, v, p, q);
      }
    }
    off = off_diagonal_norm(a);
  }
  out.sweeps = sweep;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  out.values = Vector(n);
  out.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

}  // namespace finer
