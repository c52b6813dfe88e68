#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "finer/linalg.hpp"
#include "finer/rng.hpp"

namespace finer::testing {

inline Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  CounterRng rng(seed, 99);
  Matrix m(r, c);
  for (double& v : m.span()) v = rng.uniform(lo, hi);
  return m;
}

inline Matrix random_symmetric(std::size_t n, std::uint64_t seed) {
  Matrix a = random_matrix(n, n, seed);
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline std::string data_path(const std::string& name) { return std::string(FINER_TEST_DATA_DIR) + "/" + name; }

}  // namespace finer::testing
