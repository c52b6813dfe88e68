#include "finer/encoding.hpp"

#include <cmath>
#include <numbers>

#include "finer/errors.hpp"

namespace finer {

void PositionalEncoder::encode_into(std::span<const double> x, std::span<double> out) const {
  FINER_REQUIRE(out.size() == output_dim(x.size()), "PositionalEncoder: output length mismatch");
  std::size_t o = 0;
  if (include_input)
    for (double v : x) out[o++] = v;
  for (double v : x) {
    double freq = std::numbers::pi;
    for (std::size_t l = 0; l < num_bands; ++l, freq *= 2.0) {
      out[o++] = std::sin(freq * v);
      out[o++] = std::cos(freq * v);
    }
  }
}

std::vector<double> PositionalEncoder::encode(std::span<const double> x) const {
  std::vector<double> out(output_dim(x.size()));
  encode_into(x, out);
  return out;
}

Matrix PositionalEncoder::encode(const Matrix& coords) const {
  Matrix out(coords.rows(), output_dim(coords.cols()));
  for (std::size_t r = 0; r < coords.rows(); ++r) encode_into(coords.row(r), out.row(r));
  return out;
}

Matrix PositionalEncoder::backprop(const Matrix& coords, const Matrix& feature_grad) const {
  FINER_REQUIRE(feature_grad.rows() == coords.rows() && feature_grad.cols() == output_dim(coords.cols()),
                "PositionalEncoder::backprop: shape mismatch");
  Matrix out(coords.rows(), coords.cols());
  for (std::size_t r = 0; r < coords.rows(); ++r) {
    const auto x = coords.row(r);
    const auto g = feature_grad.row(r);
    std::size_t o = 0;
    if (include_input)
      for (std::size_t d = 0; d < x.size(); ++d) out(r, d) += g[o++];
    for (std::size_t d = 0; d < x.size(); ++d) {
      double freq = std::numbers::pi;
      for (std::size_t l = 0; l < num_bands; ++l, freq *= 2.0) {
        out(r, d) += g[o++] * freq * std::cos(freq * x[d]);
        out(r, d) -= g[o++] * freq * std::sin(freq * x[d]);
      }
    }
  }
  return out;
}

}  // namespace finer
