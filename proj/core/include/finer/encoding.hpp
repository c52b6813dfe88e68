#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "finer/linalg.hpp"

namespace finer {

/// Fourier-feature front end for the PEMLP baseline. For every input
/// dimension d and band l < num_bands it emits sin(2^l π x_d), cos(2^l π x_d);
/// the raw input is prepended when include_input is set.
struct PositionalEncoder {
  std::size_t num_bands = 10;
  bool include_input = true;

  std::size_t output_dim(std::size_t input_dim) const noexcept {
    return input_dim * 2 * num_bands + (include_input ? input_dim : 0);
  }

  std::vector<double> encode(std::span<const double> x) const;
  void encode_into(std::span<const double> x, std::span<double> out) const;
  Matrix encode(const Matrix& coords) const;

  /// Chains a gradient w.r.t. encoded features back to the raw coordinates.
  Matrix backprop(const Matrix& coords, const Matrix& feature_grad) const;

  bool operator==(const PositionalEncoder&) const = default;
};

}  // namespace finer
