#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "finer/activation.hpp"
#include "finer/encoding.hpp"
#include "finer/linalg.hpp"

namespace finer {

struct DenseLayer {
  Matrix weights;  ///< out × in
  Vector biases;   ///< out

  bool operator==(const DenseLayer&) const = default;
};

/// Coordinate network: optional positional encoding, hidden layers
/// z = act(W z + b), and a final affine layer with no activation.
///
/// dims = {d_in, h_1, ..., h_{L-1}, d_out} where d_in is the raw coordinate
/// width; with an encoder the first layer's fan-in is the encoded width.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> dims, Activation activation,
      std::optional<PositionalEncoder> encoder = std::nullopt);

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t input_dim() const noexcept { return dims_.front(); }
  std::size_t output_dim() const noexcept { return dims_.back(); }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  /// Width seen by layer 0 (encoded width if an encoder is attached).
  std::size_t feature_dim() const noexcept;
  std::size_t parameter_count() const noexcept;

  const Activation& activation() const noexcept { return activation_; }
  const std::optional<PositionalEncoder>& encoder() const noexcept { return encoder_; }

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  DenseLayer& layer(std::size_t l) { return layers_.at(l); }
  const DenseLayer& layer(std::size_t l) const { return layers_.at(l); }

  /// All parameters flattened layer by layer: weights (row-major), then biases.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<std::size_t> dims_;
  Activation activation_;
  std::optional<PositionalEncoder> encoder_;
  std::vector<DenseLayer> layers_;
};

enum class WeightRule {
  kFirstLayer,   ///< U(-1/n, 1/n)
  kSirenHidden,  ///< U(-√(6/n), √(6/n)) on the effective weight ω₀·W
};

/// Half-width of the uniform draw for a layer of fan-in n. For periodic
/// activations the hidden rule is divided by ω₀ so that ω₀·W has the stated
/// range.
double weight_halfwidth(WeightRule rule, std::size_t fan_in, const Activation& activation);

/// Which hidden layers draw their biases from U(-k, k).
enum class BiasScope {
  kFirstLayer,  ///< first layer U(-k,k); deeper hidden layers U(-1/√n, 1/√n)
  kAllHidden,   ///< every hidden layer U(-k,k)
};

struct InitScheme {
  double bias_halfwidth = 0.0;  ///< k
  std::uint64_t seed = 0;
  BiasScope bias_scope = BiasScope::kAllHidden;

  bool operator==(const InitScheme&) const = default;
};

/// Draws a fresh network. Layer 0 uses kFirstLayer, every later layer
/// kSirenHidden; hidden biases follow `scheme.bias_scope`; the output bias is
/// zero. Each layer draws from its own stream keyed by layer index.
Mlp init_mlp(const std::vector<std::size_t>& dims, const Activation& activation, const InitScheme& scheme,
             std::optional<PositionalEncoder> encoder = std::nullopt);

struct ForwardCache {
  Matrix coords;                   ///< raw input batch
  Matrix features;                 ///< encoded input; empty without an encoder
  std::vector<Matrix> pre;         ///< g = W z + b for every hidden layer
  std::vector<Matrix> post;        ///< z = act(g) for every hidden layer

  const Matrix& layer_input(std::size_t l) const {
    if (l == 0) return features.empty() ? coords : features;
    return post[l - 1];
  }
};

struct ForwardPass {
  Matrix outputs;  ///< batch × d_out
  ForwardCache cache;
};

/// Batched forward pass. Rejects non-finite coordinates with NonFiniteError.
ForwardPass forward(const Mlp& mlp, const Matrix& coords);
/// Same, overwriting `pass` and reusing its buffers.
void forward(const Mlp& mlp, const Matrix& coords, ForwardPass& pass);

/// Forward pass without a cache, evaluated in row chunks.
Matrix predict(const Mlp& mlp, const Matrix& coords, std::size_t chunk_rows = 8192);

struct GradientSet {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  std::optional<Matrix> input;  ///< dL/d(raw coords), when requested

  static GradientSet zeros_like(const Mlp& mlp);
  std::vector<double> flatten() const;
  bool operator==(const GradientSet&) const = default;
};

/// Reverse-mode gradients of a scalar loss whose gradient w.r.t. the outputs
/// is `output_grad`. Batch contributions are summed in row order.
GradientSet backward(const Mlp& mlp, const ForwardCache& cache, const Matrix& output_grad,
                     bool want_input_grad = false);

/// Intermediate dL/dg buffers kept between backward calls.
struct BackwardScratch {
  Matrix delta;
  Matrix upstream;
};

/// Same, overwriting `grads` and reusing its buffers and `scratch`.
void backward(const Mlp& mlp, const ForwardCache& cache, const Matrix& output_grad, GradientSet& grads,
              BackwardScratch& scratch, bool want_input_grad = false);

}  // namespace finer
