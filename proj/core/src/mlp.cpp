#include "finer/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "finer/errors.hpp"
#include "finer/rng.hpp"

namespace finer {

Mlp::Mlp(std::vector<std::size_t> dims, Activation activation, std::optional<PositionalEncoder> encoder)
    : dims_(std::move(dims)), activation_(activation), encoder_(encoder) {
  FINER_REQUIRE(dims_.size() >= 2, "Mlp: need at least input and output widths");
  for (std::size_t w : dims_) FINER_REQUIRE(w > 0, "Mlp: zero-width layer");
  activation_.validate();
  layers_.reserve(dims_.size() - 1);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const std::size_t fan_in = l == 0 ? feature_dim() : dims_[l];
    layers_.push_back({Matrix(dims_[l + 1], fan_in), Vector(dims_[l + 1])});
  }
}

std::size_t Mlp::feature_dim() const noexcept {
  return encoder_ ? encoder_->output_dim(dims_.front()) : dims_.front();
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.biases.size();
  return n;
}

std::vector<double> Mlp::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& layer : layers_) {
    flat.insert(flat.end(), layer.weights.span().begin(), layer.weights.span().end());
    flat.insert(flat.end(), layer.biases.begin(), layer.biases.end());
  }
  return flat;
}

void Mlp::set_parameters(std::span<const double> flat) {
  FINER_REQUIRE(flat.size() == parameter_count(), "Mlp::set_parameters: expected " +
                                                      std::to_string(parameter_count()) + " values, got " +
                                                      std::to_string(flat.size()));
  std::size_t o = 0;
  for (auto& layer : layers_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(o), layer.weights.size(), layer.weights.data());
    o += layer.weights.size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(o), layer.biases.size(), layer.biases.data());
    o += layer.biases.size();
  }
}

double weight_halfwidth(WeightRule rule, std::size_t fan_in, const Activation& activation) {
  FINER_REQUIRE(fan_in > 0, "weight_halfwidth: zero fan-in");
  const double n = static_cast<double>(fan_in);
  switch (rule) {
    case WeightRule::kFirstLayer: return 1.0 / n;
    case WeightRule::kSirenHidden: {
      const double r = std::sqrt(6.0 / n);
      return activation.periodic() ? r / activation.omega0 : r;
    }
  }
  return 0.0;
}

Mlp init_mlp(const std::vector<std::size_t>& dims, const Activation& activation, const InitScheme& scheme,
             std::optional<PositionalEncoder> encoder) {
  FINER_REQUIRE(scheme.bias_halfwidth >= 0.0 && std::isfinite(scheme.bias_halfwidth),
                "init: bias half-width k must be non-negative");
  Mlp mlp(dims, activation, encoder);
  const CounterRng root(scheme.seed);
  const std::size_t last = mlp.num_layers() - 1;
  for (std::size_t l = 0; l < mlp.num_layers(); ++l) {
    auto& layer = mlp.layer(l);
    const std::size_t fan_in = layer.weights.cols();
    const CounterRng stream = root.split(l);
    CounterRng wrng = stream.split(0);
    CounterRng brng = stream.split(1);

    const double wr = weight_halfwidth(l == 0 ? WeightRule::kFirstLayer : WeightRule::kSirenHidden, fan_in, activation);
    for (double& w : layer.weights.span()) w = wrng.uniform(-wr, wr);

    if (l == last) continue;  // output bias stays zero
    double br = scheme.bias_halfwidth;
    if (l > 0 && scheme.bias_scope == BiasScope::kFirstLayer) br = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& b : layer.biases) b = brng.uniform(-br, br);
  }
  return mlp;
}

void forward(const Mlp& mlp, const Matrix& coords, ForwardPass& pass) {
  FINER_REQUIRE(coords.cols() == mlp.input_dim(), "forward: coordinate width " + std::to_string(coords.cols()) +
                                                      " != network input width " +
                                                      std::to_string(mlp.input_dim()));
  for (std::size_t r = 0; r < coords.rows(); ++r)
    if (!all_finite(coords.row(r))) throw NonFiniteError("forward: non-finite coordinate in row " + std::to_string(r));

  ForwardCache& cache = pass.cache;
  cache.coords = coords;
  if (mlp.encoder())
    cache.features = mlp.encoder()->encode(coords);
  else
    cache.features = Matrix();

  const std::size_t last = mlp.num_layers() - 1;
  cache.pre.resize(last);
  cache.post.resize(last);
  for (std::size_t l = 0; l < mlp.num_layers(); ++l) {
    const auto& layer = mlp.layer(l);
    Matrix& g = l == last ? pass.outputs : cache.pre[l];
    affine_into(cache.layer_input(l), layer.weights, layer.biases, g);
    if (l == last) break;
    cache.post[l].reshape(g.rows(), g.cols());
    activate(mlp.activation(), g.span(), cache.post[l].span());
  }
}

ForwardPass forward(const Mlp& mlp, const Matrix& coords) {
  ForwardPass pass;
  forward(mlp, coords, pass);
  return pass;
}

Matrix predict(const Mlp& mlp, const Matrix& coords, std::size_t chunk_rows) {
  FINER_REQUIRE(chunk_rows > 0, "predict: chunk size must be positive");
  if (coords.rows() <= chunk_rows) return forward(mlp, coords).outputs;
  Matrix out(coords.rows(), mlp.output_dim());
  for (std::size_t begin = 0; begin < coords.rows(); begin += chunk_rows) {
    const std::size_t n = std::min(chunk_rows, coords.rows() - begin);
    Matrix chunk(n, coords.cols(),
                 std::vector<double>(coords.data() + begin * coords.cols(),
                                     coords.data() + (begin + n) * coords.cols()));
    const Matrix part = forward(mlp, chunk).outputs;
    std::copy(part.span().begin(), part.span().end(), out.data() + begin * out.cols());
  }
  return out;
}

GradientSet GradientSet::zeros_like(const Mlp& mlp) {
  GradientSet g;
  for (const auto& layer : mlp.layers()) {
    g.weights.emplace_back(layer.weights.rows(), layer.weights.cols());
    g.biases.emplace_back(layer.biases.size());
  }
  return g;
}

std::vector<double> GradientSet::flatten() const {
  std::vector<double> flat;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.insert(flat.end(), weights[l].span().begin(), weights[l].span().end());
    flat.insert(flat.end(), biases[l].begin(), biases[l].end());
  }
  return flat;
}

void backward(const Mlp& mlp, const ForwardCache& cache, const Matrix& output_grad, GradientSet& grads,
              BackwardScratch& scratch, bool want_input_grad) {
  const std::size_t batch = cache.coords.rows();
  const std::size_t last = mlp.num_layers() - 1;
  FINER_REQUIRE(cache.pre.size() == last && cache.post.size() == last,
                "backward: cache does not match the network depth");
  FINER_REQUIRE(output_grad.rows() == batch && output_grad.cols() == mlp.output_dim(),
                "backward: output gradient shape does not match the cached batch");

  grads.weights.resize(mlp.num_layers());
  grads.biases.resize(mlp.num_layers());
  grads.input.reset();

  const Matrix* delta = &output_grad;  // dL/dg for the current layer
  for (std::size_t l = mlp.num_layers(); l-- > 0;) {
    const auto& layer = mlp.layer(l);
    const Matrix& input = cache.layer_input(l);
    FINER_REQUIRE(input.cols() == layer.weights.cols(), "backward: cache does not match layer widths");
    matmul_tn_into(*delta, input, grads.weights[l]);
    column_sums_into(*delta, grads.biases[l]);
    if (l == 0 && !want_input_grad) break;
    matmul_into(*delta, layer.weights, scratch.upstream);  // dL/dz_{l-1}
    if (l == 0) {
      grads.input = mlp.encoder() ? mlp.encoder()->backprop(cache.coords, scratch.upstream) : scratch.upstream;
      break;
    }
    scale_by_activation_grad(mlp.activation(), cache.pre[l - 1].span(), scratch.upstream.span());
    std::swap(scratch.delta, scratch.upstream);
    delta = &scratch.delta;
  }
}

GradientSet backward(const Mlp& mlp, const ForwardCache& cache, const Matrix& output_grad, bool want_input_grad) {
  GradientSet grads;
  BackwardScratch scratch;
  backward(mlp, cache, output_grad, grads, scratch, want_input_grad);
  return grads;
}

}  // namespace finer
