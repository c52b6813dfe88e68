#pragma once

#include <cstddef>
#include <optional>

#include "finer/activation.hpp"
#include "finer/encoding.hpp"
#include "finer/geometry.hpp"
#include "finer/image.hpp"
#include "finer/mlp.hpp"
#include "finer/optim.hpp"
#include "finer/rng.hpp"
#include "finer/sdf.hpp"

namespace finer {

struct ImageBatchMode {
  bool full = true;
  std::size_t size = 0;  ///< rows drawn with replacement when !full

  static ImageBatchMode all_pixels() { return {true, 0}; }
  static ImageBatchMode random(std::size_t b) { return {false, b}; }
};

/// FULL: every pixel once, row-major. RANDOM(B): B pixels uniformly with replacement.
SampleBatch image_batch(const ImageTarget& img, ImageBatchMode mode, CounterRng& rng);

struct NetworkShape {
  std::size_t hidden_layers = 3;
  std::size_t hidden_width = 256;
  std::optional<PositionalEncoder> encoder;

  std::vector<std::size_t> dims(std::size_t d_in, std::size_t d_out) const;
};

struct TrainConfig {
  NetworkShape net;
  std::size_t iterations = 2000;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Loss loss = Loss::kL2;
  bool cosine_decay = false;
  /// Images with at most this many pixels train full-batch.
  std::size_t full_batch_limit = 256 * 256;
  /// Minibatch size for large images and for SDF sampling.
  std::size_t batch_size = 16384;
  /// Log PSNR every N iterations (and at the last one); 0 disables.
  std::size_t psnr_every = 0;
};

struct ImageMetrics {
  double psnr = 0.0;
  double ssim = 0.0;
};

struct FitImageResult {
  Mlp mlp;
  ImageMetrics metrics;
  TrainLog log;
  ImageTarget reconstruction;
};

/// Renders the network on the pixel-center grid of a w×h image.
ImageTarget render_image(const Mlp& mlp, std::size_t width, std::size_t height);
ImageMetrics image_metrics(const Mlp& mlp, const ImageTarget& img);

/// Trains a coordinate network (R² → channels) on `img` with the configured
/// loss; metrics are computed on the full pixel grid at the end.
FitImageResult fit_image(const ImageTarget& img, const Activation& activation, const InitScheme& scheme,
                         const TrainConfig& config);

struct SdfFitOptions {
  SdfSamplingOptions sampling;
  std::size_t eval_resolution = 128;
};

struct FitSdfResult {
  Mlp mlp;
  ScalarGrid grid;  ///< network evaluated on the eval lattice
  TrainLog log;
};

/// The network sampled on a resolution³ lattice over [-1,1]³.
ScalarGrid evaluate_sdf_grid(const Mlp& mlp, std::size_t resolution);

/// Trains R³ → R on freshly sampled batches (config.batch_size per step).
FitSdfResult fit_sdf(const SdfTarget& target, const Activation& activation, const InitScheme& scheme,
                     const TrainConfig& config, const SdfFitOptions& options = {});

struct SdfMetrics {
  double iou = 0.0;
  double chamfer = 0.0;  ///< NaN when either surface is empty
  std::size_t vertices = 0;
  std::size_t triangles = 0;
};

/// IoU against the oracle on the same lattice, Chamfer between surface
/// samples of both marching-cubes meshes.
SdfMetrics sdf_metrics(const ScalarGrid& predicted, const SdfTarget& target, std::size_t chamfer_points = 30000,
                       std::uint64_t seed = 0);

}  // namespace finer
