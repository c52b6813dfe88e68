#include "finer/fit.hpp"

#include <cmath>
#include <limits>

#include "finer/errors.hpp"
#include "finer/metrics.hpp"

namespace finer {
namespace {
// Stream ids under the run seed; init draws use CounterRng(seed) directly.
constexpr std::uint64_t kSamplingStream = 1;
constexpr std::uint64_t kEvalStream = 2;
}  // namespace

SampleBatch image_batch(const ImageTarget& img, ImageBatchMode mode, CounterRng& rng) {
  img.validate();
  if (mode.full) return {img.coordinates(), img.as_matrix()};
  const std::size_t c = img.channels;
  SampleBatch batch{Matrix(mode.size, 2), Matrix(mode.size, c)};
  const double w = static_cast<double>(img.width);
  const double h = static_cast<double>(img.height);
  for (std::size_t i = 0; i < mode.size; ++i) {
    const std::size_t p = rng.index(img.pixel_count());
    const std::size_t x = p % img.width;
    const std::size_t y = p / img.width;
    batch.coords(i, 0) = (2.0 * static_cast<double>(x) + 1.0) / w - 1.0;
    batch.coords(i, 1) = (2.0 * static_cast<double>(y) + 1.0) / h - 1.0;
    for (std::size_t ch = 0; ch < c; ++ch) batch.targets(i, ch) = img.pixels[p * c + ch];
  }
  return batch;
}

std::vector<std::size_t> NetworkShape::dims(std::size_t d_in, std::size_t d_out) const {
  std::vector<std::size_t> d{d_in};
  for (std::size_t l = 0; l < hidden_layers; ++l) d.push_back(hidden_width);
  d.push_back(d_out);
  return d;
}

ImageTarget render_image(const Mlp& mlp, std::size_t width, std::size_t height) {
  const ImageTarget probe(width, height, 1);
  return ImageTarget::from_matrix(predict(mlp, probe.coordinates()), width, height);
}

ImageMetrics image_metrics(const Mlp& mlp, const ImageTarget& img) {
  const ImageTarget recon = render_image(mlp, img.width, img.height);
  return {psnr(recon, img), ssim(recon, img)};
}

FitImageResult fit_image(const ImageTarget& img, const Activation& activation, const InitScheme& scheme,
                         const TrainConfig& config) {
  img.validate();
  Mlp mlp = init_mlp(config.net.dims(2, img.channels), activation, scheme, config.net.encoder);
  AdamState state = AdamState::for_mlp(mlp, config.lr, config.beta1, config.beta2, config.eps);

  const bool full = img.pixel_count() <= config.full_batch_limit;
  CounterRng rng(scheme.seed, kSamplingStream);
  const SampleBatch full_batch = full ? image_batch(img, ImageBatchMode::all_pixels(), rng) : SampleBatch{};
  BatchSampler sampler = [&](std::size_t) {
    if (full) return full_batch;
    return image_batch(img, ImageBatchMode::random(config.batch_size), rng);
  };

  TrainOptions options;
  options.loss = config.loss;
  options.iterations = config.iterations;
  options.cosine_decay = config.cosine_decay;
  if (config.psnr_every > 0 && full) {
    options.monitor = [&](std::size_t it, const Matrix& pred, const SampleBatch& batch) -> std::optional<double> {
      if (it % config.psnr_every != 0 && it != config.iterations) return std::nullopt;
      return psnr(pred.span(), batch.targets.span());
    };
  }

  FitImageResult result;
  result.log = train(mlp, sampler, options, state);
  result.reconstruction = render_image(mlp, img.width, img.height);
  result.metrics = {psnr(result.reconstruction, img), ssim(result.reconstruction, img)};
  result.mlp = std::move(mlp);
  return result;
}

ScalarGrid evaluate_sdf_grid(const Mlp& mlp, std::size_t resolution) {
  FINER_REQUIRE(mlp.input_dim() == 3 && mlp.output_dim() == 1, "evaluate_sdf_grid: network must map R^3 -> R");
  ScalarGrid grid({resolution, resolution, resolution}, {-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0});
  const std::size_t slab = resolution * resolution;
  Matrix coords(slab, 3);
  for (std::size_t z = 0; z < resolution; ++z) {
    for (std::size_t y = 0; y < resolution; ++y)
      for (std::size_t x = 0; x < resolution; ++x) {
        const Point3 p = grid.position(x, y, z);
        const std::size_t r = x + resolution * y;
        coords(r, 0) = p[0];
        coords(r, 1) = p[1];
        coords(r, 2) = p[2];
      }
    const Matrix out = predict(mlp, coords);
    std::copy(out.span().begin(), out.span().end(), grid.values.begin() + static_cast<std::ptrdiff_t>(z * slab));
  }
  return grid;
}

FitSdfResult fit_sdf(const SdfTarget& target, const Activation& activation, const InitScheme& scheme,
                     const TrainConfig& config, const SdfFitOptions& options) {
  FINER_REQUIRE(config.batch_size > 0, "fit_sdf: batch size must be positive");
  Mlp mlp = init_mlp(config.net.dims(3, 1), activation, scheme, config.net.encoder);
  AdamState state = AdamState::for_mlp(mlp, config.lr, config.beta1, config.beta2, config.eps);
  CounterRng rng(scheme.seed, kSamplingStream);
  BatchSampler sampler = [&](std::size_t) { return sample_sdf(target, config.batch_size, options.sampling, rng); };

  TrainOptions topts;
  topts.loss = config.loss;
  topts.iterations = config.iterations;
  topts.cosine_decay = config.cosine_decay;

  FitSdfResult result;
  result.log = train(mlp, sampler, topts, state);
  result.grid = evaluate_sdf_grid(mlp, options.eval_resolution);
  result.mlp = std::move(mlp);
  return result;
}

SdfMetrics sdf_metrics(const ScalarGrid& predicted, const SdfTarget& target, std::size_t chamfer_points,
                       std::uint64_t seed) {
  const ScalarGrid reference = ScalarGrid::sample(predicted.dims, predicted.bbox_min, predicted.bbox_max,
                                                  [&](const Point3& p) { return target.distance(p); });
  SdfMetrics m;
  m.iou = iou(predicted, reference);
  const TriMesh pred_mesh = marching_cubes(predicted);
  const TriMesh ref_mesh = marching_cubes(reference);
  m.vertices = pred_mesh.vertices.size();
  m.triangles = pred_mesh.triangles.size();
  if (pred_mesh.empty() || ref_mesh.empty() || chamfer_points == 0) {
    m.chamfer = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  CounterRng rng(seed, kEvalStream);
  const auto a = sample_surface(pred_mesh, chamfer_points, rng);
  const auto b = sample_surface(ref_mesh, chamfer_points, rng);
  m.chamfer = chamfer(a, b);
  return m;
}

}  // namespace finer
