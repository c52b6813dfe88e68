#include <gtest/gtest.h>

#include <cmath>

#include "finer/fit.hpp"
#include "finer/geometry.hpp"

using namespace finer;

TEST(FitImage, ConstantGrayIsEasy) {
  const ImageTarget gray(16, 16, 1, 0.5);
  TrainConfig cfg;
  cfg.net = {2, 16, std::nullopt};
  cfg.iterations = 200;
  cfg.lr = 1e-3;
  const FitImageResult r = fit_image(gray, Activation::finer(), {0.5, 0}, cfg);
  EXPECT_GT(r.metrics.psnr, 40.0);
  EXPECT_EQ(r.log.records.size(), 200u);
  EXPECT_EQ(r.reconstruction.width, 16u);
}

TEST(FitImage, MinibatchDrawsWithReplacement) {
  const ImageTarget img(8, 4, 3, 0.25);
  CounterRng rng(3);
  const SampleBatch b = image_batch(img, ImageBatchMode::random(100), rng);
  EXPECT_EQ(b.coords.rows(), 100u);
  EXPECT_EQ(b.targets.cols(), 3u);
  CounterRng rng2(3);
  const SampleBatch full = image_batch(img, ImageBatchMode::all_pixels(), rng2);
  EXPECT_EQ(full.coords.rows(), 32u);
  EXPECT_DOUBLE_EQ(full.coords(0, 0), -1.0 + 1.0 / 8.0);
}

TEST(FitSdf, PlaneZeroCrossingLandsNearTheSurface) {
  const PlaneSdf plane({0.0, 0.0, 1.0}, 0.0);
  TrainConfig cfg;
  cfg.net = {2, 32, std::nullopt};
  cfg.iterations = 1500;
  cfg.lr = 1e-3;
  cfg.batch_size = 512;
  SdfFitOptions opt;
  opt.eval_resolution = 17;
  const FitSdfResult r = fit_sdf(plane, Activation::finer(), {1.0, 0}, cfg, opt);
  // Along the z axis through the middle of the lattice the sign flips once, near z = 0.
  const std::size_t n = r.grid.dims[2];
  int flips = 0;
  double crossing = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a = r.grid.at(n / 2, n / 2, k), b = r.grid.at(n / 2, n / 2, k + 1);
    if ((a < 0) != (b < 0)) {
      ++flips;
      const double za = r.grid.position(n / 2, n / 2, k)[2];
      crossing = za + r.grid.spacing(2) * a / (a - b);
    }
  }
  EXPECT_EQ(flips, 1);
  EXPECT_NEAR(crossing, 0.0, 0.05);
}

TEST(FitSdf, TrainingImprovesIou) {
  const SphereSdf sphere(0.6);
  TrainConfig cfg;
  cfg.net = {2, 64, std::nullopt};
  cfg.lr = 1e-4;
  cfg.batch_size = 512;
  SdfFitOptions opt;
  opt.eval_resolution = 24;
  cfg.iterations = 1;
  const FitSdfResult before = fit_sdf(sphere, Activation::finer(), {1.0, 0}, cfg, opt);
  cfg.iterations = 1500;
  const FitSdfResult after = fit_sdf(sphere, Activation::finer(), {1.0, 0}, cfg, opt);
  const double iou_before = sdf_metrics(before.grid, sphere, 1000).iou;
  const SdfMetrics m = sdf_metrics(after.grid, sphere, 1000);
  EXPECT_LT(iou_before, m.iou);
  EXPECT_GT(m.iou, 0.9);
  EXPECT_LT(m.chamfer, 1e-2);
}
