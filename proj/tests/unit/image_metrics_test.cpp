#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "finer/errors.hpp"
#include "finer/fit.hpp"
#include "finer/image.hpp"
#include "finer/metrics.hpp"
#include "test_support.hpp"

using namespace finer;

namespace {

ImageTarget noise_image(std::size_t w, std::size_t h, std::size_t c, std::uint64_t seed) {
  CounterRng r(seed);
  ImageTarget img(w, h, c);
  for (double& v : img.pixels) v = r.uniform();
  return img;
}

// Direct 2D-window SSIM with a normalized Gaussian kernel.
double reference_ssim(const ImageTarget& a, const ImageTarget& b) {
  const int win = 11, half = 5;
  const double sigma = 1.5, c1 = 1e-4, c2 = 9e-4;
  double kern[11][11], total = 0.0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) total += kern[i][j] = std::exp(-((i - half) * (i - half) + (j - half) * (j - half)) / (2 * sigma * sigma));
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t y = 0; y + win <= a.height; ++y)
    for (std::size_t x = 0; x + win <= a.width; ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double w = kern[i][j] / total;
          const double va = a.at(x + j, y + i, 0), vb = b.at(x + j, y + i, 0);
          ma += w * va;
          mb += w * vb;
          saa += w * va * va;
          sbb += w * vb * vb;
          sab += w * va * vb;
        }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++n;
    }
  return acc / static_cast<double>(n);
}

}  // namespace

TEST(ImageTarget, Validation) {
  EXPECT_THROW(ImageTarget(2, 2, 2), ContractViolation);
  EXPECT_THROW(ImageTarget(2, 2, 1, std::vector<double>{0, 0, 0}), ContractViolation);
  EXPECT_THROW(ImageTarget(1, 1, 1, std::vector<double>{1.5}), ContractViolation);
}

TEST(ImageBatch, FullTwoByTwoUsesPixelCenters) {
  const ImageTarget img(2, 2, 1, std::vector<double>{0.1, 0.2, 0.3, 0.4});
  CounterRng rng(0);
  const SampleBatch b = image_batch(img, ImageBatchMode::all_pixels(), rng);
  EXPECT_EQ(b.coords, Matrix::from_rows({{-0.5, -0.5}, {0.5, -0.5}, {-0.5, 0.5}, {0.5, 0.5}}));
  EXPECT_EQ(b.targets, Matrix::from_rows({{0.1}, {0.2}, {0.3}, {0.4}}));
}

TEST(ImageBatch, SinglePixelIsCentered) {
  CounterRng rng(0);
  const SampleBatch b = image_batch(ImageTarget(1, 1, 3, 0.5), ImageBatchMode::all_pixels(), rng);
  EXPECT_EQ(b.coords, Matrix::from_rows({{0.0, 0.0}}));
}

TEST(ImageBatch, RandomIsRoughlyUniform) {
  const ImageTarget img(2, 2, 1, std::vector<double>{0.0, 0.25, 0.5, 0.75});
  CounterRng rng(3);
  const SampleBatch b = image_batch(img, ImageBatchMode::random(1000), rng);
  ASSERT_EQ(b.coords.rows(), 1000u);
  int counts[4] = {};
  for (std::size_t i = 0; i < 1000; ++i) ++counts[static_cast<int>(std::lround(b.targets(i, 0) * 4))];
  for (int c : counts) {
    EXPECT_GE(c, 200);
    EXPECT_LE(c, 300);
  }
}

TEST(Psnr, Oracles) {
  const ImageTarget a = noise_image(8, 8, 3, 1);
  EXPECT_EQ(psnr(a, a), kPsnrCapDb);
  EXPECT_DOUBLE_EQ(psnr(ImageTarget(4, 4, 1, 0.0), ImageTarget(4, 4, 1, 1.0)), 0.0);
  EXPECT_NEAR(psnr(ImageTarget(4, 4, 1, 0.25), ImageTarget(4, 4, 1, 0.75)), 6.0206, 1e-4);
  EXPECT_NEAR(psnr(ImageTarget(4, 4, 1, 0.25), ImageTarget(4, 4, 1, 0.75)), 10.0 * std::log10(4.0), 1e-12);
}

TEST(Psnr, SymmetricAndMonotoneInNoise) {
  const ImageTarget a = noise_image(16, 16, 1, 2);
  CounterRng r(5);
  std::vector<double> unit(a.pixels.size());
  for (double& v : unit) v = r.uniform(-1.0, 1.0);
  double prev = kPsnrCapDb + 1;
  for (double amp : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    std::vector<double> p = a.pixels;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::clamp(p[i] + amp * unit[i], 0.0, 1.0);
    const double fwd = psnr(p, a.pixels);
    EXPECT_EQ(fwd, psnr(a.pixels, p));
    EXPECT_LT(fwd, prev);
    prev = fwd;
  }
}

TEST(Psnr, ClampsAndChecksShape) {
  const std::vector<double> over{1.5, -0.5}, ok{1.0, 0.0};
  EXPECT_EQ(psnr(over, ok), kPsnrCapDb);
  EXPECT_THROW(psnr(ImageTarget(2, 2, 1), ImageTarget(2, 3, 1)), ContractViolation);
}

TEST(Ssim, IdentityIsOne) {
  const ImageTarget a = noise_image(16, 16, 3, 3);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  EXPECT_NEAR(ssim(ImageTarget(16, 16, 1, 0.5), ImageTarget(16, 16, 1, 0.5)), 1.0, 1e-12);
}

TEST(Ssim, NegativeIsAnticorrelated) {
  const ImageTarget a = noise_image(20, 20, 1, 4);
  ImageTarget neg = a;
  for (double& v : neg.pixels) v = 1.0 - v;
  EXPECT_LT(ssim(a, neg), 0.0);
}

TEST(Ssim, SymmetricAndMatchesDirectWindow) {
  const ImageTarget a = noise_image(24, 19, 1, 5);
  ImageTarget b = a;
  CounterRng r(6);
  for (double& v : b.pixels) v = std::clamp(v + r.uniform(-0.2, 0.2), 0.0, 1.0);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-14);
  EXPECT_NEAR(ssim(a, b), reference_ssim(a, b), 1e-10);
}

TEST(Ssim, RejectsSmallImages) {
  EXPECT_THROW(ssim(ImageTarget(10, 20, 1), ImageTarget(10, 20, 1)), ContractViolation);
  EXPECT_THROW(ssim(ImageTarget(12, 12, 1), ImageTarget(12, 12, 3)), ContractViolation);
}

TEST(ImageIo, PngAndPnmRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "finer_image_io";
  std::filesystem::create_directories(dir);
  ImageTarget a = noise_image(7, 5, 3, 7);
  for (double& v : a.pixels) v = std::round(v * 255.0) / 255.0;
  save_png(a, (dir / "a.png").string());
  save_pnm(a, (dir / "a.ppm").string());
  const ImageTarget p = load_image((dir / "a.png").string());
  const ImageTarget q = load_image((dir / "a.ppm").string());
  EXPECT_EQ(p.width, 7u);
  EXPECT_EQ(p.channels, 3u);
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    EXPECT_NEAR(p.pixels[i], a.pixels[i], 1e-12);
    EXPECT_NEAR(q.pixels[i], a.pixels[i], 1e-12);
  }
  const ImageTarget g = a.grayscale();
  save_pnm(g, (dir / "g.pgm").string());
  EXPECT_EQ(load_image((dir / "g.pgm").string()).channels, 1u);
}

TEST(ImageIo, ErrorsAreIoErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "finer_image_io";
  std::filesystem::create_directories(dir);
  EXPECT_THROW(load_image((dir / "missing.png").string()), IoError);
  std::ofstream((dir / "junk.bin").string()) << "not an image";
  EXPECT_THROW(load_image((dir / "junk.bin").string()), IoError);
}

TEST(ImageIo, BundledCropsLoad) {
  for (const char* name : {"astronaut_128.png", "chelsea_128.png", "coffee_128.png"}) {
    const ImageTarget img = load_image(finer::testing::data_path(name));
    EXPECT_EQ(img.width, 128u);
    EXPECT_EQ(img.height, 128u);
    EXPECT_EQ(img.channels, 3u);
  }
}

TEST(ImageTarget, MatrixRoundTripAndCrop) {
  const ImageTarget a = noise_image(6, 4, 3, 8);
  EXPECT_EQ(ImageTarget::from_matrix(a.as_matrix(), 6, 4).pixels, a.pixels);
  const ImageTarget c = a.crop(1, 2, 3, 2);
  EXPECT_EQ(c.at(0, 0, 2), a.at(1, 2, 2));
  EXPECT_THROW(a.crop(4, 0, 3, 1), ContractViolation);
}
