#include "finer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "finer/errors.hpp"

namespace finer {

double psnr(std::span<const double> pred, std::span<const double> target) {
  FINER_REQUIRE(pred.size() == target.size(), "psnr: shape mismatch");
  FINER_REQUIRE(!pred.empty(), "psnr: empty input");
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = std::clamp(pred[i], 0.0, 1.0) - std::clamp(target[i], 0.0, 1.0);
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(pred.size());
  if (mse == 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, -10.0 * std::log10(mse));
}

double psnr(const ImageTarget& pred, const ImageTarget& target) {
  FINER_REQUIRE(pred.width == target.width && pred.height == target.height && pred.channels == target.channels,
                "psnr: image shapes differ");
  return psnr(std::span<const double>(pred.pixels), std::span<const double>(target.pixels));
}

namespace {

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double c = 0.5 * (size - 1);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - c;
    k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable "valid" filtering: output is (w-n+1) x (h-n+1).
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t w, std::size_t h,
                                 const std::vector<double>& k) {
  const std::size_t n = k.size();
  const std::size_t ow = w - n + 1;
  const std::size_t oh = h - n + 1;
  std::vector<double> tmp(ow * h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * img[y * w + x + i];
      tmp[y * ow + x] = s;
    }
  std::vector<double> out(ow * oh);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * tmp[(y + i) * ow + x];
      out[y * ow + x] = s;
    }
  return out;
}

}  // namespace

double ssim(const ImageTarget& pred, const ImageTarget& target, const SsimOptions& options) {
  FINER_REQUIRE(pred.width == target.width && pred.height == target.height && pred.channels == target.channels,
                "ssim: image shapes differ");
  FINER_REQUIRE(options.window > 0 && options.sigma > 0.0, "ssim: bad window");
  const std::size_t win = static_cast<std::size_t>(options.window);
  FINER_REQUIRE(pred.width >= win && pred.height >= win, "ssim: image smaller than the window");

  const ImageTarget a = pred.grayscale();
  const ImageTarget b = target.grayscale();
  const std::size_t w = a.width;
  const std::size_t h = a.height;
  std::vector<double> aa(w * h), bb(w * h), ab(w * h);
  for (std::size_t i = 0; i < w * h; ++i) {
    aa[i] = a.pixels[i] * a.pixels[i];
    bb[i] = b.pixels[i] * b.pixels[i];
    ab[i] = a.pixels[i] * b.pixels[i];
  }
  const auto k = gaussian_kernel(options.window, options.sigma);
  const auto mu_a = filter_valid(a.pixels, w, h, k);
  const auto mu_b = filter_valid(b.pixels, w, h, k);
  const auto s_aa = filter_valid(aa, w, h, k);
  const auto s_bb = filter_valid(bb, w, h, k);
  const auto s_ab = filter_valid(ab, w, h, k);

  const double c1 = (options.k1) * (options.k1);
  const double c2 = (options.k2) * (options.k2);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double va = s_aa[i] - ma * ma;
    const double vb = s_bb[i] - mb * mb;
    const double cov = s_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

}  // namespace finer
