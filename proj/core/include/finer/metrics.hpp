#pragma once

#include <span>

#include "finer/image.hpp"

namespace finer {

/// Returned when the two signals are identical (MSE = 0).
inline constexpr double kPsnrCapDb = 100.0;

/// 10·log10(1/MSE) after clamping both inputs to [0, 1]; capped at kPsnrCapDb.
double psnr(std::span<const double> pred, std::span<const double> target);
double psnr(const ImageTarget& pred, const ImageTarget& target);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over every valid window position, computed on luminance for RGB
/// inputs. Throws ContractViolation if the images differ in shape or are
/// smaller than the window.
double ssim(const ImageTarget& pred, const ImageTarget& target, const SsimOptions& options = {});

}  // namespace finer
