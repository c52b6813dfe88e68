#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "finer/linalg.hpp"

namespace finer {

/// Interleaved row-major image with channel values in [0, 1].
/// Pixel (x, y) maps to the coordinate ((2x+1)/w − 1, (2y+1)/h − 1).
struct ImageTarget {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 3;
  std::vector<double> pixels;

  ImageTarget() = default;
  ImageTarget(std::size_t w, std::size_t h, std::size_t c, double fill = 0.0);
  ImageTarget(std::size_t w, std::size_t h, std::size_t c, std::vector<double> data);

  std::size_t pixel_count() const noexcept { return width * height; }
  double& at(std::size_t x, std::size_t y, std::size_t c) { return pixels[(y * width + x) * channels + c]; }
  double at(std::size_t x, std::size_t y, std::size_t c) const { return pixels[(y * width + x) * channels + c]; }

  /// Throws ContractViolation if the size is off or a value leaves [0, 1].
  void validate() const;

  /// Pixel-center coordinates in [−1,1]², row-major (x fastest).
  Matrix coordinates() const;
  /// One row per pixel, one column per channel.
  Matrix as_matrix() const;
  /// Inverse of as_matrix; values are clamped into [0, 1].
  static ImageTarget from_matrix(const Matrix& m, std::size_t width, std::size_t height);

  /// Luminance (0.299, 0.587, 0.114) for RGB; a copy for grayscale.
  ImageTarget grayscale() const;
  /// Top-left corner crop.
  ImageTarget crop(std::size_t x0, std::size_t y0, std::size_t w, std::size_t h) const;
};

/// Reads 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette), binary PPM (P6) or
/// binary PGM (P5). Alpha is dropped.
ImageTarget load_image(const std::string& path);
void save_png(const ImageTarget& img, const std::string& path);
void save_pnm(const ImageTarget& img, const std::string& path);

/// Maps an arbitrary matrix to an 8-bit grayscale PNG by min-max normalization.
void save_heatmap_png(const Matrix& m, const std::string& path);

}  // namespace finer
