#pragma once

#include <cstddef>
#include <vector>

#include "finer/linalg.hpp"
#include "finer/mlp.hpp"

namespace finer {

/// Positive root x_n of (x+1)·x = nπ, i.e. (√(4nπ+1) − 1)/2: the edge of the
/// n-th sub-function of sin((|x|+1)x). Throws ContractViolation for n = 0.
double subfunction_boundary(unsigned n);

struct FrequencyScaleConstants {
  double first_over_sine;     ///< 2π / (√(4π+1) − 1)
  double second_over_first;   ///< (√(4π+1) − 1) / (√(12π+1) − √(4π+1))
};

FrequencyScaleConstants frequency_scale_constants();

/// A regular 1D or 2D sampling grid over an axis-aligned box.
struct CoordinateGrid {
  std::vector<std::size_t> counts;  ///< one entry per dimension (1 or 2)
  std::vector<double> lo;
  std::vector<double> hi;

  static CoordinateGrid line(std::size_t n, double lo = -1.0, double hi = 1.0);
  static CoordinateGrid square(std::size_t n, double lo = -1.0, double hi = 1.0);

  std::size_t dims() const noexcept { return counts.size(); }
  std::size_t size() const noexcept;
  /// Row-major, first axis fastest.
  Matrix coordinates() const;
};

struct NeuronFrequency {
  std::size_t neuron = 0;
  std::vector<double> response;  ///< first-layer output over the grid
  std::size_t crossings = 0;     ///< total mean-crossings counted (1D) or averaged per line (2D)
  double frequency = 0.0;        ///< cycles per unit length
};

/// For every first-layer neuron: its activation over the grid and a dominant
/// frequency estimate from the number of crossings of its mean per unit
/// length (half a crossing pair = one cycle). For 2D grids the per-axis rates
/// are combined as √(f_x² + f_y²). Needs at least 4 points per axis.
std::vector<NeuronFrequency> neuron_frequency_map(const Mlp& mlp, const CoordinateGrid& grid);

/// Count of sign changes of (v − mean v), skipping exact zeros.
std::size_t count_mean_crossings(std::span<const double> values);

/// max − min of the frequency estimates.
double frequency_spread(const std::vector<NeuronFrequency>& neurons);

}  // namespace finer
