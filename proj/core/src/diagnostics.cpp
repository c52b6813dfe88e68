#include "finer/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "finer/errors.hpp"

namespace finer {

double subfunction_boundary(unsigned n) {
  FINER_REQUIRE(n >= 1, "subfunction_boundary: n must be >= 1");
  const double c = static_cast<double>(n) * std::numbers::pi;
  // (√(4c+1) − 1)/2 rewritten without the cancellation.
  return 2.0 * c / (std::sqrt(4.0 * c + 1.0) + 1.0);
}

FrequencyScaleConstants frequency_scale_constants() {
  const double pi = std::numbers::pi;
  const double r1 = std::sqrt(4.0 * pi + 1.0);
  const double r3 = std::sqrt(12.0 * pi + 1.0);
  return {2.0 * pi / (r1 - 1.0), (r1 - 1.0) / (r3 - r1)};
}

CoordinateGrid CoordinateGrid::line(std::size_t n, double lo, double hi) { return {{n}, {lo}, {hi}}; }

CoordinateGrid CoordinateGrid::square(std::size_t n, double lo, double hi) { return {{n, n}, {lo, lo}, {hi, hi}}; }

std::size_t CoordinateGrid::size() const noexcept {
  std::size_t s = 1;
  for (std::size_t c : counts) s *= c;
  return s;
}

Matrix CoordinateGrid::coordinates() const {
  FINER_REQUIRE(dims() == 1 || dims() == 2, "CoordinateGrid: only 1D and 2D grids are supported");
  FINER_REQUIRE(lo.size() == dims() && hi.size() == dims(), "CoordinateGrid: bounds do not match dimension");
  for (std::size_t d = 0; d < dims(); ++d) {
    FINER_REQUIRE(counts[d] >= 4, "CoordinateGrid: need at least 4 points per axis");
    FINER_REQUIRE(hi[d] > lo[d], "CoordinateGrid: empty extent");
  }
  auto axis = [&](std::size_t d, std::size_t i) {
    return lo[d] + (hi[d] - lo[d]) * static_cast<double>(i) / static_cast<double>(counts[d] - 1);
  };
  Matrix m(size(), dims());
  if (dims() == 1) {
    for (std::size_t i = 0; i < counts[0]; ++i) m(i, 0) = axis(0, i);
  } else {
    for (std::size_t j = 0; j < counts[1]; ++j)
      for (std::size_t i = 0; i < counts[0]; ++i) {
        m(j * counts[0] + i, 0) = axis(0, i);
        m(j * counts[0] + i, 1) = axis(1, j);
      }
  }
  return m;
}

std::size_t count_mean_crossings(std::span<const double> values) {
  if (values.empty()) return 0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  // Tolerate rounding noise on flat responses.
  const double tol = 1e-12 * std::max(1.0, max_abs(values));
  int last = 0;
  std::size_t crossings = 0;
  for (double v : values) {
    const double d = v - mean;
    const int s = d > tol ? 1 : (d < -tol ? -1 : 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++crossings;
    last = s;
  }
  return crossings;
}

std::vector<NeuronFrequency> neuron_frequency_map(const Mlp& mlp, const CoordinateGrid& grid) {
  FINER_REQUIRE(grid.dims() == mlp.input_dim(), "neuron_frequency_map: grid dimension != network input width");
  FINER_REQUIRE(mlp.num_layers() >= 2, "neuron_frequency_map: network has no hidden layer");
  const Matrix coords = grid.coordinates();
  const ForwardPass pass = forward(mlp, coords);
  const Matrix& z = pass.cache.post.front();

  std::vector<NeuronFrequency> out(z.cols());
  for (std::size_t k = 0; k < z.cols(); ++k) {
    NeuronFrequency& nf = out[k];
    nf.neuron = k;
    nf.response.resize(z.rows());
    for (std::size_t r = 0; r < z.rows(); ++r) nf.response[r] = z(r, k);

    if (grid.dims() == 1) {
      nf.crossings = count_mean_crossings(nf.response);
      nf.frequency = static_cast<double>(nf.crossings) / (2.0 * (grid.hi[0] - grid.lo[0]));
      continue;
    }
    const std::size_t nx = grid.counts[0];
    const std::size_t ny = grid.counts[1];
    std::size_t along_x = 0;
    std::vector<double> line;
    for (std::size_t j = 0; j < ny; ++j)
      along_x += count_mean_crossings(std::span<const double>(nf.response).subspan(j * nx, nx));
    std::size_t along_y = 0;
    line.resize(ny);
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) line[j] = nf.response[j * nx + i];
      along_y += count_mean_crossings(line);
    }
    const double fx = static_cast<double>(along_x) / static_cast<double>(ny) / (2.0 * (grid.hi[0] - grid.lo[0]));
    const double fy = static_cast<double>(along_y) / static_cast<double>(nx) / (2.0 * (grid.hi[1] - grid.lo[1]));
    nf.crossings = static_cast<std::size_t>(std::lround(static_cast<double>(along_x) / static_cast<double>(ny) +
                                                        static_cast<double>(along_y) / static_cast<double>(nx)));
    nf.frequency = std::hypot(fx, fy);
  }
  return out;
}

double frequency_spread(const std::vector<NeuronFrequency>& neurons) {
  FINER_REQUIRE(!neurons.empty(), "frequency_spread: no neurons");
  const auto [lo, hi] = std::minmax_element(neurons.begin(), neurons.end(),
                                            [](const auto& a, const auto& b) { return a.frequency < b.frequency; });
  return hi->frequency - lo->frequency;
}

}  // namespace finer
