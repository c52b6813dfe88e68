#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "finer/rng.hpp"

namespace finer {

using Point3 = std::array<double, 3>;

/// Scalar samples on a regular lattice that includes both bbox corners.
/// Values are stored x-fastest: index = x + nx·(y + ny·z).
struct ScalarGrid {
  std::array<std::size_t, 3> dims{2, 2, 2};
  Point3 bbox_min{-1.0, -1.0, -1.0};
  Point3 bbox_max{1.0, 1.0, 1.0};
  std::vector<double> values;

  ScalarGrid() = default;
  ScalarGrid(std::array<std::size_t, 3> dims, Point3 bbox_min, Point3 bbox_max);

  /// Samples `field` at every lattice point.
  static ScalarGrid sample(std::array<std::size_t, 3> dims, Point3 bbox_min, Point3 bbox_max,
                           const std::function<double(const Point3&)>& field);

  std::size_t size() const noexcept { return dims[0] * dims[1] * dims[2]; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return x + dims[0] * (y + dims[1] * z);
  }
  double at(std::size_t x, std::size_t y, std::size_t z) const { return values[index(x, y, z)]; }
  Point3 position(std::size_t x, std::size_t y, std::size_t z) const;
  double spacing(int axis) const;

  void validate() const;

  /// Raw little-endian float32 values plus a JSON sidecar `<path>.json`
  /// holding dims and bbox.
  void write_raw(const std::string& path) const;
  static ScalarGrid read_raw(const std::string& path);
};

struct TriMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  bool empty() const noexcept { return triangles.empty(); }
  double area() const;
  /// ASCII OBJ with `v` and `f` records, 1-based indices.
  void write_obj(const std::string& path) const;
};

/// Isosurface extraction with the classic 256-entry case table and linear
/// edge interpolation (t clamped to [0,1]). Vertices on shared lattice edges
/// are shared between cells; zero-area triangles are dropped. Triangles come
/// out in cell-index order.
TriMesh marching_cubes(const ScalarGrid& grid, double iso = 0.0);

/// |{a < iso} ∩ {b < iso}| / |{a < iso} ∪ {b < iso}|; 1 when both are empty.
double iou(const ScalarGrid& a, const ScalarGrid& b, double iso = 0.0);

/// Area-weighted uniform samples on the mesh surface.
std::vector<Point3> sample_surface(const TriMesh& mesh, std::size_t count, CounterRng& rng);

/// Symmetric mean squared nearest-neighbour distance,
/// ½·mean_a min_b ‖a−b‖² + ½·mean_b min_a ‖a−b‖².
/// Brute force up to kChamferBruteForceLimit points per set, grid buckets above.
double chamfer(const std::vector<Point3>& a, const std::vector<Point3>& b);

inline constexpr std::size_t kChamferBruteForceLimit = 10000;

enum class NearestNeighbour { kBruteForce, kBuckets };
/// Same as chamfer() with the search strategy forced.
double chamfer(const std::vector<Point3>& a, const std::vector<Point3>& b, NearestNeighbour strategy);

struct RaySample {
  std::array<double, 3> color{0.0, 0.0, 0.0};  ///< each channel in [0, 1]
  double density = 0.0;                        ///< σ ≥ 0
  double delta = 0.0;                          ///< spacing to the next sample, > 0
};

/// Samples ordered front to back along one ray.
using RaySamples = std::vector<RaySample>;

/// Per-sample compositing weights T_i·(1 − exp(−σ_i δ_i)) with
/// T_i = exp(−Σ_{j<i} σ_j δ_j).
std::vector<double> composite_weights(const RaySamples& samples);
/// C = Σ_i T_i (1 − exp(−σ_i δ_i)) c_i.
std::array<double, 3> composite_ray(const RaySamples& samples);

}  // namespace finer
