#pragma once

#include <memory>
#include <optional>
#include <string>

#include "finer/geometry.hpp"
#include "finer/optim.hpp"
#include "finer/rng.hpp"

namespace finer {

/// Analytic signed-distance oracle on [-1,1]³: negative inside, positive outside.
class SdfTarget {
 public:
  virtual ~SdfTarget() = default;
  virtual double distance(const Point3& p) const = 0;
  /// A uniformly-ish distributed point on the zero level set, if the shape
  /// can produce one.
  virtual std::optional<Point3> surface_point(CounterRng& rng) const {
    (void)rng;
    return std::nullopt;
  }
  virtual std::string name() const = 0;
};

class SphereSdf final : public SdfTarget {
 public:
  explicit SphereSdf(double radius = 1.0, Point3 center = {0.0, 0.0, 0.0});
  double distance(const Point3& p) const override;
  std::optional<Point3> surface_point(CounterRng& rng) const override;
  std::string name() const override { return "sphere"; }
  double radius() const noexcept { return radius_; }

 private:
  double radius_;
  Point3 center_;
};

/// Torus around the z axis.
class TorusSdf final : public SdfTarget {
 public:
  TorusSdf(double major = 0.6, double minor = 0.25);
  double distance(const Point3& p) const override;
  std::optional<Point3> surface_point(CounterRng& rng) const override;
  std::string name() const override { return "torus"; }

 private:
  double major_;
  double minor_;
};

/// Axis-aligned box centred at the origin (exact distance inside and out).
class BoxSdf final : public SdfTarget {
 public:
  explicit BoxSdf(Point3 half_extents = {0.5, 0.4, 0.3});
  double distance(const Point3& p) const override;
  std::optional<Point3> surface_point(CounterRng& rng) const override;
  std::string name() const override { return "box"; }

 private:
  Point3 half_;
};

/// Half-space n·p − offset with unit normal n.
class PlaneSdf final : public SdfTarget {
 public:
  explicit PlaneSdf(Point3 normal = {0.0, 0.0, 1.0}, double offset = 0.0);
  double distance(const Point3& p) const override;
  std::optional<Point3> surface_point(CounterRng& rng) const override;
  std::string name() const override { return "plane"; }

 private:
  Point3 normal_;
  double offset_;
};

/// "sphere", "torus", "box" or "plane" with default parameters.
std::unique_ptr<SdfTarget> make_sdf(const std::string& shape);

enum class SdfSampling {
  kUniform,  ///< uniform in [-1,1]³
  kMixed,    ///< half uniform, half surface points + N(0, σ²) offsets (uniform if no surface points)
};

struct SdfSamplingOptions {
  SdfSampling strategy = SdfSampling::kMixed;
  double surface_sigma = 0.05;
};

/// B coordinates in [-1,1]³ with their oracle distances as targets.
SampleBatch sample_sdf(const SdfTarget& target, std::size_t count, const SdfSamplingOptions& options,
                       CounterRng& rng);

/// The oracle sampled on a lattice over [-1,1]³.
ScalarGrid sdf_grid(const SdfTarget& target, std::size_t resolution);

}  // namespace finer
