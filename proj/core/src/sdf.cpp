#include "finer/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "finer/errors.hpp"

namespace finer {
namespace {

double norm(const Point3& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); }

Point3 random_direction(CounterRng& rng) {
  for (;;) {
    const Point3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = norm(v);
    if (n > 1e-12) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

}  // namespace

SphereSdf::SphereSdf(double radius, Point3 center) : radius_(radius), center_(center) {
  FINER_REQUIRE(radius > 0.0, "SphereSdf: radius must be positive");
}

double SphereSdf::distance(const Point3& p) const {
  return norm({p[0] - center_[0], p[1] - center_[1], p[2] - center_[2]}) - radius_;
}

std::optional<Point3> SphereSdf::surface_point(CounterRng& rng) const {
  const Point3 d = random_direction(rng);
  return Point3{center_[0] + radius_ * d[0], center_[1] + radius_ * d[1], center_[2] + radius_ * d[2]};
}

TorusSdf::TorusSdf(double major, double minor) : major_(major), minor_(minor) {
  FINER_REQUIRE(major > minor && minor > 0.0, "TorusSdf: need major > minor > 0");
}

double TorusSdf::distance(const Point3& p) const {
  const double q = std::hypot(p[0], p[1]) - major_;
  return std::hypot(q, p[2]) - minor_;
}

std::optional<Point3> TorusSdf::surface_point(CounterRng& rng) const {
  // Rejection on the tube angle gives an area-uniform point.
  for (;;) {
    const double u = 2.0 * std::numbers::pi * rng.uniform();
    const double v = 2.0 * std::numbers::pi * rng.uniform();
    const double w = rng.uniform();
    if (w * (major_ + minor_) > major_ + minor_ * std::cos(v)) continue;
    const double r = major_ + minor_ * std::cos(v);
    return Point3{r * std::cos(u), r * std::sin(u), minor_ * std::sin(v)};
  }
}

BoxSdf::BoxSdf(Point3 half_extents) : half_(half_extents) {
  for (double h : half_) FINER_REQUIRE(h > 0.0, "BoxSdf: half extents must be positive");
}

double BoxSdf::distance(const Point3& p) const {
  Point3 q;
  for (std::size_t a = 0; a < 3; ++a) q[a] = std::abs(p[a]) - half_[a];
  const Point3 outside{std::max(q[0], 0.0), std::max(q[1], 0.0), std::max(q[2], 0.0)};
  return norm(outside) + std::min(std::max({q[0], q[1], q[2]}), 0.0);
}

std::optional<Point3> BoxSdf::surface_point(CounterRng& rng) const {
  const double areas[3] = {half_[1] * half_[2], half_[0] * half_[2], half_[0] * half_[1]};
  const double total = areas[0] + areas[1] + areas[2];
  double u = rng.uniform() * total;
  std::size_t axis = 0;
  while (axis < 2 && u >= areas[axis]) u -= areas[axis++];
  Point3 p;
  for (std::size_t a = 0; a < 3; ++a) p[a] = rng.uniform(-half_[a], half_[a]);
  p[axis] = rng.uniform() < 0.5 ? -half_[axis] : half_[axis];
  return p;
}

PlaneSdf::PlaneSdf(Point3 normal, double offset) : offset_(offset) {
  const double n = norm(normal);
  FINER_REQUIRE(n > 0.0, "PlaneSdf: zero normal");
  normal_ = {normal[0] / n, normal[1] / n, normal[2] / n};
}

double PlaneSdf::distance(const Point3& p) const {
  return normal_[0] * p[0] + normal_[1] * p[1] + normal_[2] * p[2] - offset_;
}

std::optional<Point3> PlaneSdf::surface_point(CounterRng& rng) const {
  Point3 p{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  const double d = distance(p);
  for (std::size_t a = 0; a < 3; ++a) p[a] -= d * normal_[a];
  return p;
}

std::unique_ptr<SdfTarget> make_sdf(const std::string& shape) {
  if (shape == "sphere") return std::make_unique<SphereSdf>();
  if (shape == "torus") return std::make_unique<TorusSdf>();
  if (shape == "box") return std::make_unique<BoxSdf>();
  if (shape == "plane") return std::make_unique<PlaneSdf>();
  throw ContractViolation("unknown SDF shape '" + shape + "'");
}

SampleBatch sample_sdf(const SdfTarget& target, std::size_t count, const SdfSamplingOptions& options,
                       CounterRng& rng) {
  FINER_REQUIRE(options.surface_sigma >= 0.0, "sample_sdf: surface sigma must be non-negative");
  SampleBatch batch{Matrix(count, 3), Matrix(count, 1)};
  for (std::size_t i = 0; i < count; ++i) {
    Point3 p;
    std::optional<Point3> s;
    if (options.strategy == SdfSampling::kMixed && (i & 1) == 1) s = target.surface_point(rng);
    if (s) {
      for (std::size_t a = 0; a < 3; ++a) p[a] = std::clamp((*s)[a] + options.surface_sigma * rng.normal(), -1.0, 1.0);
    } else {
      for (std::size_t a = 0; a < 3; ++a) p[a] = rng.uniform(-1.0, 1.0);
    }
    for (std::size_t a = 0; a < 3; ++a) batch.coords(i, a) = p[a];
    batch.targets(i, 0) = target.distance(p);
  }
  return batch;
}

ScalarGrid sdf_grid(const SdfTarget& target, std::size_t resolution) {
  return ScalarGrid::sample({resolution, resolution, resolution}, {-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0},
                            [&](const Point3& p) { return target.distance(p); });
}

}  // namespace finer
