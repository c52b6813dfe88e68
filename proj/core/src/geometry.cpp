#include "finer/geometry.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "finer/errors.hpp"

namespace finer {

ScalarGrid::ScalarGrid(std::array<std::size_t, 3> dims_, Point3 bbox_min_, Point3 bbox_max_)
    : dims(dims_), bbox_min(bbox_min_), bbox_max(bbox_max_) {
  FINER_REQUIRE(dims[0] >= 2 && dims[1] >= 2 && dims[2] >= 2, "ScalarGrid: every dimension must be >= 2");
  for (int a = 0; a < 3; ++a)
    FINER_REQUIRE(bbox_max[static_cast<std::size_t>(a)] > bbox_min[static_cast<std::size_t>(a)],
                  "ScalarGrid: empty bounding box");
  values.assign(size(), 0.0);
}

ScalarGrid ScalarGrid::sample(std::array<std::size_t, 3> dims, Point3 bbox_min, Point3 bbox_max,
                              const std::function<double(const Point3&)>& field) {
  ScalarGrid g(dims, bbox_min, bbox_max);
  for (std::size_t z = 0; z < dims[2]; ++z)
    for (std::size_t y = 0; y < dims[1]; ++y)
      for (std::size_t x = 0; x < dims[0]; ++x) g.values[g.index(x, y, z)] = field(g.position(x, y, z));
  return g;
}

double ScalarGrid::spacing(int axis) const {
  const auto a = static_cast<std::size_t>(axis);
  return (bbox_max[a] - bbox_min[a]) / static_cast<double>(dims[a] - 1);
}

Point3 ScalarGrid::position(std::size_t x, std::size_t y, std::size_t z) const {
  const std::size_t idx[3] = {x, y, z};
  Point3 p;
  for (std::size_t a = 0; a < 3; ++a) {
    // Exact endpoints; interior points by linear interpolation.
    const double t = static_cast<double>(idx[a]) / static_cast<double>(dims[a] - 1);
    p[a] = idx[a] + 1 == dims[a] ? bbox_max[a] : bbox_min[a] + t * (bbox_max[a] - bbox_min[a]);
  }
  return p;
}

void ScalarGrid::validate() const {
  FINER_REQUIRE(dims[0] >= 2 && dims[1] >= 2 && dims[2] >= 2, "ScalarGrid: every dimension must be >= 2");
  FINER_REQUIRE(values.size() == size(), "ScalarGrid: value count does not match dims");
}

void ScalarGrid::write_raw(const std::string& path) const {
  validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  static_assert(std::endian::native == std::endian::little, "raw grids are written little-endian");
  for (double v : values) {
    const float fv = static_cast<float>(v);
    f.write(reinterpret_cast<const char*>(&fv), sizeof fv);
  }
  nlohmann::ordered_json side;
  side["dims"] = {dims[0], dims[1], dims[2]};
  side["bbox_min"] = {bbox_min[0], bbox_min[1], bbox_min[2]};
  side["bbox_max"] = {bbox_max[0], bbox_max[1], bbox_max[2]};
  side["dtype"] = "float32";
  side["order"] = "x-fastest";
  side["endianness"] = "little";
  std::ofstream s(path + ".json");
  if (!s) throw IoError("cannot write " + path + ".json");
  s << side.dump(2) << '\n';
}

ScalarGrid ScalarGrid::read_raw(const std::string& path) {
  std::ifstream s(path + ".json");
  if (!s) throw IoError("cannot open " + path + ".json");
  nlohmann::json side;
  try {
    s >> side;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ".json: " + e.what());
  }
  ScalarGrid g({side.at("dims")[0].get<std::size_t>(), side.at("dims")[1].get<std::size_t>(),
                side.at("dims")[2].get<std::size_t>()},
               {side.at("bbox_min")[0].get<double>(), side.at("bbox_min")[1].get<double>(),
                side.at("bbox_min")[2].get<double>()},
               {side.at("bbox_max")[0].get<double>(), side.at("bbox_max")[1].get<double>(),
                side.at("bbox_max")[2].get<double>()});
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  for (double& v : g.values) {
    float fv = 0.0f;
    if (!f.read(reinterpret_cast<char*>(&fv), sizeof fv)) throw IoError(path + ": truncated grid");
    v = fv;
  }
  return g;
}

double TriMesh::area() const {
  double total = 0.0;
  for (const auto& t : triangles) {
    const Point3& a = vertices[t[0]];
    const Point3& b = vertices[t[1]];
    const Point3& c = vertices[t[2]];
    const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
    const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
    total += 0.5 * std::sqrt((uy * vz - uz * vy) * (uy * vz - uz * vy) + (uz * vx - ux * vz) * (uz * vx - ux * vz) +
                             (ux * vy - uy * vx) * (ux * vy - uy * vx));
  }
  return total;
}

void TriMesh::write_obj(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  char buf[128];
  for (const auto& v : vertices) {
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", v[0], v[1], v[2]);
    f << buf;
  }
  for (const auto& t : triangles) f << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

double iou(const ScalarGrid& a, const ScalarGrid& b, double iso) {
  a.validate();
  b.validate();
  FINER_REQUIRE(a.dims == b.dims && a.bbox_min == b.bbox_min && a.bbox_max == b.bbox_max,
                "iou: grids differ in dims or bounding box");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const bool ia = a.values[i] < iso;
    const bool ib = b.values[i] < iso;
    inter += (ia && ib) ? 1 : 0;
    uni += (ia || ib) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<Point3> sample_surface(const TriMesh& mesh, std::size_t count, CounterRng& rng) {
  FINER_REQUIRE(!mesh.empty(), "sample_surface: empty mesh");
  std::vector<double> cdf;
  cdf.reserve(mesh.triangles.size());
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    TriMesh one;
    one.vertices = {mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
    one.triangles = {{0, 1, 2}};
    total += one.area();
    cdf.push_back(total);
  }
  std::vector<Point3> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = rng.uniform() * total;
    std::size_t k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    k = std::min(k, cdf.size() - 1);
    const auto& t = mesh.triangles[k];
    double r1 = rng.uniform();
    double r2 = rng.uniform();
    if (r1 + r2 > 1.0) {
      r1 = 1.0 - r1;
      r2 = 1.0 - r2;
    }
    Point3 p;
    for (std::size_t a = 0; a < 3; ++a) {
      const double v0 = mesh.vertices[t[0]][a];
      p[a] = v0 + r1 * (mesh.vertices[t[1]][a] - v0) + r2 * (mesh.vertices[t[2]][a] - v0);
    }
    out.push_back(p);
  }
  return out;
}

namespace {

inline double dist2(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

double mean_nearest_brute(const std::vector<Point3>& from, const std::vector<Point3>& to) {
  double sum = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) best = std::min(best, dist2(p, q));
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

class BucketGrid {
 public:
  explicit BucketGrid(const std::vector<Point3>& points) : points_(points) {
    lo_ = hi_ = points.front();
    for (const auto& p : points)
      for (std::size_t a = 0; a < 3; ++a) {
        lo_[a] = std::min(lo_[a], p[a]);
        hi_[a] = std::max(hi_[a], p[a]);
      }
    double extent = 0.0;
    for (std::size_t a = 0; a < 3; ++a) extent = std::max(extent, hi_[a] - lo_[a]);
    const double per_axis = std::max(1.0, std::cbrt(static_cast<double>(points.size()) / 2.0));
    cell_ = extent > 0.0 ? extent / per_axis : 1.0;
    for (std::size_t a = 0; a < 3; ++a)
      n_[a] = static_cast<std::size_t>(std::floor((hi_[a] - lo_[a]) / cell_)) + 1;

    std::vector<std::size_t> counts(n_[0] * n_[1] * n_[2] + 1, 0);
    for (const auto& p : points) ++counts[flat(cell_of(p)) + 1];
    for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
    start_ = counts;
    order_.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) order_[counts[flat(cell_of(points[i]))]++] = i;
  }

  double nearest2(const Point3& q) const {
    std::array<long, 3> c;
    for (std::size_t a = 0; a < 3; ++a) {
      const double f = std::floor((q[a] - lo_[a]) / cell_);
      c[a] = static_cast<long>(std::clamp(f, -1.0, static_cast<double>(n_[a])));
    }
    double best = std::numeric_limits<double>::infinity();
    const long max_ring = static_cast<long>(std::max({n_[0], n_[1], n_[2]})) + 2;
    for (long r = 0; r <= max_ring; ++r) {
      for (long z = c[2] - r; z <= c[2] + r; ++z) {
        for (long y = c[1] - r; y <= c[1] + r; ++y) {
          for (long x = c[0] - r; x <= c[0] + r; ++x) {
            const bool on_shell = std::abs(x - c[0]) == r || std::abs(y - c[1]) == r || std::abs(z - c[2]) == r;
            if (!on_shell) continue;
            if (x < 0 || y < 0 || z < 0 || x >= static_cast<long>(n_[0]) || y >= static_cast<long>(n_[1]) ||
                z >= static_cast<long>(n_[2]))
              continue;
            const std::size_t cell = flat({static_cast<std::size_t>(x), static_cast<std::size_t>(y),
                                           static_cast<std::size_t>(z)});
            for (std::size_t k = start_[cell]; k < start_[cell + 1]; ++k)
              best = std::min(best, dist2(q, points_[order_[k]]));
          }
        }
      }
      // Everything not yet visited lies outside the (2r+1)^3 block around c.
      double gap = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < 3; ++a) {
        const double block_lo = lo_[a] + static_cast<double>(c[a] - r) * cell_;
        const double block_hi = lo_[a] + static_cast<double>(c[a] + r + 1) * cell_;
        gap = std::min({gap, q[a] - block_lo, block_hi - q[a]});
      }
      gap = std::max(gap, 0.0);
      if (best < gap * gap * (1.0 - 1e-9)) break;
    }
    return best;
  }

 private:
  std::array<std::size_t, 3> cell_of(const Point3& p) const {
    std::array<std::size_t, 3> c;
    for (std::size_t a = 0; a < 3; ++a) {
      const auto i = static_cast<std::size_t>(std::max(0.0, std::floor((p[a] - lo_[a]) / cell_)));
      c[a] = std::min(i, n_[a] - 1);
    }
    return c;
  }
  std::size_t flat(const std::array<std::size_t, 3>& c) const { return c[0] + n_[0] * (c[1] + n_[1] * c[2]); }

  const std::vector<Point3>& points_;
  Point3 lo_{}, hi_{};
  double cell_ = 1.0;
  std::array<std::size_t, 3> n_{1, 1, 1};
  std::vector<std::size_t> start_;
  std::vector<std::size_t> order_;
};

double mean_nearest_buckets(const std::vector<Point3>& from, const std::vector<Point3>& to) {
  const BucketGrid grid(to);
  double sum = 0.0;
  for (const auto& p : from) sum += grid.nearest2(p);
  return sum / static_cast<double>(from.size());
}

}  // namespace

double chamfer(const std::vector<Point3>& a, const std::vector<Point3>& b, NearestNeighbour strategy) {
  FINER_REQUIRE(!a.empty() && !b.empty(), "chamfer: point sets must be non-empty");
  if (strategy == NearestNeighbour::kBruteForce)
    return 0.5 * mean_nearest_brute(a, b) + 0.5 * mean_nearest_brute(b, a);
  return 0.5 * mean_nearest_buckets(a, b) + 0.5 * mean_nearest_buckets(b, a);
}

double chamfer(const std::vector<Point3>& a, const std::vector<Point3>& b) {
  const bool small = a.size() <= kChamferBruteForceLimit && b.size() <= kChamferBruteForceLimit;
  return chamfer(a, b, small ? NearestNeighbour::kBruteForce : NearestNeighbour::kBuckets);
}

std::vector<double> composite_weights(const RaySamples& samples) {
  for (const auto& s : samples) {
    FINER_REQUIRE(std::isfinite(s.density) && s.density >= 0.0, "composite_ray: density must be non-negative");
    FINER_REQUIRE(std::isfinite(s.delta) && s.delta > 0.0, "composite_ray: spacing must be positive");
    for (double c : s.color) FINER_REQUIRE(c >= 0.0 && c <= 1.0, "composite_ray: color outside [0, 1]");
  }
  std::vector<double> w;
  w.reserve(samples.size());
  double optical_depth = 0.0;  // Σ_{j<i} σ_j δ_j
  for (const auto& s : samples) {
    const double tau = s.density * s.delta;
    const double transmittance = std::exp(-optical_depth);
    w.push_back(transmittance * -std::expm1(-tau));
    optical_depth += tau;
  }
  return w;
}

std::array<double, 3> composite_ray(const RaySamples& samples) {
  const auto w = composite_weights(samples);
  std::array<double, 3> c{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t ch = 0; ch < 3; ++ch) c[ch] += w[i] * samples[i].color[ch];
  for (double& v : c) v = std::clamp(v, 0.0, 1.0);
  return c;
}

}  // namespace finer
