#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "finer/errors.hpp"
#include "finer/geometry.hpp"
#include "mc_tables.hpp"

namespace finer {
namespace {

constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

// Each cube edge as (lower corner, axis) so neighbouring cells agree on keys.
struct EdgeRef {
  int corner;
  int axis;
};
constexpr EdgeRef kEdge[12] = {{0, 0}, {1, 1}, {3, 0}, {0, 1}, {4, 0}, {5, 1},
                               {7, 0}, {4, 1}, {0, 2}, {1, 2}, {2, 2}, {3, 2}};

double triangle_area2(const Point3& a, const Point3& b, const Point3& c) {
  const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
  const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
  const double cx = uy * vz - uz * vy;
  const double cy = uz * vx - ux * vz;
  const double cz = ux * vy - uy * vx;
  return cx * cx + cy * cy + cz * cz;
}

}  // namespace

TriMesh marching_cubes(const ScalarGrid& grid, double iso) {
  grid.validate();
  FINER_REQUIRE(std::isfinite(iso), "marching_cubes: iso must be finite");
  for (double v : grid.values) FINER_REQUIRE(std::isfinite(v), "marching_cubes: non-finite grid value");

  const auto [nx, ny, nz] = grid.dims;
  TriMesh mesh;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;

  auto vertex_on_edge = [&](std::size_t x, std::size_t y, std::size_t z, int axis) -> std::uint32_t {
    const std::size_t p = grid.index(x, y, z);
    const std::uint64_t key = static_cast<std::uint64_t>(p) * 3 + static_cast<std::uint64_t>(axis);
    if (auto it = edge_vertex.find(key); it != edge_vertex.end()) return it->second;

    std::size_t x1 = x, y1 = y, z1 = z;
    (axis == 0 ? x1 : axis == 1 ? y1 : z1) += 1;
    const double v0 = grid.values[p];
    const double v1 = grid.values[grid.index(x1, y1, z1)];
    double t = v1 != v0 ? (iso - v0) / (v1 - v0) : 0.5;
    t = std::clamp(t, 0.0, 1.0);
    const Point3 a = grid.position(x, y, z);
    const Point3 b = grid.position(x1, y1, z1);
    Point3 v;
    for (int i = 0; i < 3; ++i) v[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] +
                                                                  t * (b[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)]);
    const auto id = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back(v);
    edge_vertex.emplace(key, id);
    return id;
  };

  for (std::size_t z = 0; z + 1 < nz; ++z) {
    for (std::size_t y = 0; y + 1 < ny; ++y) {
      for (std::size_t x = 0; x + 1 < nx; ++x) {
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          const double v = grid.at(x + kCorner[c][0], y + kCorner[c][1], z + kCorner[c][2]);
          if (v < iso) cube |= 1 << c;
        }
        const unsigned edges = mc::kEdgeTable[static_cast<std::size_t>(cube)];
        if (edges == 0) continue;

        std::uint32_t ids[12] = {};
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1u << e))) continue;
          const auto& ref = kEdge[e];
          ids[e] = vertex_on_edge(x + kCorner[ref.corner][0], y + kCorner[ref.corner][1],
                                  z + kCorner[ref.corner][2], ref.axis);
        }
        const auto& tri = mc::kTriTable[cube];
        for (int i = 0; tri[i] != -1; i += 3) {
          const std::array<std::uint32_t, 3> t{ids[tri[i]], ids[tri[i + 1]], ids[tri[i + 2]]};
          if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
          if (triangle_area2(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) == 0.0) continue;
          mesh.triangles.push_back(t);
        }
      }
    }
  }
  return mesh;
}

}  // namespace finer
