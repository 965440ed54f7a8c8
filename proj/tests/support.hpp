#pragma once

// Shared helpers and independent oracles for the test suites. Oracles here
// deliberately avoid the library's accelerated code paths.

#include <algorithm>
#include <cmath>
#include <vector>

#include "deformloc/geometry.hpp"
#include "deformloc/rng.hpp"

namespace testutil {

using deformloc::Rng;
using deformloc::TriangleMesh;
using deformloc::Vec3;

inline TriangleMesh make_cube(const Vec3& lo, const Vec3& hi) {
  TriangleMesh m;
  m.vertices = {{lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z},
                {lo.x, hi.y, lo.z}, {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z},
                {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z}};
  m.triangles = {{0, 2, 1}, {0, 3, 2},   // bottom (z = lo)
                 {4, 5, 6}, {4, 6, 7},   // top
                 {0, 1, 5}, {0, 5, 4},   // front (y = lo)
                 {2, 3, 7}, {2, 7, 6},   // back
                 {1, 2, 6}, {1, 6, 5},   // right (x = hi)
                 {3, 0, 4}, {3, 4, 7}};  // left
  return m;
}

inline Vec3 random_point(Rng& rng, const Vec3& lo, const Vec3& hi) {
  return {rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y), rng.uniform(lo.z, hi.z)};
}

inline Vec3 random_unit(Rng& rng) {
  for (;;) {
    Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    double n = v.squared_norm();
    if (n > 1e-6 && n < 1.0) return v / std::sqrt(n);
  }
}

// Plain Möller-Trumbore, written independently of src/geometry.cpp.
// `edge_eps` widens the barycentric bounds so rays aimed exactly at a vertex
// register a hit on its fan.
inline bool oracle_ray_tri(const Vec3& o, const Vec3& d, const Vec3& a,
                           const Vec3& b, const Vec3& c, double& t,
                           double edge_eps = 1e-9) {
  Vec3 e1 = b - a, e2 = c - a;
  Vec3 p = d.cross(e2);
  double det = e1.dot(p);
  if (std::fabs(det) < 1e-13) return false;
  Vec3 s = o - a;
  double u = s.dot(p) / det;
  if (u < -edge_eps || u > 1 + edge_eps) return false;
  Vec3 q = s.cross(e1);
  double v = d.dot(q) / det;
  if (v < -edge_eps || u + v > 1 + edge_eps) return false;
  t = e2.dot(q) / det;
  return t > 1e-9;
}

// Majority vote of crossing parity over k random ray directions.
inline bool oracle_point_in_mesh(const Vec3& p, const TriangleMesh& mesh,
                                 Rng& rng, int k = 5) {
  int inside_votes = 0;
  for (int i = 0; i < k; ++i) {
    Vec3 d = random_unit(rng);
    int crossings = 0;
    for (const auto& tr : mesh.triangles) {
      double t;
      if (oracle_ray_tri(p, d, mesh.vertices[size_t(tr[0])],
                         mesh.vertices[size_t(tr[1])],
                         mesh.vertices[size_t(tr[2])], t))
        ++crossings;
    }
    inside_votes += crossings % 2;
  }
  return inside_votes * 2 > k;
}

// O(n^2) directed Hausdorff.
inline double oracle_directed_hausdorff(const std::vector<Vec3>& a,
                                        const std::vector<Vec3>& b) {
  double worst = 0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) best = std::min(best, (p - q).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

// Divergence-theorem volume, independent implementation.
inline double oracle_mesh_volume(const TriangleMesh& m) {
  double v = 0;
  for (const auto& tr : m.triangles) {
    const Vec3& a = m.vertices[size_t(tr[0])];
    const Vec3& b = m.vertices[size_t(tr[1])];
    const Vec3& c = m.vertices[size_t(tr[2])];
    v += a.dot(b.cross(c)) / 6.0;
  }
  return std::fabs(v);
}

// Brute-force point-to-mesh distance.
inline double oracle_point_mesh_distance(const Vec3& p, const TriangleMesh& m) {
  auto closest = [&](const Vec3& a, const Vec3& b, const Vec3& c) {
    // project on plane, clamp (coarse but adequate: subdivide edges)
    double best = std::min({(p - a).norm(), (p - b).norm(), (p - c).norm()});
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; i + j <= 20; ++j) {
        double u = i / 20.0, v = j / 20.0;
        Vec3 q = a + (b - a) * u + (c - a) * v;
        best = std::min(best, (p - q).norm());
      }
    return best;
  };
  double best = std::numeric_limits<double>::infinity();
  for (const auto& tr : m.triangles)
    best = std::min(best, closest(m.vertices[size_t(tr[0])],
                                  m.vertices[size_t(tr[1])],
                                  m.vertices[size_t(tr[2])]));
  return best;
}

}  // namespace testutil
