#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deformloc {

class Rng;

/// Cartesian point/vector in millimeters. The world frame is right-handed
/// with +Z toward the camera ("superior") and -Z toward the table
/// ("posterior").
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double px, double py, double pz) : x(px), y(py), z(pz) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double squared_norm() const { return dot(*this); }
  double norm() const { return std::sqrt(squared_norm()); }
  Vec3 normalized() const { return *this / norm(); }

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
  static Vec3 min(const Vec3& a, const Vec3& b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
  }
  static Vec3 max(const Vec3& a, const Vec3& b) {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
  }
};

using Point3 = Vec3;

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Axis-aligned bounding box.
struct Aabb {
  Vec3 min, max;

  Vec3 center() const { return (min + max) * 0.5; }
  Vec3 extent() const { return max - min; }
  double longest_axis() const {
    Vec3 e = extent();
    return std::max(e.x, std::max(e.y, e.z));
  }
  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
           p.z >= min.z && p.z <= max.z;
  }
  /// Grow every axis range by `frac` of its own length, about the center.
  Aabb dilated(double frac) const;
  /// Expand every axis to the longest axis length, about the center.
  Aabb cubified() const;
  Aabb united(const Aabb& o) const {
    return {Vec3::min(min, o.min), Vec3::max(max, o.max)};
  }
};

/// 3x3 rotation/linear map, row-major.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }
  Vec3 apply(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 mul(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += m[3 * i + k] * o.m[3 * k + j];
        r.m[3 * i + j] = s;
      }
    return r;
  }
  Mat3 transposed() const {
    return Mat3{{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
  }
  double det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
  static Mat3 rot_x(double rad);
  static Mat3 rot_y(double rad);
  static Mat3 rot_z(double rad);
};

/// Rigid transform p_world = R * p_local + t.
struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  Vec3 apply(const Vec3& p) const { return rotation.apply(p) + translation; }
  Vec3 apply_vector(const Vec3& v) const { return rotation.apply(v); }
  RigidTransform inverse() const {
    Mat3 rt = rotation.transposed();
    return {rt, -rt.apply(translation)};
  }
};

/// Indexed triangle mesh. Construction-time invariants: at least one
/// triangle, all indices in range, no zero-area triangle.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  /// Throws InvalidGeometry when an invariant is broken.
  void validate() const;

  Aabb bounds() const;
  double area() const;
  double triangle_area(int t) const;
  /// Divergence-theorem volume; positive for outward-oriented closed meshes.
  double signed_volume() const;
  /// True iff every edge is shared by exactly two triangles.
  bool closed() const;
};

/// Kidney plus tumors; the label space is 0 = outside, 1 = kidney,
/// 1+k = tumor k (1-based).
struct Scene {
  TriangleMesh kidney;
  std::vector<TriangleMesh> tumors;

  int class_count() const { return 2 + static_cast<int>(tumors.size()); }
  Aabb bounds() const;
  const TriangleMesh& mesh(int i) const {  // 0 = kidney, 1.. = tumors
    return i == 0 ? kidney : tumors[static_cast<size_t>(i - 1)];
  }
  int mesh_count() const { return 1 + static_cast<int>(tumors.size()); }
  template <typename F>
  void transform_vertices(F&& f) {
    for (auto& v : kidney.vertices) v = f(v);
    for (auto& t : tumors)
      for (auto& v : t.vertices) v = f(v);
  }
  /// Rotate all meshes about a pivot (the usual pivot is bounds().center()).
  void rotate(const Mat3& r, const Vec3& pivot);
};

struct HausdorffResult {
  double directed_ab = 0.0;
  double directed_ba = 0.0;
  double symmetric = 0.0;
};

/// Interior test by ray-crossing parity with a randomized direction,
/// re-drawn when a hit lands within 1e-9 (barycentric) of a triangle edge.
/// Deterministic: the direction sequence is derived from the point bits.
/// strict=true first verifies the mesh is closed (throws NonClosedMesh).
bool point_in_mesh(const Vec3& p, const TriangleMesh& mesh, bool strict = false);

/// Directed and symmetric Hausdorff distances between point sets (mm).
HausdorffResult hausdorff(std::span<const Vec3> a, std::span<const Vec3> b);

/// Componentwise min/max box; throws EmptySet on empty input.
Aabb aabb(std::span<const Vec3> points);

/// Keep edge-connected components with at least `min_triangles` triangles;
/// vertices are compacted. Throws AllComponentsRemoved when nothing is left.
TriangleMesh filter_connected_components(const TriangleMesh& mesh,
                                         int min_triangles);

/// Area-uniform surface sampling, deterministic per seed.
std::vector<Vec3> sample_surface(const TriangleMesh& mesh, int n, uint64_t seed);

struct RayHit {
  double t = 0.0;
  int triangle = -1;
};

/// BVH-accelerated queries against one mesh. Shares the exact containment
/// semantics of point_in_mesh (same direction sequence, same ambiguity rule).
class MeshQuery {
 public:
  explicit MeshQuery(const TriangleMesh& mesh);
  ~MeshQuery();
  MeshQuery(MeshQuery&&) noexcept;
  MeshQuery& operator=(MeshQuery&&) noexcept;
  MeshQuery(const MeshQuery&) = delete;
  MeshQuery& operator=(const MeshQuery&) = delete;

  bool contains(const Vec3& p) const;
  /// Nearest intersection with t > 0 along an (unnormalized) direction;
  /// t is in units of |dir|.
  std::optional<RayHit> first_hit(const Vec3& origin, const Vec3& dir) const;
  /// Distance from p to the surface.
  double distance(const Vec3& p) const;
  bool closed() const;
  const Aabb& bounds() const;
  int triangle_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// kd-tree over a point set for nearest-neighbor queries.
class PointIndex {
 public:
  explicit PointIndex(std::span<const Vec3> points);
  ~PointIndex();
  PointIndex(PointIndex&&) noexcept;
  PointIndex& operator=(PointIndex&&) noexcept;
  PointIndex(const PointIndex&) = delete;
  PointIndex& operator=(const PointIndex&) = delete;

  double nearest_squared(const Vec3& p) const;
  size_t size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Unit icosphere subdivided `level` times, scaled to the given semi-axes
/// and translated to `center`. level 0 = icosahedron (20 triangles).
TriangleMesh make_ellipsoid(const Vec3& center, const Vec3& semi_axes,
                            int level);

/// Uniform direction on the unit sphere.
Vec3 random_unit_vector(Rng& rng);

}  // namespace deformloc
