#include "deformloc/geometry.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "deformloc/errors.hpp"
#include "deformloc/rng.hpp"

namespace deformloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

uint64_t double_bits(double v) {
  uint64_t b;
  std::memcpy(&b, &v, sizeof(b));
  return b;
}

uint64_t point_hash(const Vec3& p) {
  return mix64(double_bits(p.x) ^ mix64(double_bits(p.y) ^ mix64(double_bits(p.z))));
}

/// Direction used for parity attempt `attempt` on point p. Both the naive
/// and the BVH containment paths use this same sequence.
Vec3 parity_direction(const Vec3& p, int attempt) {
  Rng rng(derive_seed(point_hash(p), 0xD14ull, static_cast<uint64_t>(attempt)));
  return random_unit_vector(rng);
}

struct TriHit {
  double t, u, v;
};

/// Möller-Trumbore. Returns false for parallel rays and out-of-triangle
/// intersections; `hit` is valid only on true.
bool ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b,
                  const Vec3& c, TriHit& hit) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pv = d.cross(e2);
  const double det = e1.dot(pv);
  if (std::abs(det) < 1e-14) return false;
  const double inv = 1.0 / det;
  const Vec3 tv = o - a;
  const double u = tv.dot(pv) * inv;
  if (u < -1e-9 || u > 1.0 + 1e-9) return false;
  const Vec3 qv = tv.cross(e1);
  const double v = d.dot(qv) * inv;
  if (v < -1e-9 || u + v > 1.0 + 1e-9) return false;
  hit = {e2.dot(qv) * inv, u, v};
  return true;
}

constexpr double kEdgeEps = 1e-9;   // barycentric distance to an edge
constexpr double kTMin = 1e-9;      // mm along a unit-length ray

enum class Parity { inside, outside, ambiguous };

/// Classify one parity attempt given all intersections of the ray.
template <typename TriRange>
Parity classify_parity(const Vec3& p, const Vec3& dir, const TriRange& tris) {
  int crossings = 0;
  bool ambiguous = false;
  tris(p, dir, [&](const Vec3& a, const Vec3& b, const Vec3& c) {
    TriHit h;
    if (!ray_triangle(p, dir, a, b, c, h)) return;
    if (h.t <= kTMin) {
      if (h.t > -kTMin) ambiguous = true;  // grazing the query point
      return;
    }
    if (h.u < kEdgeEps || h.v < kEdgeEps || h.u + h.v > 1.0 - kEdgeEps)
      ambiguous = true;
    ++crossings;
  });
  if (ambiguous) return Parity::ambiguous;
  return (crossings % 2 == 1) ? Parity::inside : Parity::outside;
}

template <typename TriRange>
bool parity_contains(const Vec3& p, const TriRange& tris) {
  Parity last = Parity::outside;
  for (int attempt = 0; attempt < 32; ++attempt) {
    Vec3 dir = parity_direction(p, attempt);
    last = classify_parity(p, dir, tris);
    if (last != Parity::ambiguous) return last == Parity::inside;
  }
  // Every attempt grazed an edge or the surface; the point is within
  // tolerance of the boundary and either answer is acceptable. Count one
  // more time, taking ambiguous hits as crossings.
  Vec3 dir = parity_direction(p, 32);
  int crossings = 0;
  tris(p, dir, [&](const Vec3& a, const Vec3& b, const Vec3& c) {
    TriHit h;
    if (ray_triangle(p, dir, a, b, c, h) && h.t > kTMin) ++crossings;
  });
  return crossings % 2 == 1;
}

uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
         static_cast<uint32_t>(b);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[b] = a;
  }
};

// ---- closest point on triangle (Ericson, Real-Time Collision Detection) ----
Vec3 closest_point_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                            const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

}  // namespace

// ---------------------------------------------------------------------------
// Aabb / Mat3
// ---------------------------------------------------------------------------

Aabb Aabb::dilated(double frac) const {
  Vec3 pad = extent() * (0.5 * frac);
  return {min - pad, max + pad};
}

Aabb Aabb::cubified() const {
  double half = 0.5 * longest_axis();
  Vec3 c = center();
  return {{c.x - half, c.y - half, c.z - half}, {c.x + half, c.y + half, c.z + half}};
}

Mat3 Mat3::rot_x(double r) {
  double c = std::cos(r), s = std::sin(r);
  return Mat3{{1, 0, 0, 0, c, -s, 0, s, c}};
}
Mat3 Mat3::rot_y(double r) {
  double c = std::cos(r), s = std::sin(r);
  return Mat3{{c, 0, s, 0, 1, 0, -s, 0, c}};
}
Mat3 Mat3::rot_z(double r) {
  double c = std::cos(r), s = std::sin(r);
  return Mat3{{c, -s, 0, s, c, 0, 0, 0, 1}};
}

// ---------------------------------------------------------------------------
// TriangleMesh / Scene
// ---------------------------------------------------------------------------

void TriangleMesh::validate() const {
  if (triangles.empty())
    throw data_error("InvalidGeometry", "mesh has no triangles");
  const int n = static_cast<int>(vertices.size());
  for (const auto& v : vertices)
    if (!v.finite())
      throw data_error("InvalidGeometry", "non-finite vertex coordinate");
  for (size_t t = 0; t < triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int i = triangles[t][k];
      if (i < 0 || i >= n)
        throw data_error("InvalidGeometry",
                         "triangle index out of range at triangle " + std::to_string(t));
    }
    if (triangle_area(static_cast<int>(t)) < 1e-12)
      throw data_error("InvalidGeometry",
                       "degenerate (zero-area) triangle " + std::to_string(t));
  }
}

Aabb TriangleMesh::bounds() const {
  return aabb(std::span<const Vec3>(vertices));
}

double TriangleMesh::triangle_area(int t) const {
  const auto& tr = triangles[static_cast<size_t>(t)];
  const Vec3& a = vertices[static_cast<size_t>(tr[0])];
  const Vec3& b = vertices[static_cast<size_t>(tr[1])];
  const Vec3& c = vertices[static_cast<size_t>(tr[2])];
  return 0.5 * (b - a).cross(c - a).norm();
}

double TriangleMesh::area() const {
  double s = 0;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) s += triangle_area(t);
  return s;
}

double TriangleMesh::signed_volume() const {
  double v = 0;
  for (const auto& tr : triangles) {
    const Vec3& a = vertices[static_cast<size_t>(tr[0])];
    const Vec3& b = vertices[static_cast<size_t>(tr[1])];
    const Vec3& c = vertices[static_cast<size_t>(tr[2])];
    v += a.dot(b.cross(c));
  }
  return v / 6.0;
}

bool TriangleMesh::closed() const {
  std::unordered_map<uint64_t, int> count;
  count.reserve(triangles.size() * 2);
  for (const auto& tr : triangles)
    for (int k = 0; k < 3; ++k) ++count[edge_key(tr[k], tr[(k + 1) % 3])];
  for (const auto& [_, c] : count)
    if (c != 2) return false;
  return true;
}

Aabb Scene::bounds() const {
  Aabb box = kidney.bounds();
  for (const auto& t : tumors) box = box.united(t.bounds());
  return box;
}

void Scene::rotate(const Mat3& r, const Vec3& pivot) {
  transform_vertices([&](const Vec3& p) { return pivot + r.apply(p - pivot); });
}

// ---------------------------------------------------------------------------
// Free operations
// ---------------------------------------------------------------------------

Aabb aabb(std::span<const Vec3> points) {
  if (points.empty()) throw data_error("EmptySet", "aabb of an empty point set");
  Aabb box{points[0], points[0]};
  for (const auto& p : points) {
    box.min = Vec3::min(box.min, p);
    box.max = Vec3::max(box.max, p);
  }
  return box;
}

bool point_in_mesh(const Vec3& p, const TriangleMesh& mesh, bool strict) {
  if (strict && !mesh.closed())
    throw data_error("NonClosedMesh",
                     "an edge is not shared by exactly two triangles");
  auto all_tris = [&](const Vec3&, const Vec3&, auto&& visit) {
    for (const auto& tr : mesh.triangles)
      visit(mesh.vertices[static_cast<size_t>(tr[0])],
            mesh.vertices[static_cast<size_t>(tr[1])],
            mesh.vertices[static_cast<size_t>(tr[2])]);
  };
  return parity_contains(p, all_tris);
}

HausdorffResult hausdorff(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty())
    throw data_error("EmptySet", "hausdorff of an empty point set");
  auto directed = [](std::span<const Vec3> from, std::span<const Vec3> to) {
    PointIndex index(to);
    double worst = 0.0;
    for (const auto& p : from) worst = std::max(worst, index.nearest_squared(p));
    return std::sqrt(worst);
  };
  HausdorffResult r;
  r.directed_ab = directed(a, b);
  r.directed_ba = directed(b, a);
  r.symmetric = std::max(r.directed_ab, r.directed_ba);
  return r;
}

TriangleMesh filter_connected_components(const TriangleMesh& mesh,
                                         int min_triangles) {
  if (min_triangles < 1)
    throw config_error("ConfigError", "min_triangles must be >= 1");
  const int nt = static_cast<int>(mesh.triangles.size());
  UnionFind uf(nt);
  std::unordered_map<uint64_t, int> first_tri;
  first_tri.reserve(static_cast<size_t>(nt) * 2);
  for (int t = 0; t < nt; ++t) {
    const auto& tr = mesh.triangles[static_cast<size_t>(t)];
    for (int k = 0; k < 3; ++k) {
      uint64_t key = edge_key(tr[k], tr[(k + 1) % 3]);
      auto [it, inserted] = first_tri.try_emplace(key, t);
      if (!inserted) uf.unite(it->second, t);
    }
  }
  std::unordered_map<int, int> comp_size;
  for (int t = 0; t < nt; ++t) ++comp_size[uf.find(t)];

  TriangleMesh out;
  std::vector<int> vmap(mesh.vertices.size(), -1);
  for (int t = 0; t < nt; ++t) {
    if (comp_size[uf.find(t)] < min_triangles) continue;
    std::array<int, 3> tri;
    for (int k = 0; k < 3; ++k) {
      int v = mesh.triangles[static_cast<size_t>(t)][k];
      if (vmap[static_cast<size_t>(v)] < 0) {
        vmap[static_cast<size_t>(v)] = static_cast<int>(out.vertices.size());
        out.vertices.push_back(mesh.vertices[static_cast<size_t>(v)]);
      }
      tri[static_cast<size_t>(k)] = vmap[static_cast<size_t>(v)];
    }
    out.triangles.push_back(tri);
  }
  if (out.triangles.empty())
    throw data_error("AllComponentsRemoved",
                     "every component has fewer than " +
                         std::to_string(min_triangles) + " triangles");
  return out;
}

std::vector<Vec3> sample_surface(const TriangleMesh& mesh, int n, uint64_t seed) {
  if (n < 1) throw config_error("ConfigError", "sample count must be >= 1");
  const int nt = static_cast<int>(mesh.triangles.size());
  std::vector<double> cumulative(static_cast<size_t>(nt));
  double total = 0;
  for (int t = 0; t < nt; ++t) {
    total += mesh.triangle_area(t);
    cumulative[static_cast<size_t>(t)] = total;
  }
  Rng rng(seed);
  std::vector<Vec3> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double r = rng.uniform() * total;
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), r);
    size_t t = std::min(static_cast<size_t>(it - cumulative.begin()),
                        static_cast<size_t>(nt - 1));
    const auto& tr = mesh.triangles[t];
    double r1 = rng.uniform(), r2 = rng.uniform();
    if (r1 + r2 > 1.0) {
      r1 = 1.0 - r1;
      r2 = 1.0 - r2;
    }
    const Vec3& a = mesh.vertices[static_cast<size_t>(tr[0])];
    const Vec3& b = mesh.vertices[static_cast<size_t>(tr[1])];
    const Vec3& c = mesh.vertices[static_cast<size_t>(tr[2])];
    out.push_back(a + (b - a) * r1 + (c - a) * r2);
  }
  return out;
}

// ---------------------------------------------------------------------------
// MeshQuery (BVH)
// ---------------------------------------------------------------------------

struct MeshQuery::Impl {
  struct Node {
    Aabb box;
    int left = -1, right = -1;  // internal
    int first = 0, count = 0;   // leaf when count > 0
  };

  std::vector<Vec3> va, vb, vc;  // triangle vertices in BVH order
  std::vector<Node> nodes;
  Aabb bounds{};
  bool is_closed = false;
  int triangle_count = 0;

  int build(std::vector<int>& order, std::vector<Vec3>& centroids,
            const std::vector<Aabb>& boxes, int begin, int end) {
    Node node;
    node.box = boxes[static_cast<size_t>(order[static_cast<size_t>(begin)])];
    for (int i = begin + 1; i < end; ++i)
      node.box = node.box.united(boxes[static_cast<size_t>(order[static_cast<size_t>(i)])]);
    int count = end - begin;
    int self = static_cast<int>(nodes.size());
    nodes.push_back(node);
    if (count <= 4) {
      nodes[static_cast<size_t>(self)].first = begin;
      nodes[static_cast<size_t>(self)].count = count;
      return self;
    }
    Vec3 cmin = centroids[static_cast<size_t>(order[static_cast<size_t>(begin)])];
    Vec3 cmax = cmin;
    for (int i = begin; i < end; ++i) {
      const Vec3& c = centroids[static_cast<size_t>(order[static_cast<size_t>(i)])];
      cmin = Vec3::min(cmin, c);
      cmax = Vec3::max(cmax, c);
    }
    Vec3 ext = cmax - cmin;
    int axis = 0;
    if (ext.y > ext.x) axis = 1;
    if (ext.z > ext[axis]) axis = 2;
    int mid = (begin + end) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](int a, int b) {
                       return centroids[static_cast<size_t>(a)][axis] <
                              centroids[static_cast<size_t>(b)][axis];
                     });
    int l = build(order, centroids, boxes, begin, mid);
    int r = build(order, centroids, boxes, mid, end);
    nodes[static_cast<size_t>(self)].left = l;
    nodes[static_cast<size_t>(self)].right = r;
    return self;
  }

  static bool ray_box(const Vec3& o, const Vec3& inv_dir, const Aabb& box) {
    double tmin = -kInf, tmax = kInf;
    for (int k = 0; k < 3; ++k) {
      double t1 = (box.min[k] - o[k]) * inv_dir[k];
      double t2 = (box.max[k] - o[k]) * inv_dir[k];
      if (std::isnan(t1) || std::isnan(t2)) continue;  // on-slab with zero dir
      if (t1 > t2) std::swap(t1, t2);
      tmin = std::max(tmin, t1);
      tmax = std::min(tmax, t2);
      if (tmin > tmax) return false;
    }
    return tmax >= 0.0;
  }

  template <typename Visit>
  void for_ray_leaves(const Vec3& o, const Vec3& dir, Visit&& visit) const {
    Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
    int stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes[static_cast<size_t>(stack[--top])];
      if (!ray_box(o, inv, node.box)) continue;
      if (node.count > 0) {
        for (int i = node.first; i < node.first + node.count; ++i)
          visit(va[static_cast<size_t>(i)], vb[static_cast<size_t>(i)],
                vc[static_cast<size_t>(i)]);
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    }
  }

  static double box_squared_distance(const Vec3& p, const Aabb& box) {
    double d = 0;
    for (int k = 0; k < 3; ++k) {
      double v = p[k];
      if (v < box.min[k]) d += (box.min[k] - v) * (box.min[k] - v);
      if (v > box.max[k]) d += (v - box.max[k]) * (v - box.max[k]);
    }
    return d;
  }
};

MeshQuery::MeshQuery(const TriangleMesh& mesh) : impl_(std::make_unique<Impl>()) {
  const int nt = static_cast<int>(mesh.triangles.size());
  impl_->triangle_count = nt;
  std::vector<Vec3> centroids(static_cast<size_t>(nt));
  std::vector<Aabb> boxes(static_cast<size_t>(nt));
  std::vector<int> order(static_cast<size_t>(nt));
  std::iota(order.begin(), order.end(), 0);
  for (int t = 0; t < nt; ++t) {
    const auto& tr = mesh.triangles[static_cast<size_t>(t)];
    const Vec3& a = mesh.vertices[static_cast<size_t>(tr[0])];
    const Vec3& b = mesh.vertices[static_cast<size_t>(tr[1])];
    const Vec3& c = mesh.vertices[static_cast<size_t>(tr[2])];
    centroids[static_cast<size_t>(t)] = (a + b + c) / 3.0;
    boxes[static_cast<size_t>(t)] = {Vec3::min(a, Vec3::min(b, c)),
                                     Vec3::max(a, Vec3::max(b, c))};
  }
  impl_->build(order, centroids, boxes, 0, nt);
  impl_->va.resize(static_cast<size_t>(nt));
  impl_->vb.resize(static_cast<size_t>(nt));
  impl_->vc.resize(static_cast<size_t>(nt));
  for (int i = 0; i < nt; ++i) {
    const auto& tr = mesh.triangles[static_cast<size_t>(order[static_cast<size_t>(i)])];
    impl_->va[static_cast<size_t>(i)] = mesh.vertices[static_cast<size_t>(tr[0])];
    impl_->vb[static_cast<size_t>(i)] = mesh.vertices[static_cast<size_t>(tr[1])];
    impl_->vc[static_cast<size_t>(i)] = mesh.vertices[static_cast<size_t>(tr[2])];
  }
  impl_->bounds = mesh.bounds();
  impl_->is_closed = mesh.closed();
}

MeshQuery::~MeshQuery() = default;
MeshQuery::MeshQuery(MeshQuery&&) noexcept = default;
MeshQuery& MeshQuery::operator=(MeshQuery&&) noexcept = default;

bool MeshQuery::contains(const Vec3& p) const {
  if (!impl_->bounds.contains(p)) return false;
  auto bvh_tris = [this](const Vec3& o, const Vec3& dir, auto&& visit) {
    impl_->for_ray_leaves(o, dir, visit);
  };
  return parity_contains(p, bvh_tris);
}

std::optional<RayHit> MeshQuery::first_hit(const Vec3& origin, const Vec3& dir) const {
  double best = kInf;
  Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  int best_tri = -1;
  while (top > 0) {
    const auto& node = impl_->nodes[static_cast<size_t>(stack[--top])];
    if (!Impl::ray_box(origin, inv, node.box)) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        TriHit h;
        if (ray_triangle(origin, dir, impl_->va[static_cast<size_t>(i)],
                         impl_->vb[static_cast<size_t>(i)],
                         impl_->vc[static_cast<size_t>(i)], h) &&
            h.t > kTMin && h.t < best) {
          best = h.t;
          best_tri = i;
        }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  if (best_tri < 0) return std::nullopt;
  return RayHit{best, best_tri};
}

double MeshQuery::distance(const Vec3& p) const {
  double best = kInf;
  // Depth-first with near-child-first ordering and box pruning.
  struct Entry {
    int node;
    double d;
  };
  Entry stack[64];
  int top = 0;
  stack[top++] = {0, Impl::box_squared_distance(p, impl_->nodes[0].box)};
  while (top > 0) {
    Entry e = stack[--top];
    if (e.d >= best) continue;
    const auto& node = impl_->nodes[static_cast<size_t>(e.node)];
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        Vec3 q = closest_point_triangle(p, impl_->va[static_cast<size_t>(i)],
                                        impl_->vb[static_cast<size_t>(i)],
                                        impl_->vc[static_cast<size_t>(i)]);
        best = std::min(best, (q - p).squared_norm());
      }
    } else {
      double dl = Impl::box_squared_distance(p, impl_->nodes[static_cast<size_t>(node.left)].box);
      double dr = Impl::box_squared_distance(p, impl_->nodes[static_cast<size_t>(node.right)].box);
      // push the farther child first so the nearer one is explored next
      if (dl < dr) {
        if (dr < best) stack[top++] = {node.right, dr};
        if (dl < best) stack[top++] = {node.left, dl};
      } else {
        if (dl < best) stack[top++] = {node.left, dl};
        if (dr < best) stack[top++] = {node.right, dr};
      }
    }
  }
  return std::sqrt(best);
}

bool MeshQuery::closed() const { return impl_->is_closed; }
const Aabb& MeshQuery::bounds() const { return impl_->bounds; }
int MeshQuery::triangle_count() const { return impl_->triangle_count; }

// ---------------------------------------------------------------------------
// PointIndex (kd-tree, split axis = depth % 3)
// ---------------------------------------------------------------------------

struct PointIndex::Impl {
  std::vector<Vec3> pts;

  void build(int begin, int end, int depth) {
    if (end - begin <= 1) return;
    int axis = depth % 3;
    int mid = (begin + end) / 2;
    std::nth_element(pts.begin() + begin, pts.begin() + mid, pts.begin() + end,
                     [axis](const Vec3& a, const Vec3& b) { return a[axis] < b[axis]; });
    build(begin, mid, depth + 1);
    build(mid + 1, end, depth + 1);
  }

  void nearest(const Vec3& q, int begin, int end, int depth, double& best) const {
    if (begin >= end) return;
    int axis = depth % 3;
    int mid = (begin + end) / 2;
    const Vec3& m = pts[static_cast<size_t>(mid)];
    best = std::min(best, (m - q).squared_norm());
    double delta = q[axis] - m[axis];
    int near_b = begin, near_e = mid, far_b = mid + 1, far_e = end;
    if (delta > 0) {
      std::swap(near_b, far_b);
      std::swap(near_e, far_e);
    }
    nearest(q, near_b, near_e, depth + 1, best);
    if (delta * delta < best) nearest(q, far_b, far_e, depth + 1, best);
  }
};

PointIndex::PointIndex(std::span<const Vec3> points) : impl_(std::make_unique<Impl>()) {
  if (points.empty()) throw data_error("EmptySet", "PointIndex over an empty set");
  impl_->pts.assign(points.begin(), points.end());
  impl_->build(0, static_cast<int>(impl_->pts.size()), 0);
}

PointIndex::~PointIndex() = default;
PointIndex::PointIndex(PointIndex&&) noexcept = default;
PointIndex& PointIndex::operator=(PointIndex&&) noexcept = default;

double PointIndex::nearest_squared(const Vec3& p) const {
  double best = kInf;
  impl_->nearest(p, 0, static_cast<int>(impl_->pts.size()), 0, best);
  return best;
}

size_t PointIndex::size() const { return impl_->pts.size(); }

// ---------------------------------------------------------------------------
// Icosphere / ellipsoid
// ---------------------------------------------------------------------------

Vec3 random_unit_vector(Rng& rng) {
  // Marsaglia rejection; bounded away from degenerate norms.
  for (;;) {
    double a = rng.uniform(-1.0, 1.0);
    double b = rng.uniform(-1.0, 1.0);
    double s = a * a + b * b;
    if (s >= 1.0 || s < 1e-12) continue;
    double r = 2.0 * std::sqrt(1.0 - s);
    return {a * r, b * r, 1.0 - 2.0 * s};
  }
}

TriangleMesh make_ellipsoid(const Vec3& center, const Vec3& semi_axes, int level) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v = v.normalized();
  std::vector<std::array<int, 3>> tris = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::unordered_map<uint64_t, int> midpoint;
    auto mid = [&](int a, int b) {
      uint64_t key = edge_key(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = ((verts[static_cast<size_t>(a)] + verts[static_cast<size_t>(b)]) * 0.5).normalized();
      int id = static_cast<int>(verts.size());
      verts.push_back(m);
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(tris.size() * 4);
    for (const auto& t : tris) {
      int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }
  TriangleMesh mesh;
  mesh.vertices.reserve(verts.size());
  for (const auto& v : verts)
    mesh.vertices.push_back(
        {center.x + v.x * semi_axes.x, center.y + v.y * semi_axes.y,
         center.z + v.z * semi_axes.z});
  mesh.triangles = std::move(tris);
  mesh.validate();
  return mesh;
}

}  // namespace deformloc
