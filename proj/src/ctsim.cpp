#include "deformloc/ctsim.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "deformloc/errors.hpp"
#include "deformloc/rng.hpp"

namespace deformloc {

void CtVolume::validate() const {
  if (dims[0] < 2 || dims[1] < 2 || dims[2] < 2)
    throw config_error("ConfigError", "volume dims must be >= 2 per axis");
  if (!(spacing > 0)) throw config_error("ConfigError", "spacing must be > 0");
}

void SegmentationWindow::validate() const {
  if (!(lo < hi)) throw config_error("ConfigError", "window requires lo < hi");
}

size_t VoxelMask::true_count() const {
  size_t n = 0;
  for (uint8_t v : inside)
    if (v) ++n;
  return n;
}

CtVolume synth_ct(const Scene& scene, const std::array<int, 3>& dims,
                  double spacing, const Vec3& origin, const HuMap& hu,
                  double noise_sigma, uint64_t seed) {
  CtVolume vol;
  vol.dims = dims;
  vol.spacing = spacing;
  vol.origin = origin;
  vol.validate();
  vol.values.assign(vol.voxel_count(), static_cast<float>(hu.background));

  MeshQuery kidney(scene.kidney);
  std::vector<MeshQuery> tumors;
  tumors.reserve(scene.tumors.size());
  for (const auto& t : scene.tumors) tumors.emplace_back(t);

#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < dims[2]; ++k) {
    // independent noise stream per slice keeps the volume bit-reproducible
    // under any parallel schedule
    Rng noise(derive_seed(seed, 0xC75ull, static_cast<uint64_t>(k)));
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        Vec3 p = vol.center(i, j, k);
        double value = hu.background;
        bool in_tumor = false;
        for (const auto& tq : tumors) {
          if (tq.contains(p)) {
            value = hu.tumor;
            in_tumor = true;
            break;
          }
        }
        if (!in_tumor && kidney.contains(p)) value = hu.kidney;
        if (noise_sigma > 0) value += noise_sigma * noise.normal();
        vol.values[vol.index(i, j, k)] = static_cast<float>(value);
      }
    }
  }
  return vol;
}

CtVolume synth_ct(const Scene& scene, double spacing, const HuMap& hu,
                  double noise_sigma, uint64_t seed) {
  Aabb box = scene.bounds();
  const double pad = 25.0;
  Vec3 origin = box.min - Vec3{pad, pad, pad};
  Vec3 extent = box.extent() + Vec3{2 * pad, 2 * pad, 2 * pad};
  std::array<int, 3> dims{static_cast<int>(std::ceil(extent.x / spacing)),
                          static_cast<int>(std::ceil(extent.y / spacing)),
                          static_cast<int>(std::ceil(extent.z / spacing))};
  return synth_ct(scene, dims, spacing, origin, hu, noise_sigma, seed);
}

VoxelMask threshold_segment(const CtVolume& vol, const SegmentationWindow& window) {
  window.validate();
  VoxelMask mask;
  mask.dims = vol.dims;
  mask.spacing = vol.spacing;
  mask.origin = vol.origin;
  mask.inside.resize(vol.values.size());
  for (size_t n = 0; n < vol.values.size(); ++n) {
    double v = vol.values[n];
    mask.inside[n] = (window.lo < v && v < window.hi) ? 1 : 0;
  }
  return mask;
}

namespace {

// Freudenthal split: six tetrahedra per cube, all sharing the main diagonal
// c000->c111. Face diagonals match across neighboring cubes, so the isosurface
// is watertight on any binary field.
constexpr int kTets[6][4][3] = {
    {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {1, 1, 1}},
    {{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {1, 1, 1}},
    {{0, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, 1, 1}},
    {{0, 0, 0}, {0, 1, 0}, {0, 1, 1}, {1, 1, 1}},
    {{0, 0, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}},
    {{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}}};

struct TetMesher {
  const VoxelMask& mask;
  TriangleMesh out;
  std::unordered_map<uint64_t, int> edge_vertex;
  int nx, ny, nz;

  explicit TetMesher(const VoxelMask& m)
      : mask(m), nx(m.dims[0]), ny(m.dims[1]), nz(m.dims[2]) {}

  // lattice indices run -1..dims per axis; outside the mask is empty
  bool field(int i, int j, int k) const {
    if (i < 0 || j < 0 || k < 0 || i >= nx || j >= ny || k >= nz) return false;
    return mask.inside[mask.index(i, j, k)] != 0;
  }

  uint64_t lattice_id(int i, int j, int k) const {
    return (uint64_t(k + 1) * uint64_t(ny + 2) + uint64_t(j + 1)) *
               uint64_t(nx + 2) +
           uint64_t(i + 1);
  }

  Vec3 lattice_point(int i, int j, int k) const {
    return {mask.origin.x + (i + 0.5) * mask.spacing,
            mask.origin.y + (j + 0.5) * mask.spacing,
            mask.origin.z + (k + 0.5) * mask.spacing};
  }

  int edge_midpoint(const std::array<int, 3>& a, const std::array<int, 3>& b) {
    uint64_t ia = lattice_id(a[0], a[1], a[2]);
    uint64_t ib = lattice_id(b[0], b[1], b[2]);
    if (ia > ib) std::swap(ia, ib);
    uint64_t key = (ia << 32) | ib;  // lattice ids fit in 32 bits at our dims
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    Vec3 pa = lattice_point(a[0], a[1], a[2]);
    Vec3 pb = lattice_point(b[0], b[1], b[2]);
    int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back((pa + pb) * 0.5);
    edge_vertex.emplace(key, id);
    return id;
  }

  void emit(int v0, int v1, int v2, const Vec3& outward) {
    const Vec3& a = out.vertices[size_t(v0)];
    const Vec3& b = out.vertices[size_t(v1)];
    const Vec3& c = out.vertices[size_t(v2)];
    Vec3 n = (b - a).cross(c - a);
    if (n.dot(outward) >= 0)
      out.triangles.push_back({v0, v1, v2});
    else
      out.triangles.push_back({v0, v2, v1});
  }

  void run() {
    std::array<int, 3> corner[4];
    for (int k = -1; k < nz; ++k)
      for (int j = -1; j < ny; ++j)
        for (int i = -1; i < nx; ++i) {
          int sum = 0;
          for (int dz = 0; dz <= 1; ++dz)
            for (int dy = 0; dy <= 1; ++dy)
              for (int dx = 0; dx <= 1; ++dx)
                sum += field(i + dx, j + dy, k + dz) ? 1 : 0;
          if (sum == 0 || sum == 8) continue;

          for (const auto& tet : kTets) {
            bool in[4];
            int inside = 0;
            for (int c = 0; c < 4; ++c) {
              corner[c] = {i + tet[c][0], j + tet[c][1], k + tet[c][2]};
              in[c] = field(corner[c][0], corner[c][1], corner[c][2]);
              inside += in[c] ? 1 : 0;
            }
            if (inside == 0 || inside == 4) continue;

            int ins[4], outs[4];
            int ni = 0, no = 0;
            for (int c = 0; c < 4; ++c)
              (in[c] ? ins[ni++] : outs[no++]) = c;

            auto P = [&](int c) {
              return lattice_point(corner[c][0], corner[c][1], corner[c][2]);
            };
            if (inside == 1) {
              int a = ins[0];
              int m0 = edge_midpoint(corner[a], corner[outs[0]]);
              int m1 = edge_midpoint(corner[a], corner[outs[1]]);
              int m2 = edge_midpoint(corner[a], corner[outs[2]]);
              Vec3 centroid = (out.vertices[size_t(m0)] + out.vertices[size_t(m1)] +
                               out.vertices[size_t(m2)]) /
                              3.0;
              emit(m0, m1, m2, centroid - P(a));
            } else if (inside == 3) {
              int d = outs[0];
              int m0 = edge_midpoint(corner[d], corner[ins[0]]);
              int m1 = edge_midpoint(corner[d], corner[ins[1]]);
              int m2 = edge_midpoint(corner[d], corner[ins[2]]);
              Vec3 centroid = (out.vertices[size_t(m0)] + out.vertices[size_t(m1)] +
                               out.vertices[size_t(m2)]) /
                              3.0;
              emit(m0, m1, m2, P(d) - centroid);
            } else {  // two inside: quad split into two triangles
              int a = ins[0], b = ins[1], c = outs[0], d = outs[1];
              int mac = edge_midpoint(corner[a], corner[c]);
              int mad = edge_midpoint(corner[a], corner[d]);
              int mbd = edge_midpoint(corner[b], corner[d]);
              int mbc = edge_midpoint(corner[b], corner[c]);
              Vec3 outward = (P(c) + P(d)) * 0.5 - (P(a) + P(b)) * 0.5;
              emit(mac, mad, mbd, outward);
              emit(mac, mbd, mbc, outward);
            }
          }
        }
  }
};

}  // namespace

TriangleMesh extract_mesh(const VoxelMask& mask, int min_triangles) {
  if (mask.true_count() == 0)
    throw data_error("EmptyMask", "mask has no inside voxels");
  TetMesher mesher(mask);
  mesher.run();
  return filter_connected_components(mesher.out, min_triangles);
}

}  // namespace deformloc
