#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "deformloc/geometry.hpp"

namespace deformloc {

/// Scalar CT volume in Hounsfield units. Voxel (i,j,k) is centered at
/// origin + (i+0.5, j+0.5, k+0.5) * spacing; x varies fastest in `values`.
struct CtVolume {
  std::array<int, 3> dims{0, 0, 0};
  double spacing = 1.0;  // mm, isotropic
  Vec3 origin;
  std::vector<float> values;

  void validate() const;
  size_t index(int i, int j, int k) const {
    return (size_t(k) * size_t(dims[1]) + size_t(j)) * size_t(dims[0]) + size_t(i);
  }
  Vec3 center(int i, int j, int k) const {
    return {origin.x + (i + 0.5) * spacing, origin.y + (j + 0.5) * spacing,
            origin.z + (k + 0.5) * spacing};
  }
  size_t voxel_count() const {
    return size_t(dims[0]) * size_t(dims[1]) * size_t(dims[2]);
  }
};

/// Open-interval HU window (lo, hi).
struct SegmentationWindow {
  double lo = 0.0;
  double hi = 0.0;
  void validate() const;
};

/// Binary mask sharing a CtVolume's lattice.
struct VoxelMask {
  std::array<int, 3> dims{0, 0, 0};
  double spacing = 1.0;
  Vec3 origin;
  std::vector<uint8_t> inside;

  size_t index(int i, int j, int k) const {
    return (size_t(k) * size_t(dims[1]) + size_t(j)) * size_t(dims[0]) + size_t(i);
  }
  Vec3 center(int i, int j, int k) const {
    return {origin.x + (i + 0.5) * spacing, origin.y + (j + 0.5) * spacing,
            origin.z + (k + 0.5) * spacing};
  }
  size_t true_count() const;
};

struct HuMap {
  double background = -1000.0;
  double kidney = 0.0;
  double tumor = 600.0;
};

/// Rasterize the scene: each voxel center takes the HU of the innermost
/// containing structure (tumor over kidney over background) plus Gaussian
/// noise. Deterministic per seed (per-slice derived streams).
CtVolume synth_ct(const Scene& scene, const std::array<int, 3>& dims,
                  double spacing, const Vec3& origin, const HuMap& hu,
                  double noise_sigma, uint64_t seed);

/// Convenience overload: volume centered on the scene bounds with 25 mm pad.
CtVolume synth_ct(const Scene& scene, double spacing, const HuMap& hu,
                  double noise_sigma, uint64_t seed);

/// Mask of voxels with lo < value < hi.
VoxelMask threshold_segment(const CtVolume& vol, const SegmentationWindow& window);

/// Isosurface of the binary mask at 0.5 between inside/outside voxel centers
/// (marching tetrahedra on the Freudenthal cube split: watertight, outward
/// oriented), then connected-component filtering.
TriangleMesh extract_mesh(const VoxelMask& mask, int min_triangles = 100);

}  // namespace deformloc
