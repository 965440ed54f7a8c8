#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deformloc/geometry.hpp"

namespace deformloc {

/// Pinhole depth camera. Camera frame: X right, Y down, Z forward (the
/// optical axis); `pose` maps camera coordinates to world coordinates.
/// Pixel (i, j) looks along ((i-cx)/fx, (j-cy)/fy, 1) in camera space.
struct CameraModel {
  int width = 160;
  int height = 120;
  double fx = 120.0, fy = 120.0;
  double cx = 80.0, cy = 60.0;
  RigidTransform pose;

  void validate() const;
  Vec3 center() const { return pose.translation; }

  /// Default rig: 160x120 at f=120px, `height_mm` above the origin looking
  /// straight down (-Z), camera X along world X.
  static CameraModel overhead(double height_mm = 150.0);
};

/// Per-pixel depth along the optical axis in millimeters; 0 marks a miss.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> depth;

  float at(int i, int j) const { return depth[size_t(j) * size_t(width) + size_t(i)]; }
  float& at(int i, int j) { return depth[size_t(j) * size_t(width) + size_t(i)]; }
  bool valid(int i, int j) const { return at(i, j) > 0.0f; }
  size_t valid_count() const;
};

/// Single-view point cloud in the world frame (the network conditioning
/// input). Keeps the camera center so range filtering stays geometric.
struct DepthPointCloud {
  std::vector<Vec3> points;
  std::string camera_id;
  Vec3 camera_center;
};

/// First ray-triangle intersection per pixel over all scene meshes.
DepthImage render_depth(const Scene& scene, const CameraModel& camera);

/// Back-project every valid pixel through the pinhole model into the world
/// frame. Throws NoValidDepth when the image is empty.
DepthPointCloud depth_to_points(const DepthImage& depth, const CameraModel& camera);

struct DppFilter {
  double near_mm = 110.0;
  double far_mm = 150.0;
  double scale = 1.0;   // 1000 when ingesting meter-unit external clouds
  int n = 1000;
  uint64_t seed = 0;
};

/// Range-filter by Euclidean camera distance, scale, then draw n unique
/// points without replacement (all survivors, with a warning, when fewer).
DepthPointCloud filter_dpp(const DepthPointCloud& cloud, const DppFilter& filter,
                           bool* fewer_than_n = nullptr);

}  // namespace deformloc
