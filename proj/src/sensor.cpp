#include "deformloc/sensor.hpp"

#include <cstdio>

#include "deformloc/errors.hpp"
#include "deformloc/rng.hpp"

namespace deformloc {

void CameraModel::validate() const {
  if (width < 1 || height < 1)
    throw config_error("ConfigError", "camera resolution must be positive");
  if (fx <= 0 || fy <= 0)
    throw config_error("ConfigError", "focal length must be positive");
  if (cx < 0 || cx >= width || cy < 0 || cy >= height)
    throw config_error("ConfigError", "principal point outside the image");
}

CameraModel CameraModel::overhead(double height_mm) {
  CameraModel cam;
  // X_cam -> +X, Y_cam -> -Y, Z_cam -> -Z: proper rotation looking down.
  cam.pose.rotation = Mat3{{1, 0, 0, 0, -1, 0, 0, 0, -1}};
  cam.pose.translation = {0, 0, height_mm};
  return cam;
}

size_t DepthImage::valid_count() const {
  size_t n = 0;
  for (float d : depth)
    if (d > 0.0f) ++n;
  return n;
}

namespace {

TriangleMesh merge_scene(const Scene& scene) {
  TriangleMesh merged = scene.kidney;
  for (const auto& tumor : scene.tumors) {
    int base = static_cast<int>(merged.vertices.size());
    merged.vertices.insert(merged.vertices.end(), tumor.vertices.begin(),
                           tumor.vertices.end());
    for (const auto& t : tumor.triangles)
      merged.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
  return merged;
}

}  // namespace

DepthImage render_depth(const Scene& scene, const CameraModel& camera) {
  camera.validate();
  DepthImage img;
  img.width = camera.width;
  img.height = camera.height;
  img.depth.assign(size_t(camera.width) * size_t(camera.height), 0.0f);
  if (scene.kidney.triangles.empty()) return img;

  MeshQuery query(merge_scene(scene));
  const Vec3 origin = camera.center();

#pragma omp parallel for schedule(dynamic, 4)
  for (int j = 0; j < camera.height; ++j) {
    for (int i = 0; i < camera.width; ++i) {
      // dir has unit z in camera space, so the hit parameter t equals the
      // camera-space depth along the optical axis.
      Vec3 dir_cam{(i - camera.cx) / camera.fx, (j - camera.cy) / camera.fy, 1.0};
      Vec3 dir = camera.pose.apply_vector(dir_cam);
      if (auto hit = query.first_hit(origin, dir))
        img.at(i, j) = static_cast<float>(hit->t);
    }
  }
  return img;
}

DepthPointCloud depth_to_points(const DepthImage& depth, const CameraModel& camera) {
  DepthPointCloud cloud;
  cloud.camera_id = "virtual_overhead";
  cloud.camera_center = camera.center();
  cloud.points.reserve(depth.valid_count());
  for (int j = 0; j < depth.height; ++j) {
    for (int i = 0; i < depth.width; ++i) {
      if (!depth.valid(i, j)) continue;
      double z = depth.at(i, j);
      Vec3 p_cam{(i - camera.cx) / camera.fx * z, (j - camera.cy) / camera.fy * z, z};
      cloud.points.push_back(camera.pose.apply(p_cam));
    }
  }
  if (cloud.points.empty())
    throw data_error("NoValidDepth", "depth image has no valid pixels");
  return cloud;
}

DepthPointCloud filter_dpp(const DepthPointCloud& cloud, const DppFilter& filter,
                           bool* fewer_than_n) {
  if (!(filter.near_mm < filter.far_mm))
    throw config_error("ConfigError", "near must be < far");
  if (filter.n < 1) throw config_error("ConfigError", "n must be >= 1");

  DepthPointCloud out;
  out.camera_id = cloud.camera_id;
  out.camera_center = cloud.camera_center * filter.scale;
  std::vector<Vec3> survivors;
  survivors.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    double d = (p - cloud.camera_center).norm();
    if (d < filter.near_mm || d > filter.far_mm) continue;
    survivors.push_back(p * filter.scale);
  }
  if (survivors.empty())
    throw data_error("NoValidDepth", "no points within the camera range window");

  // seeded Fisher-Yates, take the first n: unique by construction
  Rng rng(filter.seed);
  for (size_t i = survivors.size() - 1; i > 0; --i) {
    size_t j = rng.uniform_index(i + 1);
    std::swap(survivors[i], survivors[j]);
  }
  size_t take = std::min<size_t>(size_t(filter.n), survivors.size());
  if (take < size_t(filter.n)) {
    if (fewer_than_n) *fewer_than_n = true;
    std::fprintf(stderr,
                 "warning: only %zu points survive range filtering (requested %d)\n",
                 survivors.size(), filter.n);
  } else if (fewer_than_n) {
    *fewer_than_n = false;
  }
  survivors.resize(take);
  out.points = std::move(survivors);
  return out;
}

}  // namespace deformloc
