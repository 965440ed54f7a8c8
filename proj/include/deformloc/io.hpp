#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "deformloc/geometry.hpp"

namespace deformloc {

/// File formats used across the pipeline. Comment/header fields carry the
/// master seed and config hash so every artifact records its provenance.

struct ArtifactTag {
  uint64_t seed = 0;
  uint64_t config_hash = 0;
  std::string comment() const;  // "seed=... config=..."
};

// -- ASCII OBJ, triangles only, 1-based indices ------------------------------
TriangleMesh read_obj(const std::filesystem::path& path);
void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh,
               const ArtifactTag& tag = {});

// -- binary little-endian PLY, float32 x,y,z (+ optional uint8 label) --------
std::vector<Vec3> read_ply_points(const std::filesystem::path& path);
void write_ply_points(const std::filesystem::path& path,
                      const std::vector<Vec3>& points,
                      const ArtifactTag& tag = {});
void read_ply_labeled(const std::filesystem::path& path,
                      std::vector<Vec3>& points, std::vector<uint8_t>& labels);
void write_ply_labeled(const std::filesystem::path& path,
                       const std::vector<Vec3>& points,
                       const std::vector<uint8_t>& labels,
                       const ArtifactTag& tag = {});

// -- 16-bit PGM depth (debug); invalid pixels stored as 0 --------------------
void write_pgm16(const std::filesystem::path& path, int width, int height,
                 const std::vector<float>& depth_mm, double mm_per_unit = 0.01,
                 const ArtifactTag& tag = {});
std::vector<float> read_pgm16(const std::filesystem::path& path, int& width,
                              int& height);

// -- raw blobs with JSON sidecar (<path>.json) --------------------------------
struct VolumeHeader {
  std::array<int, 3> dims{};
  double spacing = 1.0;
  Vec3 origin;
};
void write_raw_f32(const std::filesystem::path& path, const VolumeHeader& hdr,
                   const std::vector<float>& values, const ArtifactTag& tag = {});
std::vector<float> read_raw_f32(const std::filesystem::path& path,
                                VolumeHeader& hdr);
void write_raw_u8(const std::filesystem::path& path, const VolumeHeader& hdr,
                  const std::vector<uint8_t>& values, const ArtifactTag& tag = {});
std::vector<uint8_t> read_raw_u8(const std::filesystem::path& path,
                                 VolumeHeader& hdr);

// -- scene.json: file names of the kidney and tumor OBJs ---------------------
void write_scene(const std::filesystem::path& dir, const Scene& scene,
                 const ArtifactTag& tag = {});
Scene read_scene(const std::filesystem::path& scene_json);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace deformloc
