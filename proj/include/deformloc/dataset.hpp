#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "deformloc/deform.hpp"
#include "deformloc/geometry.hpp"
#include "deformloc/sensor.hpp"

namespace deformloc {

/// Query points with class labels in [0, C): 0 outside, 1 kidney, 1+k tumor k.
struct OccupancyPointCloud {
  std::vector<Vec3> points;
  std::vector<uint8_t> labels;

  size_t size() const { return points.size(); }
};

/// Accelerated multi-class membership queries against one scene.
class SceneQuery {
 public:
  explicit SceneQuery(const Scene& scene);

  /// Tumors take precedence over the kidney, so exophytic tumor points
  /// outside the parenchyma still label as tumor.
  int label(const Vec3& p) const;
  int class_count() const { return 2 + static_cast<int>(tumors_.size()); }
  double distance_to_any_surface(const Vec3& p) const;
  const Aabb& bounds() const { return bounds_; }

 private:
  MeshQuery kidney_;
  std::vector<MeshQuery> tumors_;
  Aabb bounds_;
};

/// Convenience single-shot labeling (same semantics as SceneQuery::label).
int label_query(const Vec3& p, const Scene& scene);

struct RotationRegime {
  enum class Mode { full, limited };
  Mode mode = Mode::limited;
  double x_bound_deg = 15.0;
  double y_bound_deg = 15.0;

  std::string to_string() const;
  static RotationRegime parse(const std::string& text);
};

/// full: uniform over SO(3) (quaternion method). limited: yaw U[0,360) with
/// X,Y tilts uniform in their bounds, composed Rz * Ry * Rx.
Mat3 random_rotation(const RotationRegime& regime, Rng& rng);
Mat3 random_rotation(const RotationRegime& regime, uint64_t seed);

struct OccSamplerConfig {
  int n = 2048;
  double near_surface_fraction = 0.5;
  double gaussian_sigma_mm = 3.0;
  double bbox_dilation = 0.2;
  int max_oversample = 50;  // budget multiplier before InsufficientCandidates
};

/// Class-balanced occupancy cloud: candidates mix uniform draws in the
/// dilated scene box with Gaussian offsets from surface samples, labeled,
/// then picked round-robin per class toward equal quotas. Exactly n points.
OccupancyPointCloud sample_occupancy_cloud(const Scene& scene,
                                           const SceneQuery& query,
                                           const OccSamplerConfig& config,
                                           uint64_t seed);
OccupancyPointCloud sample_occupancy_cloud(const Scene& scene, int n,
                                           double near_surface_fraction,
                                           uint64_t seed);

struct PairConfig {
  DeformationConfig deformation;
  RotationRegime regime;
  CameraModel camera = CameraModel::overhead();
  DppFilter dpp_filter;  // seed field ignored; derived per pair
  OccSamplerConfig occ;
};

struct TrainingPair {
  DepthPointCloud dpp;
  OccupancyPointCloud occ;
  uint64_t seed = 0;
  Mat3 rotation;
  std::vector<DragRecord> drags;
};

/// Rotate the base scene, deform it, render + filter a DPP and sample the
/// occupancy cloud from the same deformed scene. Deterministic per seed.
/// `deformed_out`, when given, receives the deformed scene.
TrainingPair make_pair(const Scene& base, const PairConfig& config, uint64_t seed,
                       Scene* deformed_out = nullptr);

struct DatasetMeta {
  std::string scene_path;
  std::string deformation_config;
  std::string rotation_regime;
  uint64_t master_seed = 0;
  uint64_t config_hash = 0;
  int train_count = 0;
  int val_count = 0;
  int dpp_n = 0;
  int occ_n = 0;
};

/// Dataset directory layout: meta.json + dpp_%06d.ply + occ_%06d.ply, with
/// validation pairs numbered after the training pairs.
void generate_dataset(const Scene& base, const PairConfig& config,
                      uint64_t master_seed, int n_train, int n_val,
                      const std::filesystem::path& dir,
                      const std::string& scene_path_note);

struct LoadedPair {
  std::vector<Vec3> dpp;
  OccupancyPointCloud occ;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<LoadedPair> train;
  std::vector<LoadedPair> val;
};

Dataset load_dataset(const std::filesystem::path& dir);

/// Per-pair seed as used by generate_dataset (train pairs tag 0, val tag 1).
uint64_t dataset_pair_seed(uint64_t master_seed, bool validation, int index);

}  // namespace deformloc
