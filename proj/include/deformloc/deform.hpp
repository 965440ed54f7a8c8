#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deformloc/geometry.hpp"
#include "deformloc/sensor.hpp"

namespace deformloc {

/// One vertex-drag operation family: drags of magnitude up to d_max with a
/// Gaussian falloff of variance sigma_sq, repeated `repeats` times.
struct DeformationStep {
  double d_max = 0.0;     // mm
  double sigma_sq = 0.0;  // mm^2
  int repeats = 1;

  void validate() const;
};

/// Ordered list of steps; parsed from the tuple syntax
/// "(d,sigma_sq,repeats),(d,sigma_sq,repeats),...".
struct DeformationConfig {
  std::vector<DeformationStep> steps;

  void validate() const;
  int total_drags() const;
  std::string to_string() const;
  static DeformationConfig parse(const std::string& text);
};

/// Indices of kidney vertices visible from the camera.
struct VisibleSet {
  std::vector<int> indices;
};

/// Kidney vertices whose projection lands in the image and whose rendered
/// depth at that pixel matches the vertex depth within epsilon. Occlusion
/// accounts for the whole scene (tumors included).
VisibleSet visible_vertices(const Scene& scene, const CameraModel& camera,
                            double epsilon_mm = 1.0);

/// One executed drag (kept for debugging and reproducibility audits).
struct DragRecord {
  int vertex = -1;
  double magnitude = 0.0;
  Vec3 direction;
};

/// Drag `repeats` random visible kidney vertices; every vertex of every mesh
/// (tumors included) moves by m * u * exp(-|v-n|^2 / (2 sigma^2)).
Scene apply_step(const Scene& scene, const DeformationStep& step,
                 const VisibleSet& visible, uint64_t seed,
                 std::vector<DragRecord>* records = nullptr);

/// In-place variant sharing one random stream across steps.
void apply_step_inplace(Scene& scene, const DeformationStep& step,
                        const VisibleSet& visible, Rng& rng,
                        std::vector<DragRecord>* records = nullptr);

/// Apply all steps in order, recomputing visibility before each step.
Scene apply_config(const Scene& scene, const DeformationConfig& config,
                   const CameraModel& camera, uint64_t seed,
                   std::vector<DragRecord>* records = nullptr);

/// Squeeze the scene toward its transverse mid-plane with a Gaussian profile
/// along X so the midsection height drops by `depth_mm`; Y expands to keep
/// each cross-section's area (the map is area-preserving per X slice).
Scene compress_midsection(const Scene& scene, double depth_mm);

}  // namespace deformloc
