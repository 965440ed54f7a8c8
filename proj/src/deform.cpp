#include "deformloc/deform.hpp"

#include <cmath>
#include <sstream>

#include "deformloc/errors.hpp"
#include "deformloc/rng.hpp"

namespace deformloc {

void DeformationStep::validate() const {
  if (!(d_max > 0)) throw config_error("ConfigError", "deformation distance must be > 0");
  if (!(sigma_sq > 0)) throw config_error("ConfigError", "sigma^2 must be > 0");
  if (repeats < 1) throw config_error("ConfigError", "repeats must be >= 1");
}

void DeformationConfig::validate() const {
  if (steps.empty()) throw config_error("ConfigError", "deformation config is empty");
  for (const auto& s : steps) s.validate();
}

int DeformationConfig::total_drags() const {
  int n = 0;
  for (const auto& s : steps) n += s.repeats;
  return n;
}

std::string DeformationConfig::to_string() const {
  std::ostringstream os;
  for (size_t i = 0; i < steps.size(); ++i) {
    if (i) os << ",";
    os << "(" << steps[i].d_max << "," << steps[i].sigma_sq << ","
       << steps[i].repeats << ")";
  }
  return os.str();
}

DeformationConfig DeformationConfig::parse(const std::string& text) {
  DeformationConfig config;
  size_t pos = 0;
  auto skip_ws = [&]() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == ',')) ++pos;
  };
  skip_ws();
  while (pos < text.size()) {
    if (text[pos] != '(')
      throw config_error("ConfigError", "expected '(' in deformation config: " + text);
    size_t close = text.find(')', pos);
    if (close == std::string::npos)
      throw config_error("ConfigError", "unbalanced parentheses in: " + text);
    std::string body = text.substr(pos + 1, close - pos - 1);
    for (auto& c : body)
      if (c == ',') c = ' ';
    std::istringstream ls(body);
    DeformationStep step;
    if (!(ls >> step.d_max >> step.sigma_sq >> step.repeats))
      throw config_error("ConfigError", "malformed deformation tuple: (" + body + ")");
    config.steps.push_back(step);
    pos = close + 1;
    skip_ws();
  }
  config.validate();
  return config;
}

VisibleSet visible_vertices(const Scene& scene, const CameraModel& camera,
                            double epsilon_mm) {
  DepthImage rendered = render_depth(scene, camera);
  RigidTransform world_to_cam = camera.pose.inverse();
  VisibleSet visible;
  for (int v = 0; v < static_cast<int>(scene.kidney.vertices.size()); ++v) {
    Vec3 p = world_to_cam.apply(scene.kidney.vertices[static_cast<size_t>(v)]);
    if (p.z <= 0) continue;
    double u = camera.fx * p.x / p.z + camera.cx;
    double w = camera.fy * p.y / p.z + camera.cy;
    int i = static_cast<int>(std::lround(u));
    int j = static_cast<int>(std::lround(w));
    if (i < 0 || i >= camera.width || j < 0 || j >= camera.height) continue;
    if (!rendered.valid(i, j)) continue;
    if (std::abs(rendered.at(i, j) - p.z) <= epsilon_mm)
      visible.indices.push_back(v);
  }
  if (visible.indices.empty())
    throw data_error("EmptyVisibleSet", "no kidney vertex is visible to the camera");
  return visible;
}

void apply_step_inplace(Scene& scene, const DeformationStep& step,
                        const VisibleSet& visible, Rng& rng,
                        std::vector<DragRecord>* records) {
  step.validate();
  if (visible.indices.empty())
    throw data_error("EmptyVisibleSet", "deformation needs a non-empty visible set");
  const double inv_two_sigma_sq = 1.0 / (2.0 * step.sigma_sq);
  for (int rep = 0; rep < step.repeats; ++rep) {
    int v_idx = visible.indices[rng.uniform_index(visible.indices.size())];
    double magnitude = step.d_max * (1.0 - rng.uniform());  // (0, d_max]
    Vec3 direction = random_unit_vector(rng);
    Vec3 anchor = scene.kidney.vertices[static_cast<size_t>(v_idx)];
    scene.transform_vertices([&](const Vec3& n) {
      double w = std::exp(-(anchor - n).squared_norm() * inv_two_sigma_sq);
      return n + direction * (magnitude * w);
    });
    if (records) records->push_back({v_idx, magnitude, direction});
  }
}

Scene apply_step(const Scene& scene, const DeformationStep& step,
                 const VisibleSet& visible, uint64_t seed,
                 std::vector<DragRecord>* records) {
  Scene out = scene;
  Rng rng(seed);
  apply_step_inplace(out, step, visible, rng, records);
  return out;
}

Scene apply_config(const Scene& scene, const DeformationConfig& config,
                   const CameraModel& camera, uint64_t seed,
                   std::vector<DragRecord>* records) {
  config.validate();
  Scene out = scene;
  Rng rng(seed);
  for (const auto& step : config.steps) {
    VisibleSet visible = visible_vertices(out, camera);
    apply_step_inplace(out, step, visible, rng, records);
  }
  return out;
}

namespace {

/// Z extent of kidney vertices within the central X slab.
double midsection_height(const Scene& scene, double x_mid, double slab_halfwidth) {
  double lo = 1e300, hi = -1e300;
  for (const auto& v : scene.kidney.vertices) {
    if (std::abs(v.x - x_mid) > slab_halfwidth) continue;
    lo = std::min(lo, v.z);
    hi = std::max(hi, v.z);
  }
  if (hi < lo) return 0.0;
  return hi - lo;
}

}  // namespace

Scene compress_midsection(const Scene& scene, double depth_mm) {
  if (depth_mm < 0) throw config_error("ConfigError", "compression depth must be >= 0");
  Scene out = scene;
  if (depth_mm == 0) return out;

  Aabb box = scene.bounds();
  const double x_mid = box.center().x;
  const double z_mid = box.center().z;
  const double y_mid = box.center().y;
  const double extent_x = box.extent().x;
  const double slab = std::max(2.0, 0.05 * extent_x);
  const double height = midsection_height(scene, x_mid, slab);
  if (depth_mm > 0.5 * height)
    throw data_error("ExcessiveCompression",
                     "depth " + std::to_string(depth_mm) +
                         " mm exceeds half the midsection height (" +
                         std::to_string(height) + " mm)");

  const double sigma = extent_x / 4.0;
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  out.transform_vertices([&](const Vec3& p) {
    double w = std::exp(-(p.x - x_mid) * (p.x - x_mid) * inv_two_sigma_sq);
    double s = 1.0 - (depth_mm / height) * w;
    return Vec3{p.x, y_mid + (p.y - y_mid) / s, z_mid + (p.z - z_mid) * s};
  });
  return out;
}

}  // namespace deformloc
