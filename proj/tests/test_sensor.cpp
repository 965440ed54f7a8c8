#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "deformloc/errors.hpp"
#include "deformloc/sensor.hpp"
#include "support.hpp"

using namespace deformloc;

namespace {

Scene quad_scene(double half, double z) {
  Scene s;
  s.kidney.vertices = {{-half, -half, z}, {half, -half, z}, {half, half, z}, {-half, half, z}};
  s.kidney.triangles = {{0, 1, 2}, {0, 2, 3}};
  return s;
}

// UV sphere with exact pole vertices on the Z axis.
TriangleMesh uv_sphere(const Vec3& c, double r, int rings = 24, int segs = 48) {
  TriangleMesh m;
  m.vertices.push_back({c.x, c.y, c.z + r});  // top pole
  for (int i = 1; i < rings; ++i) {
    double theta = M_PI * i / rings;
    for (int j = 0; j < segs; ++j) {
      double phi = 2 * M_PI * j / segs;
      m.vertices.push_back({c.x + r * std::sin(theta) * std::cos(phi),
                            c.y + r * std::sin(theta) * std::sin(phi),
                            c.z + r * std::cos(theta)});
    }
  }
  m.vertices.push_back({c.x, c.y, c.z - r});  // bottom pole
  auto ring_v = [&](int i, int j) { return 1 + (i - 1) * segs + (j % segs); };
  for (int j = 0; j < segs; ++j) m.triangles.push_back({0, ring_v(1, j), ring_v(1, j + 1)});
  for (int i = 1; i + 1 < rings; ++i)
    for (int j = 0; j < segs; ++j) {
      m.triangles.push_back({ring_v(i, j), ring_v(i + 1, j), ring_v(i + 1, j + 1)});
      m.triangles.push_back({ring_v(i, j), ring_v(i + 1, j + 1), ring_v(i, j + 1)});
    }
  int bottom = int(m.vertices.size()) - 1;
  for (int j = 0; j < segs; ++j)
    m.triangles.push_back({bottom, ring_v(rings - 1, j + 1), ring_v(rings - 1, j)});
  return m;
}

}  // namespace

TEST_CASE("render_depth: empty scene -> all pixels invalid") {
  Scene empty;
  auto img = render_depth(empty, CameraModel::overhead());
  CHECK(img.valid_count() == 0);
}

TEST_CASE("render_depth: fronto-parallel quad at depth 150") {
  auto img = render_depth(quad_scene(50, 0), CameraModel::overhead(150));
  CHECK(img.valid(80, 60));
  CHECK(img.at(80, 60) == doctest::Approx(150.0).epsilon(1e-9));
}

TEST_CASE("render_depth: sphere on the optical axis") {
  const double D = 120, r = 35;
  Scene s;
  s.kidney = uv_sphere({0, 0, 150 - D}, r);
  auto img = render_depth(s, CameraModel::overhead(150));
  CHECK(img.valid(80, 60));
  CHECK(std::fabs(img.at(80, 60) - (D - r)) < 1e-5);
}

TEST_CASE("depth_to_points: principal ray and filtering of invalid pixels") {
  CameraModel cam = CameraModel::overhead(150);
  DepthImage img;
  img.width = cam.width;
  img.height = cam.height;
  img.depth.assign(size_t(cam.width) * size_t(cam.height), 0.0f);
  img.at(80, 60) = 90.0f;
  auto cloud = depth_to_points(img, cam);
  REQUIRE(cloud.points.size() == 1);
  CHECK(cloud.points[0].x == doctest::Approx(0.0));
  CHECK(cloud.points[0].y == doctest::Approx(0.0));
  CHECK(cloud.points[0].z == doctest::Approx(60.0));

  img.at(80, 60) = 0.0f;
  CHECK_THROWS_AS(depth_to_points(img, cam), Error);
}

TEST_CASE("depth_to_points ∘ render_depth: points on surface and on pixel rays") {
  Scene s;
  s.kidney = make_ellipsoid({5, -3, 0}, {40, 25, 20}, 3);
  CameraModel cam = CameraModel::overhead(150);
  auto img = render_depth(s, cam);
  auto cloud = depth_to_points(img, cam);
  REQUIRE(cloud.points.size() > 500);

  MeshQuery q(s.kidney);
  RigidTransform w2c = cam.pose.inverse();
  for (size_t i = 0; i < cloud.points.size(); i += 7) {
    CHECK(q.distance(cloud.points[i]) < 0.5);
    Vec3 pc = w2c.apply(cloud.points[i]);
    double u = cam.fx * pc.x / pc.z + cam.cx;
    double v = cam.fy * pc.y / pc.z + cam.cy;
    CHECK(std::fabs(u - std::round(u)) < 1e-7);
    CHECK(std::fabs(v - std::round(v)) < 1e-7);
  }
}

TEST_CASE("filter_dpp: range window, scaling, subsampling") {
  DepthPointCloud cloud;
  cloud.camera_center = {0, 0, 0};
  cloud.points = {{0, 0, 160}, {0, 0, 100}, {0, 0, 120}, {30, 0, 120}, {0, 20, 130}};
  DppFilter f;
  f.near_mm = 110;
  f.far_mm = 150;
  f.n = 10;
  bool fewer = false;
  auto out = filter_dpp(cloud, f, &fewer);
  CHECK(fewer);
  CHECK(out.points.size() == 3);  // 160 too far, 100 too near
  for (const auto& p : out.points) {
    double d = (p - out.camera_center).norm();
    CHECK(d >= 110);
    CHECK(d <= 150);
  }

  // meter-unit ingestion: x1000 scaling
  DepthPointCloud meters;
  meters.camera_center = {0, 0, 0};
  meters.points = {{0.1, 0, 0.12}};
  DppFilter mf;
  mf.near_mm = 0.1;
  mf.far_mm = 0.2;
  mf.scale = 1000;
  mf.n = 1;
  auto scaled = filter_dpp(meters, mf);
  CHECK(scaled.points[0].x == doctest::Approx(100.0));
  CHECK(scaled.points[0].z == doctest::Approx(120.0));

  // nothing survives
  DppFilter none;
  none.near_mm = 1;
  none.far_mm = 2;
  CHECK_THROWS_AS(filter_dpp(cloud, none), Error);
}

TEST_CASE("filter_dpp: cardinality, uniqueness, determinism") {
  Scene s;
  s.kidney = make_ellipsoid({0, 0, 0}, {50, 30, 25}, 3);
  CameraModel cam = CameraModel::overhead(150);
  auto cloud = depth_to_points(render_depth(s, cam), cam);
  DppFilter f;
  f.n = 1000;
  f.seed = 7;
  auto a = filter_dpp(cloud, f);
  CHECK(a.points.size() == 1000);
  std::set<std::tuple<double, double, double>> uniq;
  for (const auto& p : a.points) uniq.insert({p.x, p.y, p.z});
  CHECK(uniq.size() == a.points.size());

  auto b = filter_dpp(cloud, f);
  bool identical = true;
  for (size_t i = 0; i < a.points.size(); ++i)
    if (a.points[i].x != b.points[i].x || a.points[i].z != b.points[i].z)
      identical = false;
  CHECK(identical);

  DppFilter f2 = f;
  f2.seed = 8;
  auto c = filter_dpp(cloud, f2);
  bool same_order = true;
  for (size_t i = 0; i < a.points.size(); ++i)
    if (a.points[i].x != c.points[i].x) same_order = false;
  CHECK_FALSE(same_order);
}
