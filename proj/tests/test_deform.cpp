#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "deformloc/deform.hpp"
#include "deformloc/errors.hpp"
#include "deformloc/rng.hpp"
#include "support.hpp"

using namespace deformloc;

namespace {

Scene quad_scene(double half, double z) {
  Scene s;
  s.kidney.vertices = {{-half, -half, z}, {half, -half, z}, {half, half, z}, {-half, half, z}};
  s.kidney.triangles = {{0, 1, 2}, {0, 2, 3}};
  return s;
}

bool scenes_identical(const Scene& a, const Scene& b) {
  auto mesh_eq = [](const TriangleMesh& x, const TriangleMesh& y) {
    if (x.vertices.size() != y.vertices.size()) return false;
    if (x.triangles != y.triangles) return false;
    for (size_t i = 0; i < x.vertices.size(); ++i)
      if (x.vertices[i].x != y.vertices[i].x || x.vertices[i].y != y.vertices[i].y ||
          x.vertices[i].z != y.vertices[i].z)
        return false;
    return true;
  };
  if (!mesh_eq(a.kidney, b.kidney)) return false;
  if (a.tumors.size() != b.tumors.size()) return false;
  for (size_t i = 0; i < a.tumors.size(); ++i)
    if (!mesh_eq(a.tumors[i], b.tumors[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("DeformationConfig: parse the published tuple syntax") {
  auto config =
      DeformationConfig::parse("(8,11.7,1),(6,10,1),(4,6.7,1),(4,3.3,5),(2,3.3,10)");
  REQUIRE(config.steps.size() == 5);
  CHECK(config.total_drags() == 18);
  CHECK(config.steps[1].d_max == doctest::Approx(6));
  CHECK(config.steps[3].sigma_sq == doctest::Approx(3.3));
  CHECK(config.steps[4].repeats == 10);

  auto round = DeformationConfig::parse(config.to_string());
  CHECK(round.total_drags() == 18);

  CHECK_THROWS_AS(DeformationConfig::parse("(8,1,0)"), Error);   // repeats < 1
  CHECK_THROWS_AS(DeformationConfig::parse("(0,1,1)"), Error);   // d_max <= 0
  CHECK_THROWS_AS(DeformationConfig::parse(""), Error);          // empty
  CHECK_THROWS_AS(DeformationConfig::parse("8,1,1"), Error);     // missing parens
}

TEST_CASE("visible_vertices: unoccluded quad, then z-buffer occlusion") {
  CameraModel cam = CameraModel::overhead(150);
  auto vis = visible_vertices(quad_scene(18, 0), cam);
  CHECK(vis.indices.size() == 4);

  // front quad at z=50 fully covers the smaller back quad at z=0
  Scene two = quad_scene(30, 50);
  int base = int(two.kidney.vertices.size());
  Scene back = quad_scene(15, 0);
  for (const auto& v : back.kidney.vertices) two.kidney.vertices.push_back(v);
  for (auto t : back.kidney.triangles)
    two.kidney.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  auto vis2 = visible_vertices(two, cam);
  REQUIRE(vis2.indices.size() == 4);
  for (int i : vis2.indices) CHECK(i < 4);
}

TEST_CASE("visible_vertices: sphere matches the per-vertex ray-cast oracle") {
  // Agreement between z-buffer visibility and the ray-cast oracle needs the
  // pixel footprint well below the edge length; the residual disagreements
  // live on the silhouette ring (~1/sqrt(V) of vertices).
  Scene s;
  s.kidney = make_ellipsoid({0, 0, 0}, {40, 40, 40}, 6);
  CameraModel cam = CameraModel::overhead(150);
  cam.width = 2000;
  cam.height = 1500;
  cam.fx = cam.fy = 2400;
  cam.cx = 1000;
  cam.cy = 750;
  auto vis = visible_vertices(s, cam, 1.5);
  std::vector<bool> got(s.kidney.vertices.size(), false);
  for (int i : vis.indices) got[size_t(i)] = true;

  // oracle: the first hit of the ray cast toward the vertex lands at the
  // vertex itself (within 1 mm, i.e. inside its triangle fan)
  Rng rng(5);
  std::vector<size_t> sample;
  for (int k = 0; k < 3000; ++k)
    sample.push_back(rng.uniform_index(s.kidney.vertices.size()));
  int disagreements = 0;
#pragma omp parallel for reduction(+ : disagreements) schedule(dynamic, 16)
  for (size_t si = 0; si < sample.size(); ++si) {
    size_t v = sample[si];
    Vec3 target = s.kidney.vertices[v];
    Vec3 dir = target - cam.center();
    double best_t = 1e300;
    for (size_t t = 0; t < s.kidney.triangles.size(); ++t) {
      const auto& tr = s.kidney.triangles[t];
      double hit_t;
      if (testutil::oracle_ray_tri(cam.center(), dir, s.kidney.vertices[size_t(tr[0])],
                                   s.kidney.vertices[size_t(tr[1])],
                                   s.kidney.vertices[size_t(tr[2])], hit_t) &&
          hit_t < best_t)
        best_t = hit_t;
    }
    bool expect = false;
    if (best_t < 1e300) {
      Vec3 hit = cam.center() + dir * best_t;
      expect = (hit - target).norm() <= 1.0;
    }
    if (expect != got[v]) ++disagreements;
  }
  INFO("disagreements: ", disagreements, " of ", sample.size());
  CHECK(disagreements * 100 <= int(sample.size()));
}

TEST_CASE("apply_step: delta falloff, peak weight, closed-form falloff") {
  // kidney is one triangle; drags are forced onto vertex 0
  const double sigma = 2.5;
  Scene s;
  s.kidney.vertices = {{0, 0, 0}, {sigma, 0, 0}, {40, 40, 0}};
  s.kidney.triangles = {{0, 1, 2}};
  VisibleSet only_v0{{0}};

  SUBCASE("sigma^2 -> 0: only the dragged vertex moves, by exactly m") {
    DeformationStep step{1e-9, 1e-9, 1};
    step.d_max = 5.0;
    step.sigma_sq = 1e-9;
    std::vector<DragRecord> recs;
    Scene out = apply_step(s, step, only_v0, 3, &recs);
    REQUIRE(recs.size() == 1);
    CHECK((out.kidney.vertices[0] - s.kidney.vertices[0]).norm() ==
          doctest::Approx(recs[0].magnitude).epsilon(1e-12));
    CHECK(recs[0].magnitude > 0);
    CHECK(recs[0].magnitude <= 5.0);
    CHECK((out.kidney.vertices[1] - s.kidney.vertices[1]).norm() < 1e-20);
    CHECK((out.kidney.vertices[2] - s.kidney.vertices[2]).norm() < 1e-20);
  }

  SUBCASE("n = v: weight exactly one; |v-n| = sigma: weight exp(-1/2)") {
    DeformationStep step;
    step.d_max = 4.0;
    step.sigma_sq = sigma * sigma;
    step.repeats = 1;
    std::vector<DragRecord> recs;
    Scene out = apply_step(s, step, only_v0, 11, &recs);
    REQUIRE(recs.size() == 1);
    Vec3 expected0 = recs[0].direction * recs[0].magnitude;
    CHECK((out.kidney.vertices[0] - s.kidney.vertices[0] - expected0).norm() < 1e-12);
    double disp1 = (out.kidney.vertices[1] - s.kidney.vertices[1]).norm();
    CHECK(disp1 ==
          doctest::Approx(recs[0].magnitude * std::exp(-0.5)).epsilon(1e-9));
  }
}

TEST_CASE("apply_config: drag budget, topology, tumors move too, determinism") {
  Scene s;
  s.kidney = make_ellipsoid({0, 0, 0}, {50, 30, 25}, 3);
  s.tumors.push_back(make_ellipsoid({-18, 0, 0}, {12, 12, 12}, 2));
  CameraModel cam = CameraModel::overhead(150);
  auto config =
      DeformationConfig::parse("(8,11.7,1),(6,10,1),(4,6.7,1),(4,3.3,5),(2,3.3,10)");

  std::vector<DragRecord> recs;
  Scene out = apply_config(s, config, cam, 77, &recs);
  CHECK(recs.size() == 18);

  // per-vertex displacement bounded by sum over drags of d_max
  double budget = 0;
  for (const auto& st : config.steps) budget += st.d_max * st.repeats;
  CHECK(budget == doctest::Approx(58.0));
  double max_disp = 0;
  for (size_t i = 0; i < s.kidney.vertices.size(); ++i)
    max_disp = std::max(max_disp, (out.kidney.vertices[i] - s.kidney.vertices[i]).norm());
  CHECK(max_disp <= budget + 1e-9);
  CHECK(max_disp > 0.1);  // something actually moved

  // per-drag bound: a single step moves nothing farther than its d_max
  VisibleSet vis = visible_vertices(s, cam);
  DeformationStep one;
  one.d_max = 6.0;
  one.sigma_sq = 10.0;
  one.repeats = 1;
  Scene stepped = apply_step(s, one, vis, 5);
  double step_disp = 0;
  for (size_t i = 0; i < s.kidney.vertices.size(); ++i)
    step_disp = std::max(step_disp, (stepped.kidney.vertices[i] - s.kidney.vertices[i]).norm());
  CHECK(step_disp <= 6.0 + 1e-9);

  // tumors displaced along with the kidney: force a drag onto the kidney
  // vertex nearest the tumor so the falloff provably reaches it
  size_t nearest = 0;
  double best = 1e300;
  Vec3 tumor_top = s.tumors[0].bounds().center() + Vec3{0, 0, 12};
  for (size_t i = 0; i < s.kidney.vertices.size(); ++i) {
    double d = (s.kidney.vertices[i] - tumor_top).norm();
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  DeformationStep near_step;
  near_step.d_max = 6.0;
  near_step.sigma_sq = 80.0;
  near_step.repeats = 1;
  Scene near_out = apply_step(s, near_step, VisibleSet{{int(nearest)}}, 9);
  double tumor_disp = 0;
  for (size_t i = 0; i < s.tumors[0].vertices.size(); ++i)
    tumor_disp = std::max(tumor_disp,
                          (near_out.tumors[0].vertices[i] - s.tumors[0].vertices[i]).norm());
  CHECK(tumor_disp > 0.05);

  // topology bit-identical
  CHECK(out.kidney.triangles == s.kidney.triangles);
  CHECK(out.tumors[0].triangles == s.tumors[0].triangles);

  // determinism
  Scene out2 = apply_config(s, config, cam, 77);
  CHECK(scenes_identical(out, out2));
  Scene out3 = apply_config(s, config, cam, 78);
  CHECK_FALSE(scenes_identical(out, out3));
}

TEST_CASE("falloff weights are positive and monotone in distance") {
  // directly check the falloff form via displacements of collinear vertices
  Scene s;
  s.kidney.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {5, 0, 0}, {9, 0, 0}, {0, 1, 0}};
  s.kidney.triangles = {{0, 1, 5}, {1, 2, 5}, {2, 3, 5}, {3, 4, 5}};
  VisibleSet v0{{0}};
  DeformationStep step;
  step.d_max = 2.0;
  step.sigma_sq = 9.0;
  step.repeats = 1;
  std::vector<DragRecord> recs;
  Scene out = apply_step(s, step, v0, 1, &recs);
  double prev = 1e300;
  for (size_t i = 0; i < 5; ++i) {
    double disp = (out.kidney.vertices[i] - s.kidney.vertices[i]).norm();
    CHECK(disp > 0.0);
    if (i > 0) CHECK(disp < prev);
    prev = disp;
  }
}

TEST_CASE("compress_midsection: identity, height reduction, volume, errors") {
  Scene s;
  s.kidney = make_ellipsoid({0, 0, 0}, {50, 30, 25}, 3);
  s.tumors.push_back(make_ellipsoid({25, 0, 16}, {16, 16, 16}, 2));

  Scene id = compress_midsection(s, 0);
  CHECK(id.kidney.vertices[10].x == s.kidney.vertices[10].x);
  CHECK(id.kidney.vertices[10].z == s.kidney.vertices[10].z);

  auto mid_height = [](const Scene& sc) {
    Aabb box = sc.bounds();
    double xm = box.center().x;
    double lo = 1e300, hi = -1e300;
    for (const auto& v : sc.kidney.vertices) {
      if (std::fabs(v.x - xm) > 2.5) continue;
      lo = std::min(lo, v.z);
      hi = std::max(hi, v.z);
    }
    return hi - lo;
  };

  double h0 = mid_height(s);
  for (double depth : {4.0, 8.0, 12.0}) {
    Scene c = compress_midsection(s, depth);
    CHECK(std::fabs((h0 - mid_height(c)) - depth) < 0.5);
    // tumors follow the compression field
    CHECK(c.tumors[0].vertices[0].z != s.tumors[0].vertices[0].z);
  }

  double v0 = testutil::oracle_mesh_volume(s.kidney);
  double v12 = testutil::oracle_mesh_volume(compress_midsection(s, 12).kidney);
  CHECK(std::fabs(v12 - v0) / v0 < 0.15);

  CHECK_THROWS_AS(compress_midsection(s, 30.0), Error);
  CHECK_THROWS_AS(compress_midsection(s, -1.0), Error);
}
