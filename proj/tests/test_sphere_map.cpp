#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"

#include "conformal/harmonic.h"
#include "conformal/shapes.h"
#include "conformal/sphere_map.h"

using namespace conformal;

namespace {

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

Mesh unit_cube(int refine) {
  std::vector<std::vector<std::vector<bool>>> solid(1, std::vector<std::vector<bool>>(1, std::vector<bool>(1, true)));
  return shapes::voxel_surface(solid, refine);
}

}  // namespace

TEST_CASE("project_tangent") {
  const Vec3 v(0, 0, 1);
  CHECK(project_tangent(v, v).norm() == 0.0);
  CHECK(project_tangent(v, Vec3(1, 2, 0)) == Vec3(1, 2, 0));
  CHECK(project_tangent(v, Vec3(1, 2, 3)) == Vec3(1, 2, 0));
  CHECK(std::abs(project_tangent(Vec3(1, 1, 0), Vec3(3, -1, 2)).dot(Vec3(1, 1, 0))) < 1e-15);
}

TEST_CASE("stereographic projection") {
  CHECK(stereographic(Vec3(0, 0, 1)) == std::complex<double>(0, 0));
  CHECK(stereographic(Vec3(1, 0, 0)) == std::complex<double>(1, 0));
  CHECK_THROWS_AS(stereographic(Vec3(0, 0, -1)), Error);
  for (const Vec3& p : {Vec3(0.6, 0, 0.8), Vec3(-0.48, 0.6, -0.64), Vec3(0, -1, 0)}) {
    CHECK((inverse_stereographic(stereographic(p)) - p).norm() < 1e-12);
  }
  const std::complex<double> z(0.3, -2.0);
  CHECK(std::abs(stereographic(inverse_stereographic(z)) - z) < 1e-12);
}

TEST_CASE("mobius") {
  using C = std::complex<double>;
  CHECK(mobius(C(2, 1), 1, 0, 0, 1) == C(2, 1));
  CHECK(mobius(C(2, 0), 0, 1, 1, 0) == C(0.5, 0));
  CHECK_THROWS_AS(mobius(C(1, 0), 1, 2, 2, 4), Error);
  // composition is the matrix product
  const C a1(1, 1), b1(0, 2), c1(1, 0), d1(3, 0);
  const C a2(2, 0), b2(-1, 0), c2(0, 1), d2(1, 1);
  const C a = a2 * a1 + b2 * c1, b = a2 * b1 + b2 * d1, c = c2 * a1 + d2 * c1, d = c2 * b1 + d2 * d1;
  for (C z : {C(0.2, 0.1), C(-3, 4), C(1, -1)}) {
    CHECK(std::abs(mobius(mobius(z, a1, b1, c1, d1), a2, b2, c2, d2) - mobius(z, a, b, c, d)) < 1e-12);
  }
}

TEST_CASE("gauss_map") {
  Mesh ico = shapes::icosphere(3);
  SphereMap g = gauss_map(ico);
  double worst = 0.0;
  for (int v = 0; v < ico.num_vertices(); ++v) worst = std::max(worst, (g.points[v] - ico.position(v)).norm());
  CHECK(worst < 0.05);
  CHECK(map_degree(unit_cube(2), gauss_map(unit_cube(2)).points) == 1);
  Mesh flat = shapes::flat_torus(5, 5);
  CHECK((gauss_map(flat).points[12] - Vec3(0, 0, 1)).norm() < 1e-14);
}

TEST_CASE("barycentric_embed") {
  SUBCASE("icosphere is nearly a fixed point") {
    Mesh ico = shapes::icosphere(2);
    SphereMap b = barycentric_embed(ico);
    CHECK(b.converged);
    double worst = 0.0;
    for (int v = 0; v < ico.num_vertices(); ++v) worst = std::max(worst, (b.points[v] - ico.position(v)).norm());
    CHECK(worst < 0.1);
    for (std::size_t i = 1; i < b.energy_trace.size(); ++i) CHECK(b.energy_trace[i] <= b.energy_trace[i - 1]);
  }
  SUBCASE("tetrahedron embeds without flips") {
    Mesh t = shapes::tetrahedron();
    SphereMap b = barycentric_embed(t);
    CHECK(flipped_spherical_faces(t, b.points) == 0);
    CHECK(map_degree(t, b.points) == 1);
  }
  SUBCASE("cube embeds without flips") {
    Mesh c = unit_cube(3);
    SphereMap b = barycentric_embed(c);
    CHECK(flipped_spherical_faces(c, b.points) == 0);
  }
  SUBCASE("huge step diverges") {
    SphereFlowOptions opt;
    opt.step = 10.0;
    try {
      barycentric_embed(shapes::icosphere(2), opt);
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(!e.trace().empty());
    }
  }
  SUBCASE("genus one is rejected") { CHECK_THROWS_AS(barycentric_embed(shapes::ring_torus(2, 1, 8, 6)), Error); }
}

TEST_CASE("conformal_embed") {
  SUBCASE("icosphere energy approaches 8 pi") {
    Mesh ico = shapes::icosphere(3);
    SphereMap c = conformal_embed(ico);
    CHECK(c.converged);
    CHECK(std::abs(c.energy() - 8.0 * std::numbers::pi) < 0.02 * 8.0 * std::numbers::pi);
    for (const Vec3& p : c.points) CHECK(std::abs(p.norm() - 1.0) < 1e-9);
    CHECK(map_degree(ico, c.points) == 1);
    CHECK(c.centroid_norm <= 1e-4);
    CHECK(c.tangential_residual < 1e-4 * ico.bounding_box_diagonal());
    for (std::size_t i = 1; i < c.energy_trace.size(); ++i) CHECK(c.energy_trace[i] <= c.energy_trace[i - 1]);

    SphereMap again = conformal_embed(ico, {}, c);
    CHECK(again.converged);
    CHECK(std::abs(again.energy() - c.energy()) < 1e-7 * c.energy());
  }
  SUBCASE("distortion does not grow under subdivision") {
    double prev = 1e9;
    for (int level : {2, 3, 4}) {
      Mesh ico = shapes::icosphere(level);
      double med = median(quasi_conformal_distortion(ico, conformal_embed(ico).points));
      CHECK(med <= prev);
      prev = med;
    }
  }
  SUBCASE("ellipsoid at 5k faces") {
    Mesh m = preprocess_negative_weights(shapes::ellipsoid(2, 1, 1, 4), PreprocessMode::swap).mesh;
    SphereMap c = conformal_embed(m);
    CHECK(c.converged);
    CHECK(flipped_spherical_faces(m, c.points) == 0);
    CHECK(median(quasi_conformal_distortion(m, c.points)) < 1.05);
  }
  SUBCASE("negative weights are rejected") {
    Mesh m = shapes::ellipsoid(2, 1, 1, 3);
    REQUIRE(cotan_weights(m).min() < 0.0);
    CHECK_THROWS_WITH_AS(conformal_embed(m), doctest::Contains("negative"), Error);
  }
}

TEST_CASE("slow: ellipsoid at 20k faces has median distortion below 1.05") {
  Mesh m = preprocess_negative_weights(shapes::ellipsoid(2, 1, 1, 5), PreprocessMode::swap).mesh;
  REQUIRE(m.num_faces() >= 20000);
  SphereMap c = conformal_embed(m);
  CHECK(c.converged);
  CHECK(map_degree(m, c.points) == 1);
  CHECK(median(quasi_conformal_distortion(m, c.points)) < 1.05);
}
