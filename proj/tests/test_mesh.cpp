#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include "doctest.h"

#include "conformal/mesh.h"
#include "conformal/mesh_io.h"
#include "conformal/shapes.h"

using namespace conformal;

namespace {

Mesh pillow(double half_width, double half_height) {
  // Flat rhombus closed up by a second copy with the other diagonal.
  std::vector<Vec3> p = {{-half_width, 0, 0}, {0, -half_height, 0}, {half_width, 0, 0}, {0, half_height, 0}};
  std::vector<Triangle> f = {{0, 1, 2}, {0, 2, 3}, {1, 0, 3}, {1, 3, 2}};
  return Mesh::build(p, f);
}

double weight_between(const Mesh& m, const EdgeWeights& w, int u, int v) {
  int e = m.find_edge(u, v);
  REQUIRE(e >= 0);
  return w[e];
}

}  // namespace

TEST_CASE("load tetrahedron OBJ") {
  Mesh m = load_mesh(TEST_DATA_DIR "/tetrahedron.obj");
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_faces() == 4);
  CHECK(m.num_edges() == 6);
}

TEST_CASE("quad face is rejected") {
  CHECK_THROWS_WITH_AS(load_mesh(TEST_DATA_DIR "/quad_face.obj"),
                       doctest::Contains("non-triangular face"), MeshError);
}

TEST_CASE("grid torus file counts") {
  Mesh m = load_mesh(TEST_DATA_DIR "/grid_torus_4x4.obj");
  CHECK(m.num_vertices() == 16);
  CHECK(m.num_edges() == 48);
  CHECK(m.num_faces() == 32);
  // Same cell counts as the generator.
  Mesh gen = shapes::ring_torus(2.0, 1.0, 4, 4);
  CHECK(gen.num_edges() == m.num_edges());
}

TEST_CASE("validation names the offending cell") {
  std::vector<Vec3> p = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  SUBCASE("boundary edge") {
    CHECK_THROWS_WITH_AS(Mesh::build(p, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}}), doctest::Contains("boundary edge"),
                         MeshError);
  }
  SUBCASE("inconsistent orientation") {
    CHECK_THROWS_WITH_AS(Mesh::build(p, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 2, 3}}),
                         doctest::Contains("inconsistent orientation"), MeshError);
  }
  SUBCASE("non-manifold edge") {
    std::vector<Vec3> q = p;
    q.emplace_back(1, 1, 1);
    q.emplace_back(-1, -1, 1);
    std::vector<Triangle> f = {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2},
                               {0, 1, 4}, {1, 0, 5}, {0, 4, 5}, {1, 5, 4}};
    CHECK_THROWS_WITH_AS(Mesh::build(q, f), doctest::Contains("non-manifold edge"), MeshError);
  }
  SUBCASE("degenerate face") {
    std::vector<Vec3> q = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 0, 1}};
    CHECK_THROWS_WITH_AS(Mesh::build(q, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}}),
                         doctest::Contains("degenerate face 0"), MeshError);
  }
  SUBCASE("unsupported extension") {
    CHECK_THROWS_AS(load_mesh("mesh.stl"), MeshError);
  }
}

TEST_CASE("ascii and binary PLY agree with OBJ") {
  Mesh ref = load_mesh(TEST_DATA_DIR "/tetrahedron.obj");
  std::ostringstream ascii;
  ascii << "ply\nformat ascii 1.0\nelement vertex 4\nproperty float x\nproperty float y\nproperty float z\n"
        << "element face 4\nproperty list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : ref.positions()) ascii << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Triangle& t : ref.faces()) ascii << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  std::istringstream in(ascii.str());
  Mesh m = read_ply(in);
  CHECK(m.num_edges() == 6);
  CHECK(m.faces() == ref.faces());

  std::string bin = "ply\nformat binary_little_endian 1.0\nelement vertex 4\nproperty double x\n"
                    "property double y\nproperty double z\nelement face 4\n"
                    "property list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : ref.positions()) {
    for (int k = 0; k < 3; ++k) {
      double d = v[k];
      bin.append(reinterpret_cast<const char*>(&d), 8);
    }
  }
  for (const Triangle& t : ref.faces()) {
    bin.push_back(3);
    for (int k = 0; k < 3; ++k) {
      std::int32_t i = t[k];
      bin.append(reinterpret_cast<const char*>(&i), 4);
    }
  }
  std::istringstream bin_in(bin);
  Mesh mb = read_ply(bin_in);
  CHECK(mb.faces() == ref.faces());
  CHECK((mb.position(2) - ref.position(2)).norm() == 0.0);
}

TEST_CASE("OBJ index forms and compaction") {
  std::istringstream in("v 9 9 9\nv 1 1 1\nv 1 -1 -1\nv -1 1 -1\nv -1 -1 1\n"
                        "f 2/1/1 3/2/2 4/3/3\nf -4 -2 -1\nf 2//1 5//1 3//1\nf 3 5 4\n");
  Mesh m = read_obj(in);
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_edges() == 6);
}

TEST_CASE("euler_genus") {
  CHECK(euler_genus(shapes::tetrahedron()).chi == 2);
  CHECK(euler_genus(shapes::tetrahedron()).genus == 0);
  EulerGenus t = euler_genus(load_mesh(TEST_DATA_DIR "/grid_torus_4x4.obj"));
  CHECK(t.chi == 0);
  CHECK(t.genus == 1);
  EulerGenus d = euler_genus(shapes::holed_slab(2, 1));
  CHECK(d.chi == -2);
  CHECK(d.genus == 2);
  CHECK(euler_genus(shapes::holed_slab(3, 2)).genus == 3);
}

TEST_CASE("local_chart") {
  SUBCASE("planar face") {
    Mesh m = Mesh::build({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}});
    LocalChart c = local_chart(m, 0);
    CHECK((c.coords[0] - Vec2(0, 0)).norm() < 1e-15);
    CHECK((c.coords[1] - Vec2(1, 0)).norm() < 1e-15);
    CHECK((c.coords[2] - Vec2(0, 1)).norm() < 1e-15);
  }
  SUBCASE("rotated face") {
    Mesh m = Mesh::build({{0, 0, 0}, {0, 0, 2}, {0, 1, 1}, {1, 0, 0}}, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}});
    LocalChart c = local_chart(m, 0);
    CHECK((c.coords[0] - Vec2(0, 0)).norm() < 1e-15);
    CHECK((c.coords[1] - Vec2(2, 0)).norm() < 1e-15);
    CHECK((c.coords[2] - Vec2(1, 1)).norm() < 1e-15);
  }
  SUBCASE("collinear vertices are rejected") {
    std::vector<Vec3> q = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 0, 1}};
    CHECK_THROWS_AS(Mesh::build(q, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}}), MeshError);
  }
  SUBCASE("chart is an isometry") {
    Mesh m = shapes::smoothed(shapes::holed_slab(2, 2), 3);
    double worst = 0.0;
    for (int f = 0; f < m.num_faces(); ++f) {
      LocalChart c = local_chart(m, f);
      CHECK(c.coords[2].y() > 0.0);
      for (int i = 0; i < 3; ++i) {
        double d3 = (m.corner(3 * f + (i + 1) % 3) - m.corner(3 * f + i)).norm();
        double d2 = (c.coords[(i + 1) % 3] - c.coords[i]).norm();
        worst = std::max(worst, std::abs(d3 - d2) / d3);
      }
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("cotan_weights") {
  SUBCASE("two equilateral triangles") {
    const double h = std::sqrt(3.0) / 2.0;
    // Regular tetrahedron: every edge is opposite two 60 degree angles.
    Mesh m = shapes::tetrahedron();
    EdgeWeights w = cotan_weights(m);
    for (int e = 0; e < m.num_edges(); ++e) CHECK(w[e] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
    (void)h;
  }
  SUBCASE("right angles give zero") {
    Mesh m = pillow(1.0, 1.0);
    EdgeWeights w = cotan_weights(m);
    CHECK(std::abs(weight_between(m, w, 0, 2)) < 1e-15);
  }
  SUBCASE("120 degree angles give -1/sqrt(3)") {
    // Opposite angles of 120 degrees at vertices 1 and 3.
    Mesh m = pillow(std::sqrt(3.0), 1.0);
    EdgeWeights w = cotan_weights(m);
    CHECK(weight_between(m, w, 0, 2) == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(w.min() < 0.0);
  }
  SUBCASE("rigid motion invariance") {
    Mesh m = shapes::smoothed(shapes::holed_slab(1, 2), 2);
    Eigen::Matrix3d rot = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    Mesh moved = shapes::transformed(m, rot, Vec3(3, -1, 2));
    EdgeWeights a = cotan_weights(m), b = cotan_weights(moved);
    for (int e = 0; e < m.num_edges(); ++e) CHECK(std::abs(a[e] - b[e]) < 1e-10);
  }
  SUBCASE("chart recomputation matches") {
    Mesh m = shapes::smoothed(shapes::holed_slab(1, 2), 2);
    EdgeWeights w = cotan_weights(m);
    std::vector<double> from_chart(m.num_edges(), 0.0);
    for (int f = 0; f < m.num_faces(); ++f) {
      LocalChart c = local_chart(m, f);
      for (int i = 0; i < 3; ++i) {
        Vec2 a = c.coords[i] - c.coords[(i + 2) % 3];
        Vec2 b = c.coords[(i + 1) % 3] - c.coords[(i + 2) % 3];
        double cross = a.x() * b.y() - a.y() * b.x();
        from_chart[m.edge(3 * f + i)] += 0.5 * a.dot(b) / std::abs(cross);
      }
    }
    for (int e = 0; e < m.num_edges(); ++e) CHECK(std::abs(from_chart[e] - w[e]) < 1e-10);
  }
  SUBCASE("flat torus grid") {
    Mesh m = shapes::flat_torus(4, 4);
    EdgeWeights w = cotan_weights(m);
    // Axis edges 1/2 (cot 45 * 2 / 2), diagonals 0.
    int zeros = 0, halves = 0;
    for (int e = 0; e < m.num_edges(); ++e) {
      if (std::abs(w[e]) < 1e-12) ++zeros;
      if (std::abs(w[e] - 1.0) < 1e-12) ++halves;
    }
    CHECK(zeros == 16);
    CHECK(halves == 32);
  }
}

TEST_CASE("face_area") {
  Mesh m = Mesh::build({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}});
  CHECK(face_area(m, 0) == doctest::Approx(0.5));
  Mesh t = shapes::tetrahedron();
  // Edge length 2 sqrt 2.
  CHECK(face_area(t, 0) == doctest::Approx(std::sqrt(3.0) / 4.0 * 8.0));
  CHECK_FALSE(is_degenerate_face(t, 0));
}

TEST_CASE("preprocess_negative_weights") {
  SUBCASE("delaunay mesh unchanged") {
    Mesh m = shapes::icosphere(2);
    PreprocessResult r = preprocess_negative_weights(m, PreprocessMode::swap);
    CHECK(r.report.empty());
    CHECK(r.mesh.num_faces() == m.num_faces());
  }
  SUBCASE("duplicate edge forces a split") {
    Mesh m = pillow(std::sqrt(3.0), 1.0);
    PreprocessResult r = preprocess_negative_weights(m, PreprocessMode::swap);
    CHECK(r.report.swaps == 0);
    CHECK(r.report.splits >= 1);
    CHECK(r.report.residual_negative.empty());
    CHECK(cotan_weights(r.mesh).min() >= -1e-12);
    CHECK(euler_genus(r.mesh).genus == 0);
  }
  SUBCASE("legal flip") {
    // Rhombus lid with 120 degree angles over a pyramid; the lid diagonal
    // can be flipped to the other diagonal.
    const double s3 = std::sqrt(3.0);
    std::vector<Vec3> p = {{-s3, 0, 0}, {0, -1, 0}, {s3, 0, 0}, {0, 1, 0}, {0, 0, -1}};
    std::vector<Triangle> f = {{0, 1, 2}, {0, 2, 3}, {1, 0, 4}, {2, 1, 4}, {3, 2, 4}, {0, 3, 4}};
    Mesh m = Mesh::build(p, f);
    CHECK(cotan_weights(m).min() < 0.0);
    PreprocessResult r = preprocess_negative_weights(m, PreprocessMode::swap);
    CHECK(r.report.swaps > 0);
    CHECK(r.report.residual_negative.empty());
    CHECK(cotan_weights(r.mesh).min() >= -1e-12);
    for (int v = 0; v < m.num_vertices(); ++v) CHECK(r.mesh.position(v) == m.position(v));
    CHECK(euler_genus(r.mesh).chi == 2);
    CHECK(r.mesh.find_edge(1, 3) >= 0);
    CHECK(r.mesh.find_edge(0, 2) < 0);
    CHECK(weight_between(r.mesh, cotan_weights(r.mesh), 1, 3) > 0.0);
  }
  SUBCASE("split mode keeps topology") {
    Mesh m = pillow(std::sqrt(3.0), 1.0);
    PreprocessResult r = preprocess_negative_weights(m, PreprocessMode::split);
    CHECK(r.report.swaps == 0);
    CHECK(r.report.splits >= 1);
    CHECK(euler_genus(r.mesh).chi == 2);
  }
  SUBCASE("none reports only") {
    Mesh m = pillow(std::sqrt(3.0), 1.0);
    PreprocessResult r = preprocess_negative_weights(m, PreprocessMode::none);
    CHECK(r.report.residual_negative.size() >= 1);
    CHECK(r.mesh.num_faces() == m.num_faces());
  }
  CHECK(parse_preprocess_mode("split") == PreprocessMode::split);
  CHECK_THROWS_AS(parse_preprocess_mode("bogus"), Error);
}

TEST_CASE("mesh invariants over generated shapes") {
  std::vector<Mesh> corpus = {shapes::tetrahedron(), shapes::icosphere(1), shapes::uv_sphere(6, 8),
                              shapes::ring_torus(3, 1, 12, 8), shapes::flat_torus(5, 4, 2.0, 1.0),
                              shapes::holed_slab(2, 2, 2)};
  for (const Mesh& m : corpus) {
    CHECK(3 * m.num_faces() == 2 * m.num_edges());
    CHECK((m.num_vertices() - m.num_edges() + m.num_faces()) % 2 == 0);
    for (int h = 0; h < m.num_halfedges(); ++h) {
      CHECK(m.twin(m.twin(h)) == h);
      CHECK(m.tail(m.twin(h)) == m.head(h));
    }
    for (int v = 0; v < m.num_vertices(); ++v) {
      for (int h : m.outgoing(v)) CHECK(m.tail(h) == v);
    }
  }
}
