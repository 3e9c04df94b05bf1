#include <cmath>

#include "doctest.h"

#include "conformal/cohomology.h"
#include "conformal/harmonic.h"
#include "conformal/hodge.h"
#include "conformal/shapes.h"

using namespace conformal;

namespace {

struct FlatSetup {
  Mesh mesh;
  HomologyBasis basis;
  std::vector<OneForm> harmonic;
};

// Unit-square flat torus with the row/column canonical pair.
FlatSetup flat_setup(int n, double ly = 1.0) {
  FlatSetup s{shapes::flat_torus(n, n, 1.0, ly), {}, {}};
  std::vector<int> a, b;
  for (int i = 0; i < n; ++i) a.push_back(i);
  for (int j = 0; j < n; ++j) b.push_back(j * n);
  s.basis.loops = {a, b};
  s.basis.cycles = {chain_from_loop(s.mesh, a), chain_from_loop(s.mesh, b)};
  s.basis.canonical = true;
  s.basis.transform = IntMatrix::Identity(2, 2);
  DualBasis db = dual_basis(s.mesh, s.basis);
  for (auto& h : diffuse_all(s.mesh, cotan_weights(s.mesh), db.forms)) s.harmonic.push_back(h.form);
  return s;
}

}  // namespace

TEST_CASE("star_faceform") {
  FaceForm ff;
  ff.coeffs = {Vec2(1, 0), Vec2(0, 1), Vec2(2, -3)};
  FaceForm s = star_faceform(ff);
  CHECK(s.coeffs[0] == Vec2(0, 1));
  CHECK(s.coeffs[1] == Vec2(-1, 0));
  FaceForm ss = star_faceform(s);
  for (int i = 0; i < 3; ++i) CHECK(ss.coeffs[i] == -ff.coeffs[i]);
}

TEST_CASE("wedge_integral") {
  FlatSetup s = flat_setup(8);
  FaceForm dx = gamma(s.mesh, s.harmonic[0]);
  FaceForm dy = gamma(s.mesh, s.harmonic[1]);
  CHECK(wedge_integral(s.mesh, dx, dy, false) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(wedge_integral(s.mesh, dx, dx, false)) < 1e-14);
  CHECK(wedge_integral(s.mesh, dx, dx, true) == doctest::Approx(1.0).epsilon(1e-12));
  FaceForm zero;
  zero.coeffs.assign(s.mesh.num_faces(), Vec2::Zero());
  CHECK(wedge_integral(s.mesh, zero, zero, true) == 0.0);
}

TEST_CASE("hodge star on the flat unit torus") {
  FlatSetup s = flat_setup(16);
  HodgeStar star(s.mesh, s.basis, s.harmonic);
  Eigen::VectorXd alpha = star.coefficients(s.harmonic[0]);
  CHECK(std::abs(alpha(0)) < 1e-6);
  CHECK(std::abs(alpha(1) - 1.0) < 1e-6);
  Eigen::VectorXd twice = star.matrix() * alpha;
  CHECK((twice + Eigen::VectorXd::Unit(2, 0)).norm() < 1e-3);
  CHECK(star.coefficients(OneForm(s.mesh.num_edges())).norm() == 0.0);
  CHECK(star.wedge_agreement() < 1e-9);
  CHECK(star.solve_residual() < 1e-8);
  // free function agrees
  CHECK((hodge_star_coeffs(s.mesh, s.basis, s.harmonic, s.harmonic[1]) - star.matrix().col(1)).norm() < 1e-12);
}

TEST_CASE("hodge star on curved meshes") {
  for (const Mesh& m : {shapes::ring_torus(2, 1, 24, 14), shapes::holed_slab(2, 3, 4)}) {
    HomologyBasis hb = homology_basis(m);
    DualBasis db = dual_basis(m, hb);
    std::vector<OneForm> forms;
    for (auto& h : diffuse_all(m, cotan_weights(m), db.forms)) forms.push_back(h.form);
    HodgeStar star(m, hb, forms);
    const int n = star.size();
    CHECK(star.wedge_agreement() < 1e-6);
    // antisymmetric, and equal to J for a canonical basis
    CHECK((star.wedge_matrix() + star.wedge_matrix().transpose()).norm() < 1e-12);
    CHECK((star.wedge_matrix() - standard_pairing(n / 2).cast<double>()).norm() < 1e-12);
    Eigen::MatrixXd sq = star.matrix() * star.matrix() + Eigen::MatrixXd::Identity(n, n);
    CHECK(sq.lpNorm<Eigen::Infinity>() < 5e-2);
    for (const OneForm& w : forms) {
      FaceForm g = gamma(m, w);
      CHECK(wedge_integral(m, g, g, true) > 0.0);
    }
  }
}

TEST_CASE("holomorphic basis") {
  SUBCASE("flat torus: one form, proportional to dx + i dy") {
    FlatSetup s = flat_setup(12);
    HolomorphicBasis hb = holomorphic_forms(s.mesh, s.basis, s.harmonic);
    REQUIRE(hb.independent.size() == 1);
    const HolomorphicForm& z = hb.all[hb.independent[0]];
    CHECK(z.index == 0);
    // dy is the y-dual harmonic form
    for (int e = 0; e < s.mesh.num_edges(); ++e) {
      CHECK(std::abs(z.real.values[e] - s.harmonic[0].values[e]) < 1e-12);
      CHECK(std::abs(z.imag.values[e] - s.harmonic[1].values[e]) < 1e-6);
    }
    CHECK(hb.star_square_defect < 1e-3);
  }
  SUBCASE("genus 2 has two independent forms") {
    HolomorphicBasis hb = holomorphic_basis(shapes::holed_slab(2, 3, 4), 2);
    CHECK(hb.all.size() == 4);
    CHECK(hb.independent.size() == 2);
    CHECK(hb.wedge_agreement < 1e-6);
  }
  SUBCASE("sphere") {
    CHECK(holomorphic_basis(shapes::icosphere(2)).all.empty());
  }
}

TEST_CASE("independent_columns") {
  Eigen::MatrixXcd v(2, 2);
  v << std::complex<double>(1, 0), std::complex<double>(0, -1), std::complex<double>(0, 1),
      std::complex<double>(1, 0);
  CHECK(independent_columns(v, 1) == std::vector<int>{0});
  CHECK_THROWS_AS(independent_columns(v, 2), Error);
}
