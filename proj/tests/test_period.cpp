#include <cmath>

#include "doctest.h"

#include <Eigen/LU>

#include "conformal/cohomology.h"
#include "conformal/harmonic.h"
#include "conformal/period.h"
#include "conformal/shapes.h"

using namespace conformal;

namespace {

struct Run {
  Mesh mesh;
  HomologyBasis basis;
  HolomorphicBasis holo;
  PeriodData periods;
};

Run run(const Mesh& m, const HomologyBasis& basis) {
  Run r{m, basis, {}, {}};
  DualBasis db = dual_basis(m, basis);
  std::vector<OneForm> forms;
  for (auto& h : diffuse_all(m, cotan_weights(m), db.forms)) forms.push_back(h.form);
  r.holo = holomorphic_forms(m, basis, forms);
  r.periods = compute_periods(m, basis, r.holo);
  return r;
}

Run run(const Mesh& m) { return run(m, homology_basis(m)); }

// Row/column pair of a flat_torus grid, a along x and b along y.
HomologyBasis grid_basis(const Mesh& m, int nx, int ny) {
  std::vector<int> a, b;
  for (int i = 0; i < nx; ++i) a.push_back(i);
  for (int j = 0; j < ny; ++j) b.push_back(j * nx);
  HomologyBasis hb;
  hb.loops = {a, b};
  hb.cycles = {chain_from_loop(m, a), chain_from_loop(m, b)};
  hb.canonical = true;
  hb.transform = IntMatrix::Identity(2, 2);
  return hb;
}

}  // namespace

TEST_CASE("period_matrix_R") {
  IntMatrix c = standard_pairing(1);
  PeriodR r = period_matrix_R(c, Eigen::MatrixXd::Identity(2, 2));
  CHECK((r.R + c.cast<double>()).norm() == 0.0);
  CHECK(r.square_defect == 0.0);
  CHECK(r.complex_structure);
  Eigen::MatrixXd s(2, 2);
  s << 3.0, 0.5, 0.5, 1.0;
  CHECK_FALSE(period_matrix_R(c, s).complex_structure);
  CHECK_THROWS_AS(period_matrix_R(IntMatrix::Zero(2, 2), s), Error);
}

TEST_CASE("flat square torus") {
  const int n = 16;
  Mesh m = shapes::flat_torus(n, n);
  Run r = run(m, grid_basis(m, n, n));
  const PeriodData& p = r.periods;
  CHECK((p.S - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-6);
  CHECK(p.symmetry_defect < 1e-6);
  CHECK(p.min_eigenvalue > 0.0);
  CHECK(p.r_square_defect < 1e-3);
  CHECK(p.cr_defect < 1e-9);
  REQUIRE(p.P.cols() == 1);
  CHECK(std::abs(p.P(0, 0) - 1.0) < 1e-6);
  CHECK(std::abs(p.tau(0, 0) - std::complex<double>(0, 1)) < 0.02);
  // R = -C for S = I
  CHECK((p.R + p.C.cast<double>()).norm() < 1e-6);
}

TEST_CASE("rectangle torus encodes modulus 2") {
  const int n = 12;
  Mesh m = shapes::flat_torus(n, 2 * n, 1.0, 2.0);
  Run r = run(m, grid_basis(m, n, 2 * n));
  const PeriodData& p = r.periods;
  CHECK(std::abs(p.tau(0, 0) - std::complex<double>(0, 2)) / 2.0 < 0.02);
  // analytic: S = diag(lx / ly, ly / lx)
  CHECK(std::abs(p.S(0, 1)) < 1e-6);
  CHECK(p.S(0, 0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(p.S(1, 1) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(p.r_square_defect < 1e-3);
}

TEST_CASE("recombined forms have real periods C and imaginary periods S") {
  Mesh m = shapes::ring_torus(2, 1, 20, 12);
  Run r = run(m);
  DualHolomorphic dh = dual_holomorphic_basis(m, r.basis, r.holo);
  const int n = 2;
  for (int j = 0; j < n; ++j) {
    OneForm re(m.num_edges()), im(m.num_edges());
    for (int k = 0; k < n; ++k) {
      re += dh.coeffs(k, j) * r.holo.all[k].real;
      im += dh.coeffs(k, j) * r.holo.all[k].imag;
    }
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(integrate(re, r.basis.cycles[i]) - dh.C(i, j)) < 1e-6);
      CHECK(std::abs(integrate(im, r.basis.cycles[i]) - dh.S(i, j)) < 1e-6);
    }
  }
}

TEST_CASE("Riemann bilinear relations on curved meshes") {
  for (const Mesh& m : {shapes::ring_torus(2, 1, 24, 14), shapes::holed_slab(2, 6, 4)}) {
    Run r = run(m);
    const PeriodData& p = r.periods;
    CHECK(p.symmetry_defect < 1e-6);
    CHECK(p.min_eigenvalue > 0.0);
    CHECK(p.r_square_defect < 5e-2);
    CHECK(p.cr_defect < 1e-9);
    CHECK(p.P.cols() == p.genus());
  }
}

TEST_CASE("R^2 + I shrinks under refinement") {
  double coarse = run(shapes::ring_torus(2, 1, 16, 8)).periods.r_square_defect;
  double fine = run(shapes::ring_torus(2, 1, 32, 16)).periods.r_square_defect;
  CHECK(fine < coarse);
  coarse = run(shapes::holed_slab(2, 3, 4)).periods.r_square_defect;
  fine = run(shapes::holed_slab(2, 6, 4)).periods.r_square_defect;
  CHECK(fine < coarse);
}

TEST_CASE("periods are invariant under uniform scaling") {
  Mesh m = shapes::ring_torus(2, 1, 16, 10);
  HomologyBasis hb = homology_basis(m);
  Run a = run(m, hb);
  Run b = run(shapes::scaled(m, 3.0), hb);
  CHECK((a.periods.P - b.periods.P).norm() < 1e-6);
}

TEST_CASE("verify_equivalence") {
  const int n = 12;
  Mesh sq = shapes::flat_torus(n, n);
  Run a = run(sq, grid_basis(sq, n, n));
  IntMatrix id = IntMatrix::Identity(2, 2);
  CHECK(verify_equivalence(a.periods, a.periods, id).equivalent);

  Mesh rect = shapes::flat_torus(n, 2 * n, 1.0, 2.0);
  Run b = run(rect, grid_basis(rect, n, 2 * n));
  CHECK_FALSE(verify_equivalence(a.periods, b.periods, id).equivalent);

  // swapped basis (b, -a) on the rectangle: tau -> -1/tau
  HomologyBasis swapped = grid_basis(rect, n, 2 * n);
  std::swap(swapped.cycles[0], swapped.cycles[1]);
  swapped.cycles[1] = swapped.cycles[1] * -1;
  std::swap(swapped.loops[0], swapped.loops[1]);
  std::reverse(swapped.loops[1].begin(), swapped.loops[1].end());
  Run c = run(rect, swapped);
  IntMatrix nswap(2, 2);
  nswap << 0, -1, 1, 0;
  EquivalenceCheck eq = verify_equivalence(b.periods, c.periods, nswap);
  CHECK(eq.equivalent);
  CHECK(eq.symplectic_checked);
  CHECK(std::abs(eq.determinant) == 1);
  CHECK(std::abs(c.periods.tau(0, 0) + 1.0 / b.periods.tau(0, 0)) < 1e-6);

  IntMatrix bad(2, 2);
  bad << 2, 0, 0, 1;
  CHECK_FALSE(verify_equivalence(a.periods, a.periods, bad).equivalent);
}

TEST_CASE("genus 0 has empty periods") {
  Mesh m = shapes::icosphere(1);
  Run r = run(m);
  CHECK(r.periods.C.size() == 0);
}
