#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"

#include "conformal/homology.h"
#include "conformal/shapes.h"
#include "conformal/smith.h"

using namespace conformal;

namespace {

// Winding numbers of a vertex loop on the n x n ring torus grid (id = j*n + i).
std::pair<int, int> grid_winding(const std::vector<int>& loop, int n) {
  int di = 0, dj = 0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    int a = loop[k], b = loop[(k + 1) % loop.size()];
    int si = (b % n) - (a % n), sj = (b / n) - (a / n);
    if (si > 1) si -= n;
    if (si < -1) si += n;
    if (sj > 1) sj -= n;
    if (sj < -1) sj += n;
    di += si;
    dj += sj;
  }
  return {di / n, dj / n};
}

std::set<std::pair<int, int>> edge_set(const std::vector<int>& loop) {
  std::set<std::pair<int, int>> s;
  for (std::size_t k = 0; k < loop.size(); ++k) s.insert(std::minmax(loop[k], loop[(k + 1) % loop.size()]));
  return s;
}

int shared_vertices(const std::vector<int>& a, const std::vector<int>& b) {
  std::set<int> sa(a.begin(), a.end());
  int n = 0;
  for (int v : b) n += sa.count(v);
  return n;
}

bool is_simple(const std::vector<int>& loop) {
  std::set<int> s(loop.begin(), loop.end());
  return s.size() == loop.size();
}

}  // namespace

TEST_CASE("betti numbers from Smith normal form agree with the tree/cotree count") {
  for (const Mesh& m : {shapes::ring_torus(2, 1, 5, 4), shapes::holed_slab(2, 1), shapes::icosphere(1)}) {
    IntSparse d1 = boundary_matrix(m, 1), d2 = boundary_matrix(m, 2);
    auto f1 = smith_invariant_factors(to_big(d1));
    auto f2 = smith_invariant_factors(to_big(d2));
    for (const BigInt& d : f1) CHECK(d == 1);
    for (const BigInt& d : f2) CHECK(d == 1);  // no torsion
    int b1 = m.num_edges() - static_cast<int>(f1.size()) - static_cast<int>(f2.size());
    HomologyContext ctx(m);
    CHECK(b1 == 2 * ctx.genus());
    CHECK(b1 == 2 * euler_genus(m).genus);
  }
}

TEST_CASE("generator loops and cocycles are dual") {
  Mesh m = shapes::holed_slab(2, 2);
  HomologyContext ctx(m);
  REQUIRE(ctx.genus() == 2);
  for (int k = 0; k < 4; ++k) {
    auto c = ctx.loop_coordinates(ctx.generator_loops()[k]);
    for (int j = 0; j < 4; ++j) CHECK(c[j] == (j == k ? 1 : 0));
    CHECK(is_simple(ctx.generator_loops()[k]));
  }
  // Cocycles are closed.
  for (int k = 0; k < 4; ++k) {
    for (int f = 0; f < m.num_faces(); ++f) {
      CHECK(ctx.cocycle(k, 3 * f) + ctx.cocycle(k, 3 * f + 1) + ctx.cocycle(k, 3 * f + 2) == 0);
    }
  }
  const IntMatrix& g = ctx.generator_pairing();
  CHECK(g + g.transpose() == IntMatrix::Zero(4, 4));
  BigMatrix big(4, std::vector<BigInt>(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) big[i][j] = g(i, j);
  CHECK(abs(determinant(big)) == 1);
}

TEST_CASE("loop dual cochain is closed and counts crossings") {
  const int n = 6;
  Mesh m = shapes::ring_torus(3, 1, n, n);
  std::vector<int> a, b;
  for (int i = 0; i < n; ++i) a.push_back(2 * n + i);  // along i at j = 2
  for (int j = 0; j < n; ++j) b.push_back(j * n + 3);  // along j at i = 3
  std::vector<int> pd = loop_dual_cochain(m, b);
  for (int f = 0; f < m.num_faces(); ++f) {
    int s = 0;
    for (int i = 0; i < 3; ++i) s += m.edge_sign(3 * f + i) * pd[m.edge(3 * f + i)];
    CHECK(s == 0);
  }
  std::int64_t ab = intersection_with_loop(m, chain_from_loop(m, a), b);
  std::int64_t ba = intersection_with_loop(m, chain_from_loop(m, b), a);
  CHECK(std::abs(ab) == 1);
  CHECK(ab == -ba);
  CHECK(intersection_with_loop(m, chain_from_loop(m, a), a) == 0);
}

TEST_CASE("homology_basis") {
  SUBCASE("grid torus") {
    const int n = 4;
    Mesh m = shapes::ring_torus(2, 1, n, n);
    HomologyBasis b = homology_basis(m);
    REQUIRE(b.cycles.size() == 2);
    CHECK(b.canonical);
    auto [ai, aj] = grid_winding(b.loops[0], n);
    auto [bi, bj] = grid_winding(b.loops[1], n);
    CHECK(std::abs(ai * bj - aj * bi) == 1);
    for (const Chain& c : b.cycles) CHECK(boundary(m, c).empty());
    IntMatrix c = intersection_matrix(m, b);
    CHECK(c(0, 1) == -1);
    CHECK(c(1, 0) == 1);
  }
  SUBCASE("tetrahedron") {
    HomologyBasis b = homology_basis(shapes::tetrahedron());
    CHECK(b.cycles.empty());
  }
  SUBCASE("double torus") {
    Mesh m = shapes::holed_slab(2, 3);
    HomologyBasis b = homology_basis(m);
    REQUIRE(b.cycles.size() == 4);
    IntMatrix c = intersection_matrix(m, b);
    CHECK(c == -standard_pairing(2));
    for (const auto& l : b.loops) CHECK(is_simple(l));
    // Disjoint except a_i, b_i crossing once.
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        int shared = shared_vertices(b.loops[i], b.loops[j]);
        CHECK(shared == (j == i + 2 ? 1 : 0));
      }
    }
  }
  SUBCASE("genus three smoothed") {
    Mesh m = shapes::holed_slab(3, 3, 4);
    HomologyBasis b = homology_basis(m);
    CHECK(pairing_matrix(m, b) == standard_pairing(3));
  }
}

TEST_CASE("shorten_cycle") {
  const int n = 8;
  Mesh m = shapes::flat_torus(n, n);
  auto id = [&](int i, int j) { return (j % n) * n + (i % n); };
  std::vector<int> straight;
  for (int i = 0; i < n; ++i) straight.push_back(id(i, 0));
  Chain c = chain_from_loop(m, straight);
  SUBCASE("geodesic loop unchanged") {
    CHECK(shorten_cycle(m, c) == c);
  }
  SUBCASE("spike removed") {
    std::vector<int> spiked = {id(0, 0), id(1, 0), id(2, 0), id(2, 1), id(2, 2), id(3, 2), id(3, 1), id(3, 0),
                               id(4, 0), id(5, 0), id(6, 0), id(7, 0)};
    Chain s = chain_from_loop(m, spiked);
    Chain out = shorten_cycle(m, s);
    CHECK(chain_length(m, out) < chain_length(m, s) - 1e-12);
    CHECK(chain_length(m, out) == doctest::Approx(1.0));
    HomologyContext ctx(m);
    CHECK(ctx.coordinates(out) == ctx.coordinates(s));
  }
  SUBCASE("different detours give the same class") {
    std::vector<int> up = {id(0, 0), id(1, 0), id(1, 1), id(2, 1), id(2, 0), id(3, 0), id(4, 0), id(5, 0), id(6, 0), id(7, 0)};
    std::vector<int> down = {id(0, 0), id(1, 0), id(2, 0), id(3, 0), id(4, 0), id(4, 7), id(5, 7), id(5, 0), id(6, 0), id(7, 0)};
    Chain a = shorten_cycle(m, chain_from_loop(m, up));
    Chain b = shorten_cycle(m, chain_from_loop(m, down));
    HomologyContext ctx(m);
    CHECK(ctx.coordinates(a) == ctx.coordinates(b));
    CHECK(chain_length(m, a) == doctest::Approx(1.0));
  }
}

TEST_CASE("perturb_transversal") {
  SUBCASE("disjoint cycles unchanged") {
    Mesh m = shapes::holed_slab(2, 3);
    HomologyBasis b = homology_basis(m);
    HomologyBasis p = perturb_transversal(m, b);
    CHECK(p.loops == b.loops);
  }
  SUBCASE("shared path rerouted, one signed crossing on the torus") {
    Mesh m = shapes::ring_torus(3, 1, 12, 9);
    HomologyBasis b = generator_basis(m);
    REQUIRE(b.loops.size() == 2);
    auto ea = edge_set(b.loops[0]), eb = edge_set(b.loops[1]);
    int shared_before = 0;
    for (const auto& e : eb) shared_before += ea.count(e);
    HomologyBasis p = perturb_transversal(m, b);
    auto pa = edge_set(p.loops[0]), pb = edge_set(p.loops[1]);
    for (const auto& e : pb) CHECK(pa.count(e) == 0);
    CHECK(is_simple(p.loops[1]));
    HomologyContext ctx(m);
    CHECK(ctx.coordinates(p.cycles[1]) == ctx.coordinates(b.cycles[1]));
    CHECK(std::abs(intersection_with_loop(m, p.cycles[0], p.loops[1])) == 1);
    CHECK(shared_vertices(p.loops[0], p.loops[1]) >= 1);
    MESSAGE("shared edges before: " << shared_before);
  }
  SUBCASE("genus two generators") {
    Mesh m = shapes::holed_slab(2, 4);
    HomologyBasis b = generator_basis(m);
    HomologyBasis p = perturb_transversal(m, b);
    for (std::size_t i = 0; i < p.loops.size(); ++i) {
      for (std::size_t j = i + 1; j < p.loops.size(); ++j) {
        auto ei = edge_set(p.loops[i]);
        for (const auto& e : edge_set(p.loops[j])) CHECK(ei.count(e) == 0);
      }
    }
    CHECK(pairing_matrix(m, p) == pairing_matrix(m, b));
  }
}

TEST_CASE("intersection matrix and canonicalization") {
  Mesh m = shapes::holed_slab(2, 3);
  HomologyBasis gen = generator_basis(m);
  IntMatrix c = intersection_matrix(m, gen);
  CHECK(c + c.transpose() == IntMatrix::Zero(4, 4));

  SUBCASE("already canonical is the identity") {
    HomologyBasis b = homology_basis(m);
    HomologyBasis cb = canonicalize_basis(m, b);
    CHECK(cb.transform == IntMatrix::Identity(4, 4));
    CHECK(cb.loops == b.loops);
  }
  SUBCASE("genus two generators reach the symplectic form") {
    HomologyBasis cb = canonicalize_basis(m, gen);
    CHECK(pairing_matrix(m, cb) == standard_pairing(2));
    IntMatrix t = cb.transform;
    CHECK(t * pairing_matrix(m, gen) * t.transpose() == standard_pairing(2));
  }
  SUBCASE("not a basis") {
    Mesh t = shapes::ring_torus(3, 1, 8, 6);
    HomologyBasis b = homology_basis(t);
    b.cycles[1] = b.cycles[1] * 2;
    b.loops.clear();
    CHECK(intersection_matrix(t, b)(0, 1) == -2);
    CHECK_THROWS_WITH_AS(canonicalize_basis(t, b), doctest::Contains("not a basis"), Error);
  }
  SUBCASE("duplicated cycle is singular") {
    HomologyBasis b = gen;
    b.cycles[1] = b.cycles[0];
    BigMatrix big(4, std::vector<BigInt>(4));
    IntMatrix p = pairing_matrix(m, b);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) big[i][j] = p(i, j);
    CHECK(determinant(big) == 0);
    CHECK_THROWS_AS(canonicalize_basis(m, b), Error);
  }
}

TEST_CASE("fundamental_domain") {
  auto check_disk = [](const Mesh& m) {
    FundamentalDomain fd = fundamental_domain(m);
    CHECK(fd.euler_characteristic(m) == 1);
    REQUIRE(fd.boundary_loops.size() == 1);
    CHECK(static_cast<int>(fd.boundary_loops[0].size()) == 2 * fd.num_cut_edges);
    for (int h : fd.boundary_loops[0]) CHECK(fd.cut_edge[m.edge(h)]);
    CHECK(fd.faces(m).size() == static_cast<std::size_t>(m.num_faces()));
  };
  check_disk(shapes::tetrahedron());
  check_disk(shapes::ring_torus(2, 1, 4, 4));
  check_disk(shapes::holed_slab(2, 2));
  FundamentalDomain tet = fundamental_domain(shapes::tetrahedron());
  CHECK(tet.num_cut_edges == 1);
}

TEST_CASE("flood_bounded_domain") {
  SUBCASE("sphere equator") {
    const int bands = 8, sectors = 10;
    Mesh m = shapes::uv_sphere(bands, sectors);
    std::vector<int> eq;
    for (int j = 0; j < sectors; ++j) eq.push_back(1 + (bands / 2 - 1) * sectors + j);
    Chain r = chain_from_loop(m, eq);
    FloodResult f = flood_bounded_domain(m, r);
    REQUIRE(f.faces.has_value());
    CHECK(static_cast<int>(f.faces->coeffs.size()) == m.num_faces() / 2);
    CHECK(boundary(m, *f.faces) == r);
  }
  SUBCASE("small loop bounds its disk") {
    Mesh m = shapes::icosphere(2);
    std::vector<int> link;
    for (int h : m.outgoing(7)) link.push_back(m.head(h));
    Chain r = chain_from_loop(m, link);
    FloodResult f = flood_bounded_domain(m, r);
    REQUIRE(f.faces.has_value());
    CHECK(static_cast<int>(f.faces->coeffs.size()) == m.degree(7));
    CHECK(boundary(m, *f.faces) == r);
  }
  SUBCASE("torus meridian") {
    const int n = 6;
    Mesh m = shapes::ring_torus(3, 1, n, n);
    std::vector<int> mer;
    for (int j = 0; j < n; ++j) mer.push_back(j * n);
    FloodResult f = flood_bounded_domain(m, chain_from_loop(m, mer));
    CHECK_FALSE(f.faces.has_value());
    CHECK(std::any_of(f.class_vector.begin(), f.class_vector.end(), [](auto x) { return x != 0; }));
  }
}

TEST_CASE("flood_bounded_domain on face-boundary sums") {
  Mesh m = shapes::holed_slab(2, 2, 1);
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> face(0, m.num_faces() - 1);
  std::uniform_int_distribution<int> coeff(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    Chain faces;
    faces.dim = 2;
    for (int k = 0; k < 15; ++k) faces.add(face(rng), coeff(rng));
    Chain r = boundary(m, faces);
    if (r.empty()) continue;
    FloodResult f = flood_bounded_domain(m, r);
    REQUIRE(f.faces.has_value());
    CHECK(boundary(m, *f.faces) == r);
    for (auto [cell, c] : f.faces->coeffs) CHECK(c > 0);
  }
}
