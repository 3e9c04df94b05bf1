#include "conformal/cohomology.h"

#include <cmath>
#include <set>
#include <string>

#include <Eigen/LU>
#include <Eigen/SparseLU>

#include "conformal/parallel.h"

namespace conformal {

namespace {

std::vector<int> successor_map(const Mesh& mesh, const std::vector<int>& loop, const char* name) {
  if (loop.size() < 3) throw Error(std::string("loop ") + name + " has fewer than 3 vertices");
  std::vector<int> next(mesh.num_vertices(), -1);
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    int u = loop[i];
    if (u < 0 || u >= mesh.num_vertices()) throw Error(std::string("loop ") + name + " has an invalid vertex");
    if (next[u] >= 0) throw Error(std::string("loop ") + name + " is not simple (vertex " + std::to_string(u) + ")");
    next[u] = loop[(i + 1) % n];
    if (mesh.find_halfedge(u, next[u]) < 0) {
      throw Error(std::string("loop ") + name + " uses a missing edge (" + std::to_string(u) + "," +
                  std::to_string(next[u]) + ")");
    }
  }
  return next;
}

}  // namespace

SlicedSurface slice_along_pair(const Mesh& mesh, const Chain& a, const Chain& b) {
  return slice_along_pair(mesh, loop_from_chain(mesh, a), loop_from_chain(mesh, b));
}

SlicedSurface slice_along_pair(const Mesh& mesh, const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> next_a = successor_map(mesh, a, "a");
  std::vector<int> next_b = successor_map(mesh, b, "b");
  std::vector<int> shared;
  for (int v : a) {
    if (next_b[v] >= 0) shared.push_back(v);
  }
  if (shared.size() == a.size() && a.size() == b.size()) throw Error("slice_along_pair: a and b are the same loop");
  if (shared.size() != 1) {
    throw Error("slice_along_pair: loops must meet at exactly one vertex, they share " +
                std::to_string(shared.size()));
  }
  const std::int64_t crossing = intersection_with_loop(mesh, chain_from_loop(mesh, a), b);
  if (crossing != 1) {
    throw Error("slice_along_pair: a . b = " + std::to_string(crossing) + ", expected +1");
  }

  SlicedSurface out;
  out.crossing = shared[0];
  std::vector<char> cut(mesh.num_edges(), 0);
  for (const auto* loop : {&a, &b}) {
    const std::size_t n = loop->size();
    for (std::size_t i = 0; i < n; ++i) cut[mesh.find_edge((*loop)[i], (*loop)[(i + 1) % n])] = 1;
  }
  out.cut = cut_along(mesh, cut);
  if (out.cut.boundary_loops.size() != 1) {
    throw Error("slice_along_pair: cut produced " + std::to_string(out.cut.boundary_loops.size()) +
                " boundary loops");
  }
  const std::vector<int>& loop = out.cut.boundary_loops[0];
  const int n = static_cast<int>(loop.size());

  auto label = [&](int h) {
    int u = mesh.tail(h), v = mesh.head(h);
    if (next_a[u] == v) return 0;
    if (next_b[u] == v) return 1;
    if (next_a[v] == u) return 2;
    if (next_b[v] == u) return 3;
    return -1;
  };
  std::vector<int> corners;
  for (int k = 0; k < n; ++k) {
    if (mesh.tail(loop[k]) == out.crossing) corners.push_back(k);
  }
  if (corners.size() != 4) throw Error("slice_along_pair: crossing vertex does not split into four corners");
  int first = -1;
  for (int c = 0; c < 4; ++c) {
    if (label(loop[corners[c]]) == 0) first = c;
  }
  if (first < 0) throw Error("slice_along_pair: boundary has no a side");
  const int shift = corners[first];
  for (int k = 0; k < n; ++k) out.boundary.push_back(loop[(k + shift) % n]);
  for (int c = 0; c < 4; ++c) out.side_begin[c] = (corners[(first + c) % 4] - shift + n) % n;
  out.side_begin[4] = n;
  for (int s = 0; s < 4; ++s) {
    if (out.side_begin[s + 1] <= out.side_begin[s]) throw Error("slice_along_pair: empty boundary side");
    for (int k = out.side_begin[s]; k < out.side_begin[s + 1]; ++k) {
      if (label(out.boundary[k]) != s) throw Error("slice_along_pair: boundary word is not a b a^-1 b^-1");
    }
  }
  return out;
}

BoundaryMap square_boundary_map(const Mesh& mesh, const SlicedSurface& sliced) {
  const CutMesh& cut = sliced.cut;
  BoundaryMap map;
  map.position.assign(cut.num_vertices, Vec2::Zero());
  map.fixed.assign(cut.num_vertices, 0);

  auto side_copies = [&](int s) {
    std::vector<int> copies;
    for (int k = sliced.side_begin[s]; k < sliced.side_begin[s + 1]; ++k) {
      copies.push_back(cut.tail_copy(sliced.boundary[k]));
    }
    if (copies.empty()) throw Error("square_boundary_map: empty side");
    copies.push_back(cut.head_copy(sliced.boundary[sliced.side_begin[s + 1] - 1]));
    return copies;
  };
  auto arc_parameters = [&](int s) {
    std::vector<double> t(1, 0.0);
    double total = 0.0;
    for (int k = sliced.side_begin[s]; k < sliced.side_begin[s + 1]; ++k) {
      total += mesh.halfedge_vector(sliced.boundary[k]).norm();
      t.push_back(total);
    }
    for (double& x : t) x /= total;
    t.back() = 1.0;
    return t;
  };

  const std::vector<double> ta = arc_parameters(0), tb = arc_parameters(1);
  for (int s = 0; s < 4; ++s) {
    std::vector<int> copies = side_copies(s);
    const std::vector<double>& t = (s % 2 == 0) ? ta : tb;
    const int n = static_cast<int>(copies.size()) - 1;
    if (n + 1 != static_cast<int>(t.size())) throw Error("square_boundary_map: opposite sides differ in length");
    for (int k = 0; k <= n; ++k) {
      Vec2 p;
      switch (s) {
        case 0: p = {t[k], 0.0}; break;
        case 1: p = {1.0, t[k]}; break;
        case 2: p = {t[n - k], 1.0}; break;
        default: p = {0.0, t[n - k]}; break;
      }
      map.position[copies[k]] = p;
      map.fixed[copies[k]] = 1;
    }
  }
  return map;
}

PlanarEmbedding floater_embed(const Mesh& mesh, const CutMesh& cut, const BoundaryMap& boundary) {
  const int nc = cut.num_vertices;
  std::vector<int> unknown(nc, -1);
  int nu = 0;
  for (int c = 0; c < nc; ++c) {
    if (!boundary.fixed[c]) unknown[c] = nu++;
  }
  PlanarEmbedding out;
  out.uv = boundary.position;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(nu, 2);
  std::vector<double> diag(nu, 0.0);
  for (int h = 0; h < mesh.num_halfedges(); ++h) {
    const int ci = cut.tail_copy(h);
    const int row = unknown[ci];
    if (row < 0) continue;
    const double t = std::tan(0.5 * corner_angle(mesh, h));
    const int p = Mesh::prev(h);
    const std::array<std::pair<int, double>, 2> nbrs = {
        std::pair{cut.head_copy(h), t / mesh.halfedge_vector(h).norm()},
        std::pair{cut.tail_copy(p), t / mesh.halfedge_vector(p).norm()}};
    for (auto [cj, w] : nbrs) {
      diag[row] += w;
      if (unknown[cj] >= 0) trip.emplace_back(row, unknown[cj], -w);
      else rhs.row(row) += w * boundary.position[cj].transpose();
    }
  }
  for (int r = 0; r < nu; ++r) trip.emplace_back(r, r, diag[r]);

  if (nu > 0) {
    Eigen::SparseMatrix<double> a(nu, nu);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw Error("floater_embed: factorization failed");
    Eigen::MatrixX2d x = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw Error("floater_embed: solve failed");
    Eigen::MatrixX2d r = a * x - rhs;
    for (int c = 0; c < nc; ++c) {
      if (unknown[c] < 0) continue;
      const int row = unknown[c];
      out.uv[c] = x.row(row).transpose();
      out.residual = std::max(out.residual, r.row(row).lpNorm<Eigen::Infinity>() / diag[row]);
    }
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Vec2& p0 = out.uv[cut.corner_vertex[3 * f]];
    const Vec2& p1 = out.uv[cut.corner_vertex[3 * f + 1]];
    const Vec2& p2 = out.uv[cut.corner_vertex[3 * f + 2]];
    const Vec2 d1 = p1 - p0, d2 = p2 - p0;
    if (d1.x() * d2.y() - d1.y() * d2.x() <= 0.0) ++out.flipped_faces;
  }
  return out;
}

std::array<OneForm, 2> dual_pair_forms(const Mesh& mesh, const CutMesh& cut, const std::vector<Vec2>& uv) {
  std::array<OneForm, 2> forms = {OneForm(mesh.num_edges()), OneForm(mesh.num_edges())};
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const int h = mesh.edge_halfedge(e);
    const Vec2 d = uv[cut.head_copy(h)] - uv[cut.tail_copy(h)];
    forms[0].values[e] = d.x();
    forms[1].values[e] = d.y();
  }
  return forms;
}

double closedness_defect(const Mesh& mesh, const OneForm& form) {
  double worst = 0.0;
  for (double s : coboundary_1(mesh, form)) worst = std::max(worst, std::abs(s));
  return worst;
}

DualBasis dual_basis(const Mesh& mesh, const HomologyBasis& basis, int threads) {
  DualBasis out;
  out.basis = basis;
  const int g = basis.genus();
  if (g == 0) return out;

  auto slice_all = [&](const HomologyBasis& system) {
    std::vector<SlicedSurface> sliced;
    for (int k = 0; k < g; ++k) sliced.push_back(slice_along_pair(mesh, system.loops[k], system.loops[k + g]));
    return sliced;
  };
  std::vector<SlicedSurface> sliced;
  bool usable = false;
  if (basis.canonical && basis.geometric()) {
    try {
      sliced = slice_all(basis);
      out.sliced_system = basis;
      usable = true;
    } catch (const Error&) {
      usable = false;
    }
  }
  if (!usable) {
    out.sliced_system = homology_basis(mesh);
    if (out.sliced_system.genus() != g) throw Error("dual_basis: basis genus does not match the mesh");
    sliced = slice_all(out.sliced_system);
  }

  std::vector<OneForm> raw(2 * g);
  out.flipped_faces.assign(g, 0);
  parallel_for(g, threads, [&](int k) {
    BoundaryMap bm = square_boundary_map(mesh, sliced[k]);
    PlanarEmbedding emb = floater_embed(mesh, sliced[k].cut, bm);
    if (emb.residual > 1e-10) {
      throw Error("floater_embed: residual " + std::to_string(emb.residual) + " above 1e-10");
    }
    auto pair = dual_pair_forms(mesh, sliced[k].cut, emb.uv);
    raw[k] = std::move(pair[0]);
    raw[k + g] = std::move(pair[1]);
    out.flipped_faces[k] = emb.flipped_faces;
  });

  const int n = 2 * g;
  out.pairing.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out.pairing(i, j) = integrate(raw[j], basis.cycles[i]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(out.pairing);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-9) {
    throw Error("dual_basis: pairing matrix is singular, cycles are not a basis");
  }
  const Eigen::MatrixXd inv = lu.inverse();
  out.forms.assign(n, OneForm(mesh.num_edges()));
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      if (inv(j, k) == 0.0) continue;
      for (int e = 0; e < mesh.num_edges(); ++e) out.forms[k].values[e] += inv(j, k) * raw[j].values[e];
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v = integrate(out.forms[j], basis.cycles[i]);
      out.residual = std::max(out.residual, std::abs(v - (i == j ? 1.0 : 0.0)));
    }
  }
  for (const OneForm& w : out.forms) out.closedness = std::max(out.closedness, closedness_defect(mesh, w));
  return out;
}

}  // namespace conformal
