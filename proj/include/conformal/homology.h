#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "conformal/mesh.h"
#include "conformal/simplicial.h"

namespace conformal {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Exact integer bookkeeping for H1 of a closed mesh.
//
// A shortest-path vertex tree T and a dual spanning tree T* of the faces
// (edges of T excluded) leave exactly 2g generator edges. Each generator
// closes a simple loop through T, and the dual loop through T* crossing
// only that generator gives an integer cocycle eta_k with
// eta_k(loop_j) = delta_kj. Integrating the cocycles therefore yields exact
// class coordinates for any 1-cycle. This is the unit-pivot elimination of
// the boundary matrices, ordered by the two spanning trees.
class HomologyContext {
 public:
  explicit HomologyContext(const Mesh& mesh, int root = 0);

  const Mesh& mesh() const { return *mesh_; }
  int genus() const { return static_cast<int>(generators_.size()) / 2; }

  const std::vector<int>& generator_edges() const { return generators_; }
  const std::vector<std::vector<int>>& generator_loops() const { return loops_; }
  const std::vector<char>& tree_edges() const { return in_tree_; }
  const std::vector<char>& cotree_edges() const { return in_cotree_; }

  // eta_k value on the halfedge h.
  int cocycle(int k, int h) const { return mesh_->edge_sign(h) * cocycles_[k][mesh_->edge(h)]; }

  // Exact class coordinates in terms of the generator loops.
  std::vector<std::int64_t> coordinates(const Chain& cycle) const;
  // Coordinates of the closed vertex walk.
  std::vector<std::int64_t> loop_coordinates(const std::vector<int>& loop) const;

  // Algebraic intersection numbers of the generator loops.
  const IntMatrix& generator_pairing() const { return pairing_; }
  std::int64_t intersection(const Chain& a, const Chain& b) const;

 private:
  const Mesh* mesh_;
  std::vector<char> in_tree_, in_cotree_;
  std::vector<int> generators_;
  std::vector<std::vector<int>> loops_;
  std::vector<std::vector<std::int8_t>> cocycles_;
  IntMatrix pairing_;
};

// Algebraic intersection number z . w for a simple vertex loop w and any
// 1-cycle z. +1 counts a crossing where (tangent of z, tangent of w) is
// positively oriented.
std::int64_t intersection_with_loop(const Mesh& mesh, const Chain& z, const std::vector<int>& w);

// Integer 1-cochain Poincare dual to a simple vertex loop: +1 on edges that
// leave the loop to its right.
std::vector<int> loop_dual_cochain(const Mesh& mesh, const std::vector<int>& w);

struct HomologyBasis {
  std::vector<Chain> cycles;
  // Vertex loops of the cycles when every cycle is a simple loop; else empty.
  std::vector<std::vector<int>> loops;
  bool canonical = false;
  // Rows express these cycles in terms of the basis they were derived from
  // (identity for freshly computed bases).
  IntMatrix transform;

  int genus() const { return static_cast<int>(cycles.size()) / 2; }
  bool geometric() const { return !loops.empty() && loops.size() == cycles.size(); }
};

// Canonical system of simple loops (a_1..a_g, b_1..b_g): a_i . b_i = +1, all
// other pairs disjoint. Empty for genus 0.
HomologyBasis homology_basis(const Mesh& mesh);

// The 2g generator loops of the tree/cotree reduction (not canonical).
HomologyBasis generator_basis(const Mesh& mesh);

// Replaces sub-paths of a simple loop by shorter Dijkstra paths that keep the
// homology class and simplicity. Non-simple cycles are returned unchanged.
Chain shorten_cycle(const Mesh& mesh, const Chain& cycle);
std::vector<int> shorten_loop(const Mesh& mesh, const HomologyContext& ctx, const std::vector<int>& loop,
                              const std::vector<char>& blocked);

// Reroutes shared stretches of simple basis loops so that no two loops
// share an edge and loops meet only at isolated crossing vertices.
HomologyBasis perturb_transversal(const Mesh& mesh, const HomologyBasis& basis);

// Pairing matrix I_ij = e_i . e_j.
IntMatrix pairing_matrix(const Mesh& mesh, const HomologyBasis& basis);
// C = -I, the convention c_ij = -e_i . e_j.
IntMatrix intersection_matrix(const Mesh& mesh, const HomologyBasis& basis);

// Standard form: pairing e_i . e_{g+i} = +1, all other pairs 0.
IntMatrix standard_pairing(int genus);

// Integer symplectic change of basis bringing the pairing to standard form.
// Throws Error when the pairing is not unimodular.
HomologyBasis canonicalize_basis(const Mesh& mesh, const HomologyBasis& basis);
// Same reduction on a bare pairing matrix; rows of the result are the new
// vectors in terms of the old ones.
IntMatrix symplectic_reduction(const IntMatrix& pairing);

// A mesh cut open along a set of edges. Faces are unchanged; each corner is
// assigned the vertex copy of its wedge.
struct CutMesh {
  int num_vertices = 0;
  std::vector<int> corner_vertex;  // halfedge -> copy of its tail
  std::vector<int> origin;         // copy -> original vertex
  std::vector<char> cut_edge;      // original edge -> cut?
  // Each loop lists original halfedge ids with the interior on their left.
  std::vector<std::vector<int>> boundary_loops;
  int num_cut_edges = 0;

  int head_copy(int h) const { return corner_vertex[Mesh::next(h)]; }
  int tail_copy(int h) const { return corner_vertex[h]; }
  int num_edges(const Mesh& mesh) const { return mesh.num_edges() + num_cut_edges; }
  int euler_characteristic(const Mesh& mesh) const {
    return num_vertices - num_edges(mesh) + mesh.num_faces();
  }
  std::vector<Triangle> faces(const Mesh& mesh) const;
};

CutMesh cut_along(const Mesh& mesh, const std::vector<char>& cut_edges);

using FundamentalDomain = CutMesh;

// Cut graph = complement of a dual spanning tree, pruned of dangling edges
// (one edge is kept for genus 0). The result is a disk.
FundamentalDomain fundamental_domain(const Mesh& mesh);

struct CurveClass {
  std::vector<double> values;
  std::vector<std::int64_t> rounded;
  double max_deviation = 0.0;
};

// Integrals of the cycle against a cohomology basis.
CurveClass curve_class(const std::vector<OneForm>& forms, const Chain& cycle);

struct FloodResult {
  std::optional<Chain> faces;             // 2-chain with boundary equal to the cycle
  std::vector<std::int64_t> class_vector; // nonzero when the cycle is not a boundary
};

// Faces to the left of a null-homologous cycle.
FloodResult flood_bounded_domain(const Mesh& mesh, const Chain& cycle);

}  // namespace conformal
