#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/SparseCore>

#include "conformal/mesh.h"

namespace conformal {

// Integer-coefficient formal sum of oriented cells. For dimension 1 the
// cells are edges in their canonical (low id -> high id) orientation.
struct Chain {
  int dim = 1;
  std::map<int, std::int64_t> coeffs;

  void add(int cell, std::int64_t c);
  bool empty() const { return coeffs.empty(); }
  Chain operator+(const Chain& other) const;
  Chain operator-(const Chain& other) const;
  Chain operator*(std::int64_t s) const;
  bool operator==(const Chain& other) const = default;
};

// 1-chain of a closed vertex walk v0 -> v1 -> ... -> v0.
Chain chain_from_loop(const Mesh& mesh, const std::vector<int>& loop);
// Inverse of chain_from_loop for a simple loop (coefficients +-1, every vertex
// of degree two). Throws Error otherwise.
std::vector<int> loop_from_chain(const Mesh& mesh, const Chain& chain);
// Sum of edge lengths weighted by |coefficient|.
double chain_length(const Mesh& mesh, const Chain& chain);

// Real 1-cochain, one value per edge in canonical orientation, so
// antisymmetry holds by construction.
struct OneForm {
  std::vector<double> values;

  OneForm() = default;
  explicit OneForm(int num_edges) : values(num_edges, 0.0) {}

  // Value on halfedge h (sign follows the halfedge direction).
  double on(const Mesh& mesh, int h) const { return mesh.edge_sign(h) * values[mesh.edge(h)]; }
  // Value on the oriented edge from -> to; the edge must exist.
  double at(const Mesh& mesh, int from, int to) const;

  OneForm& operator+=(const OneForm& o);
  OneForm& operator-=(const OneForm& o);
  OneForm& operator*=(double s);
  friend OneForm operator+(OneForm a, const OneForm& b) { return a += b; }
  friend OneForm operator-(OneForm a, const OneForm& b) { return a -= b; }
  friend OneForm operator*(double s, OneForm a) { return a *= s; }
  double max_abs() const;
};

// Per-face coefficients (f, g) of f dx + g dy in that face's LocalChart.
struct FaceForm {
  std::vector<Vec2> coeffs;
};

using IntSparse = Eigen::SparseMatrix<int>;

// q = 1: vertices x edges (-1 at tail, +1 at head).
// q = 2: edges x faces (orientation sign of each boundary edge).
IntSparse boundary_matrix(const Mesh& mesh, int q);

// Boundary of a chain (dimension dim-1).
Chain boundary(const Mesh& mesh, const Chain& chain);

// (delta f)[u,v] = f(v) - f(u).
OneForm coboundary_0(const Mesh& mesh, const std::vector<double>& fvals);

// Sum over each face boundary, i.e. delta applied to a 1-cochain.
std::vector<double> coboundary_1(const Mesh& mesh, const OneForm& form);

// Compensated sum of coefficient * value.
double integrate(const OneForm& form, const Chain& chain);

// Least-squares (exact for closed cochains) per-face constant form whose
// chart-edge integrals reproduce the cochain.
FaceForm gamma(const Mesh& mesh, const OneForm& form);

// Re-integrates a face form along each face's edges; max deviation from the
// cochain over all halfedges.
double gamma_reconstruction_error(const Mesh& mesh, const OneForm& form, const FaceForm& ff);

// Gradient of the piecewise-linear interpolant of f, in chart coordinates.
FaceForm pl_gradient(const Mesh& mesh, const std::vector<double>& fvals);

// Max over faces of |Gamma(delta f) - grad f|.
double check_gamma_commutes(const Mesh& mesh, const std::vector<double>& fvals);

}  // namespace conformal
