#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "conformal/hodge.h"
#include "conformal/homology.h"

namespace conformal {

struct Zero {
  int vertex = -1;
  int index = 0;  // order of the zero
};

struct ZeroReport {
  std::vector<Zero> zeros;
  int total_index = 0;
  std::vector<int> near_singular_faces;  // |(f,g)| below 1e-6 x median
  bool generic = true;
};

struct FlatParam {
  CutMesh domain;
  std::vector<Vec2> uv;  // per cut-mesh vertex
  HolomorphicForm form;
  int root = 0;          // cut-mesh vertex placed at the origin
  double residual = 0.0; // max over halfedges |uv(head) - uv(tail) - zeta(h)|
  ZeroReport zeros;
};

// sum_k c_k zeta_k.
HolomorphicForm combine_forms(const HolomorphicBasis& holo, const std::vector<int>& indices,
                              const std::vector<std::complex<double>>& coeffs);

// Breadth-first integration of zeta over a disk-shaped cut mesh.
// Throws when the domain is not a disk or the residual exceeds tol.
FlatParam integrate_over_domain(const Mesh& mesh, const CutMesh& domain, const HolomorphicForm& zeta,
                                int root = 0, double tol = 1e-9);

// Per-vertex order of the zero of zeta from the winding of Gamma(Re zeta)
// around the vertex star. Throws when zeta vanishes identically.
ZeroReport detect_zeros(const Mesh& mesh, const HolomorphicForm& zeta);

// First combination of the independent forms (each single form, then pairwise
// sums and differences with real and imaginary weights) whose zeros avoid the
// closed one-ring of `vertex`. Returns coefficients over holo.independent.
std::vector<std::complex<double>> form_avoiding_vertex(const Mesh& mesh, const HolomorphicBasis& holo, int vertex);

enum class UvFormat { obj, svg };

// OBJ: original vertices, one vt per cut-mesh vertex, f v/vt.
// SVG: flattened triangles, seam (cut) edges drawn in red.
void export_uv(const Mesh& mesh, const FlatParam& fp, const std::string& path, UvFormat format);

// Axis-aligned bounds of the uv coordinates: (min, max).
std::pair<Vec2, Vec2> uv_bounds(const FlatParam& fp);

}  // namespace conformal
