#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "conformal/homology.h"
#include "conformal/mesh.h"
#include "conformal/simplicial.h"

namespace conformal {

// The mesh cut open along a pair of simple loops that cross once.
struct SlicedSurface {
  CutMesh cut;
  // Boundary halfedges in counter-clockwise order starting at the a side.
  std::vector<int> boundary;
  // Side s (a, b, a^-1, b^-1) is boundary[side_begin[s] .. side_begin[s+1]).
  std::array<int, 5> side_begin{};
  int crossing = -1;
};

// Throws Error unless a and b are simple loops without common edges, meeting
// at exactly one vertex where a crosses b with a . b = +1.
SlicedSurface slice_along_pair(const Mesh& mesh, const std::vector<int>& a, const std::vector<int>& b);
SlicedSurface slice_along_pair(const Mesh& mesh, const Chain& a, const Chain& b);

struct BoundaryMap {
  std::vector<Vec2> position;  // per cut-mesh vertex; meaningful where fixed
  std::vector<char> fixed;
};

// a -> bottom, b -> right, a^-1 -> top, b^-1 -> left of the unit square,
// arc-length spaced. Both copies of a loop vertex get bitwise identical
// parameters.
BoundaryMap square_boundary_map(const Mesh& mesh, const SlicedSurface& sliced);

struct PlanarEmbedding {
  std::vector<Vec2> uv;  // per cut-mesh vertex
  double residual = 0.0;  // max relative deviation from the weighted average
  int flipped_faces = 0;
};

// Mean-value weight of corner h towards head(h) and towards tail(prev(h)),
// summed over faces.
PlanarEmbedding floater_embed(const Mesh& mesh, const CutMesh& cut, const BoundaryMap& boundary);

// dx and dy of the embedding pulled back to the original mesh: each edge uses
// the copies in the face of its canonical halfedge.
std::array<OneForm, 2> dual_pair_forms(const Mesh& mesh, const CutMesh& cut, const std::vector<Vec2>& uv);

struct DualBasis {
  std::vector<OneForm> forms;
  HomologyBasis basis;            // the cycles the forms are dual to
  HomologyBasis sliced_system;    // the loop pairs that were cut open
  Eigen::MatrixXd pairing;        // M_ij = integral of form j over cycle i, before correction
  double residual = 0.0;          // max |M - I| after correction
  double closedness = 0.0;        // max |face boundary sum|
  std::vector<int> flipped_faces; // per handle
};

// Cuts each handle of a canonical system of simple loops open (the given
// basis if it is one, else a computed one), embeds it in the unit square,
// and corrects the forms by M^-1 so they are dual to `basis`.
DualBasis dual_basis(const Mesh& mesh, const HomologyBasis& basis, int threads = 1);

// Max over faces of the boundary sum.
double closedness_defect(const Mesh& mesh, const OneForm& form);

}  // namespace conformal
