#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "conformal/mesh.h"

namespace conformal {

struct SphereMap {
  std::vector<Vec3> points;           // unit vectors, one per vertex
  std::vector<double> energy_trace;   // accepted iterates, starting value first
  int iterations = 0;
  bool converged = false;
  double step = 0.0;                  // final step size
  double centroid_norm = 0.0;         // |area-weighted centroid|
  double tangential_residual = 0.0;   // max_v |P_h(v) (L h)(v)|

  double energy() const { return energy_trace.empty() ? 0.0 : energy_trace.back(); }
};

// Area-weighted average of incident face normals. Throws on a zero normal.
SphereMap gauss_map(const Mesh& mesh);

// x - v (v.x) / (v.v)
Vec3 project_tangent(const Vec3& v, const Vec3& x);

struct SphereFlowOptions {
  double step = 0.0;         // 0 -> 0.1 / max weighted vertex degree
  double epsilon = 1e-7;     // relative energy change
  int max_iterations = 200000;
  // Consecutive halvings before divergence is declared. Only the default
  // step backtracks; an explicit step that raises the energy diverges.
  int max_backtracks = 5;
};

// Tangential descent of the unit-weight string energy starting from the
// Gauss map, renormalized to the sphere after every step.
SphereMap barycentric_embed(const Mesh& mesh, const SphereFlowOptions& options = {});

// Cotangent-weight tangential descent from the barycentric embedding (or
// from `start`); after each step the area-weighted centroid is subtracted and
// vertices are renormalized. Throws on negative weights.
SphereMap conformal_embed(const Mesh& mesh, const SphereFlowOptions& options = {},
                          const std::optional<SphereMap>& start = std::nullopt);

// One third of the incident face areas.
std::vector<double> vertex_areas(const Mesh& mesh);

// (x0 / (1 + x2), x1 / (1 + x2)); throws at the south pole.
std::complex<double> stereographic(const Vec3& p);
Vec3 inverse_stereographic(std::complex<double> z);

// (a z + b) / (c z + d); throws when ad - bc = 0.
std::complex<double> mobius(std::complex<double> z, std::complex<double> a, std::complex<double> b,
                            std::complex<double> c, std::complex<double> d);

// Sum of signed spherical triangle areas over 4 pi, rounded.
int map_degree(const Mesh& mesh, const std::vector<Vec3>& points);
double signed_spherical_area(const Vec3& a, const Vec3& b, const Vec3& c);
// Faces whose image triangle is negatively oriented about its centroid.
int flipped_spherical_faces(const Mesh& mesh, const std::vector<Vec3>& points);

// Per face: ratio of the singular values of the linear map from the face to
// the flat triangle spanned by its image points (>= 1, 1 = conformal).
std::vector<double> quasi_conformal_distortion(const Mesh& mesh, const std::vector<Vec3>& points);

}  // namespace conformal
