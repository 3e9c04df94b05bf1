#pragma once

#include <vector>

#include "conformal/mesh.h"

// Procedural test surfaces with known conformal structure or topology.
namespace conformal::shapes {

Mesh tetrahedron();

// Subdivided icosahedron projected to the unit sphere; level 0 has 20 faces.
Mesh icosphere(int level);

// Latitude/longitude sphere; `bands` must be even so the equator is an edge loop.
Mesh uv_sphere(int bands, int sectors);

// Icosphere scaled per axis.
Mesh ellipsoid(double a, double b, double c, int level);

// Flat torus [0,lx) x [0,ly) with a periodic nx-by-ny grid, each cell split
// along its diagonal. The metric is carried by per-face corner positions.
Mesh flat_torus(int nx, int ny, double lx = 1.0, double ly = 1.0);

// Torus of revolution in R^3 with tube radius r around a circle of radius R.
Mesh ring_torus(double major_radius, double minor_radius, int n_major, int n_minor);

// Boundary of a voxel solid, each voxel face refined into `refine` x `refine`
// quads split into triangles. The solid must be manifold (no edge-only contacts).
Mesh voxel_surface(const std::vector<std::vector<std::vector<bool>>>& solid, int refine);

// Slab of (2g+1) x 3 x 1 voxels with g square holes, optionally smoothed.
Mesh holed_slab(int genus, int refine, int smoothing_iterations = 0);

// Uniform Laplacian smoothing of vertex positions (connectivity unchanged).
Mesh smoothed(const Mesh& mesh, int iterations, double step = 0.5);

// Uniform scaling and rigid motion helpers.
Mesh scaled(const Mesh& mesh, double factor);
Mesh transformed(const Mesh& mesh, const Eigen::Matrix3d& rotation, const Vec3& translation);

}  // namespace conformal::shapes
