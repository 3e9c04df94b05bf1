#include "conformal/shapes.h"

#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

namespace conformal::shapes {

Mesh tetrahedron() {
  std::vector<Vec3> p = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  std::vector<Triangle> f = {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}};
  return Mesh::build(std::move(p), std::move(f));
}

Mesh icosphere(int level) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> p = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& v : p) v.normalize();
  std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      p.push_back((p[a] + p[b]).normalized());
      int id = static_cast<int>(p.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<Triangle> next;
    next.reserve(4 * f.size());
    for (const Triangle& tri : f) {
      int a = midpoint(tri[0], tri[1]);
      int b = midpoint(tri[1], tri[2]);
      int c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  return Mesh::build(std::move(p), std::move(f));
}

Mesh uv_sphere(int bands, int sectors) {
  if (bands < 2 || bands % 2 != 0 || sectors < 3) throw Error("uv_sphere: need even bands >= 2, sectors >= 3");
  std::vector<Vec3> p;
  std::vector<Triangle> f;
  p.emplace_back(0, 0, 1);
  for (int i = 1; i < bands; ++i) {
    double theta = std::numbers::pi * i / bands;
    for (int j = 0; j < sectors; ++j) {
      double phi = 2.0 * std::numbers::pi * j / sectors;
      p.emplace_back(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
    }
  }
  p.emplace_back(0, 0, -1);
  const int south = static_cast<int>(p.size()) - 1;
  auto ring = [&](int i, int j) { return 1 + (i - 1) * sectors + (j % sectors); };
  for (int j = 0; j < sectors; ++j) f.push_back({0, ring(1, j), ring(1, j + 1)});
  for (int i = 1; i + 1 < bands; ++i) {
    for (int j = 0; j < sectors; ++j) {
      int a = ring(i, j), b = ring(i + 1, j), c = ring(i + 1, j + 1), d = ring(i, j + 1);
      f.push_back({a, b, c});
      f.push_back({a, c, d});
    }
  }
  for (int j = 0; j < sectors; ++j) f.push_back({south, ring(bands - 1, j + 1), ring(bands - 1, j)});
  return Mesh::build(std::move(p), std::move(f));
}

Mesh ellipsoid(double a, double b, double c, int level) {
  Mesh s = icosphere(level);
  std::vector<Vec3> p = s.positions();
  for (Vec3& v : p) v = Vec3(a * v.x(), b * v.y(), c * v.z());
  return Mesh::build(std::move(p), s.faces());
}

Mesh flat_torus(int nx, int ny, double lx, double ly) {
  if (nx < 3 || ny < 3) throw Error("flat_torus: grid must be at least 3x3");
  const double dx = lx / nx, dy = ly / ny;
  std::vector<Vec3> p;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) p.emplace_back(i * dx, j * dy, 0.0);
  }
  auto id = [&](int i, int j) { return (j % ny) * nx + (i % nx); };
  std::vector<Triangle> f;
  std::vector<std::array<Vec3, 3>> corners;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Vec3 ca(i * dx, j * dy, 0), cb((i + 1) * dx, j * dy, 0);
      Vec3 cc((i + 1) * dx, (j + 1) * dy, 0), cd(i * dx, (j + 1) * dy, 0);
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      corners.push_back({ca, cb, cc});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      corners.push_back({ca, cc, cd});
    }
  }
  return Mesh::build(std::move(p), std::move(f), std::move(corners));
}

Mesh ring_torus(double major_radius, double minor_radius, int n_major, int n_minor) {
  if (n_major < 3 || n_minor < 3) throw Error("ring_torus: need at least 3 segments per direction");
  std::vector<Vec3> p;
  for (int j = 0; j < n_minor; ++j) {
    double phi = 2.0 * std::numbers::pi * j / n_minor;
    for (int i = 0; i < n_major; ++i) {
      double theta = 2.0 * std::numbers::pi * i / n_major;
      double rho = major_radius + minor_radius * std::cos(phi);
      p.emplace_back(rho * std::cos(theta), rho * std::sin(theta), minor_radius * std::sin(phi));
    }
  }
  auto id = [&](int i, int j) { return (j % n_minor) * n_major + (i % n_major); };
  std::vector<Triangle> f;
  for (int j = 0; j < n_minor; ++j) {
    for (int i = 0; i < n_major; ++i) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Mesh::build(std::move(p), std::move(f));
}

Mesh voxel_surface(const std::vector<std::vector<std::vector<bool>>>& solid, int refine) {
  const int nx = static_cast<int>(solid.size());
  const int ny = nx ? static_cast<int>(solid[0].size()) : 0;
  const int nz = ny ? static_cast<int>(solid[0][0].size()) : 0;
  auto filled = [&](int i, int j, int k) {
    return i >= 0 && j >= 0 && k >= 0 && i < nx && j < ny && k < nz && solid[i][j][k];
  };
  std::map<std::tuple<int, int, int>, int> ids;
  std::vector<Vec3> p;
  auto vertex = [&](const std::array<int, 3>& c) {
    auto key = std::make_tuple(c[0], c[1], c[2]);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(p.size());
    p.emplace_back(double(c[0]) / refine, double(c[1]) / refine, double(c[2]) / refine);
    ids.emplace(key, id);
    return id;
  };
  std::vector<Triangle> f;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < nz; ++k) {
        if (!solid[i][j][k]) continue;
        const std::array<int, 3> cell = {i, j, k};
        for (int axis = 0; axis < 3; ++axis) {
          for (int sign : {-1, 1}) {
            std::array<int, 3> nb = cell;
            nb[axis] += sign;
            if (filled(nb[0], nb[1], nb[2])) continue;
            const int u = (axis + 1) % 3, w = (axis + 2) % 3;
            for (int a = 0; a < refine; ++a) {
              for (int b = 0; b < refine; ++b) {
                auto corner = [&](int da, int db) {
                  std::array<int, 3> c;
                  c[axis] = (cell[axis] + (sign > 0 ? 1 : 0)) * refine;
                  c[u] = cell[u] * refine + a + da;
                  c[w] = cell[w] * refine + b + db;
                  return vertex(c);
                };
                int c00 = corner(0, 0), c10 = corner(1, 0), c11 = corner(1, 1), c01 = corner(0, 1);
                // Alternate diagonals so no vertex collects a long fan.
                bool flip = ((a + b) % 2) != 0;
                std::array<Triangle, 2> tris;
                if (!flip) tris = {Triangle{c00, c10, c11}, Triangle{c00, c11, c01}};
                else tris = {Triangle{c00, c10, c01}, Triangle{c10, c11, c01}};
                for (Triangle t : tris) {
                  if (sign < 0) std::swap(t[1], t[2]);
                  f.push_back(t);
                }
              }
            }
          }
        }
      }
    }
  }
  return Mesh::build(std::move(p), std::move(f));
}

Mesh holed_slab(int genus, int refine, int smoothing_iterations) {
  const int nx = 2 * genus + 1;
  std::vector<std::vector<std::vector<bool>>> solid(nx, std::vector<std::vector<bool>>(3, std::vector<bool>(1, true)));
  for (int g = 0; g < genus; ++g) solid[2 * g + 1][1][0] = false;
  Mesh m = voxel_surface(solid, refine);
  return smoothing_iterations > 0 ? smoothed(m, smoothing_iterations) : m;
}

Mesh smoothed(const Mesh& mesh, int iterations, double step) {
  std::vector<Vec3> p = mesh.positions();
  std::vector<std::vector<int>> nbrs(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) nbrs[v] = mesh.neighbors(v);
  for (int it = 0; it < iterations; ++it) {
    std::vector<Vec3> q = p;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      Vec3 avg = Vec3::Zero();
      for (int w : nbrs[v]) avg += p[w];
      avg /= static_cast<double>(nbrs[v].size());
      q[v] = p[v] + step * (avg - p[v]);
    }
    p = std::move(q);
  }
  return Mesh::build(std::move(p), mesh.faces());
}

Mesh scaled(const Mesh& mesh, double factor) {
  std::vector<Vec3> p = mesh.positions();
  for (Vec3& v : p) v *= factor;
  if (!mesh.has_intrinsic_corners()) return Mesh::build(std::move(p), mesh.faces());
  auto corners = mesh.corner_positions();
  for (auto& c : corners) {
    for (Vec3& v : c) v *= factor;
  }
  return Mesh::build(std::move(p), mesh.faces(), std::move(corners));
}

Mesh transformed(const Mesh& mesh, const Eigen::Matrix3d& rotation, const Vec3& translation) {
  std::vector<Vec3> p = mesh.positions();
  for (Vec3& v : p) v = rotation * v + translation;
  if (!mesh.has_intrinsic_corners()) return Mesh::build(std::move(p), mesh.faces());
  auto corners = mesh.corner_positions();
  for (auto& c : corners) {
    for (Vec3& v : c) v = rotation * v + translation;
  }
  return Mesh::build(std::move(p), mesh.faces(), std::move(corners));
}

}  // namespace conformal::shapes
