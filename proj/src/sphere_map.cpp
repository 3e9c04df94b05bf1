#include "conformal/sphere_map.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "conformal/harmonic.h"

namespace conformal {

namespace {

void require_genus_zero(const Mesh& mesh) {
  EulerGenus eg = euler_genus(mesh);
  if (eg.genus != 0) throw Error("sphere map needs a genus-0 mesh, got genus " + std::to_string(eg.genus));
}

Vec3 centroid(const std::vector<Vec3>& h, const std::vector<double>& area) {
  Vec3 c = Vec3::Zero();
  double total = 0.0;
  for (std::size_t v = 0; v < h.size(); ++v) {
    c += area[v] * h[v];
    total += area[v];
  }
  return c / total;
}

double tangential_residual(const std::vector<Vec3>& h, const std::vector<Vec3>& lap) {
  double r = 0.0;
  for (std::size_t v = 0; v < h.size(); ++v) r = std::max(r, project_tangent(h[v], lap[v]).norm());
  return r;
}

double energy_and_laplacian(const Mesh& mesh, const EdgeWeights& w, const std::vector<Vec3>& h,
                            std::vector<Vec3>& lap) {
  lap.assign(h.size(), Vec3::Zero());
  double energy = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    auto [u, v] = mesh.edge_vertices(e);
    const Vec3 d = h[u] - h[v];
    energy += w[e] * d.squaredNorm();
    lap[u] += w[e] * d;
    lap[v] -= w[e] * d;
  }
  return energy;
}

// Shared descent loop. `area` non-null enables the centroid shift.
SphereMap flow(const Mesh& mesh, const EdgeWeights& w, std::vector<Vec3> h, const SphereFlowOptions& options,
               const std::vector<double>* area) {
  const int nv = mesh.num_vertices();
  double step = options.step;
  const int max_backtracks = options.step > 0.0 ? 0 : options.max_backtracks;
  if (step <= 0.0) {
    std::vector<double> deg(nv, 0.0);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      auto [u, v] = mesh.edge_vertices(e);
      deg[u] += std::abs(w[e]);
      deg[v] += std::abs(w[e]);
    }
    step = 0.1 / *std::max_element(deg.begin(), deg.end());
  }
  auto normalize = [&](std::vector<Vec3>& x) {
    if (area) {
      const Vec3 c = centroid(x, *area);
      for (Vec3& p : x) p -= c;
    }
    for (Vec3& p : x) {
      const double n = p.norm();
      if (!(n > 0.0) || !std::isfinite(n)) throw Error("sphere flow: vertex collapsed to the origin");
      p /= n;
    }
  };
  normalize(h);

  SphereMap out;
  std::vector<Vec3> lap, trial_lap;
  double energy = energy_and_laplacian(mesh, w, h, lap);
  out.energy_trace.push_back(energy);
  int backtracks = 0;
  double prev_change = 0.0;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    std::vector<Vec3> trial(nv);
    for (int v = 0; v < nv; ++v) trial[v] = h[v] - step * project_tangent(h[v], lap[v]);
    normalize(trial);
    const double e = energy_and_laplacian(mesh, w, trial, trial_lap);
    if (!std::isfinite(e) || e > energy) {
      if (++backtracks > max_backtracks) {
        throw DivergenceError("sphere flow diverged: energy rose from " + std::to_string(energy) + " to " +
                                  std::to_string(e) + " after " + std::to_string(max_backtracks) +
                                  " step halvings",
                              out.energy_trace);
      }
      step *= 0.5;
      continue;
    }
    backtracks = 0;
    const double change = energy - e;
    h = std::move(trial);
    energy = e;
    out.energy_trace.push_back(energy);
    std::swap(lap, trial_lap);
    // Remaining decrease extrapolated from consecutive decreases.
    bool done = change <= 0.0;
    if (!done && prev_change > 0.0) {
      const double rho = change / prev_change;
      done = rho < 1.0 && change * rho / (1.0 - rho) <= options.epsilon * energy;
    }
    prev_change = change;
    if (done) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.iterations = it;
  out.step = step;
  out.tangential_residual = tangential_residual(h, lap);
  out.centroid_norm = centroid(h, area ? *area : vertex_areas(mesh)).norm();
  out.points = std::move(h);
  return out;
}

}  // namespace

Vec3 project_tangent(const Vec3& v, const Vec3& x) { return x - v * (v.dot(x) / v.dot(v)); }

std::vector<double> vertex_areas(const Mesh& mesh) {
  std::vector<double> a(mesh.num_vertices(), 0.0);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const double third = face_area(mesh, f) / 3.0;
    for (int v : mesh.face(f)) a[v] += third;
  }
  return a;
}

SphereMap gauss_map(const Mesh& mesh) {
  std::vector<Vec3> n(mesh.num_vertices(), Vec3::Zero());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Vec3 a = mesh.corner(3 * f), b = mesh.corner(3 * f + 1), c = mesh.corner(3 * f + 2);
    const Vec3 area_normal = 0.5 * (b - a).cross(c - a);
    for (int v : mesh.face(f)) n[v] += area_normal;
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double len = n[v].norm();
    if (len <= 1e-300) throw Error("gauss_map: zero normal at vertex " + std::to_string(v));
    n[v] /= len;
  }
  SphereMap out;
  out.points = std::move(n);
  out.converged = true;
  return out;
}

SphereMap barycentric_embed(const Mesh& mesh, const SphereFlowOptions& options) {
  require_genus_zero(mesh);
  return flow(mesh, unit_weights(mesh), gauss_map(mesh).points, options, nullptr);
}

SphereMap conformal_embed(const Mesh& mesh, const SphereFlowOptions& options, const std::optional<SphereMap>& start) {
  require_genus_zero(mesh);
  EdgeWeights w = cotan_weights(mesh);
  if (w.min() < 0.0) throw Error("conformal_embed: negative cotangent weights, preprocess the mesh first");
  std::vector<double> area = vertex_areas(mesh);
  std::vector<Vec3> h = start ? start->points : barycentric_embed(mesh, options).points;
  if (static_cast<int>(h.size()) != mesh.num_vertices()) throw Error("conformal_embed: start map size mismatch");
  return flow(mesh, w, std::move(h), options, &area);
}

std::complex<double> stereographic(const Vec3& p) {
  const double d = 1.0 + p.z();
  if (std::abs(d) < 1e-15) throw Error("stereographic: the south pole maps to infinity");
  return {p.x() / d, p.y() / d};
}

Vec3 inverse_stereographic(std::complex<double> z) {
  const double r2 = std::norm(z);
  return Vec3(2.0 * z.real(), 2.0 * z.imag(), 1.0 - r2) / (1.0 + r2);
}

std::complex<double> mobius(std::complex<double> z, std::complex<double> a, std::complex<double> b,
                            std::complex<double> c, std::complex<double> d) {
  if (std::abs(a * d - b * c) == 0.0) throw Error("mobius: ad - bc = 0");
  return (a * z + b) / (c * z + d);
}

double signed_spherical_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double num = a.dot(b.cross(c));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

int map_degree(const Mesh& mesh, const std::vector<Vec3>& points) {
  double total = 0.0;
  for (const Triangle& t : mesh.faces()) total += signed_spherical_area(points[t[0]], points[t[1]], points[t[2]]);
  return static_cast<int>(std::lround(total / (4.0 * std::numbers::pi)));
}

int flipped_spherical_faces(const Mesh& mesh, const std::vector<Vec3>& points) {
  int flipped = 0;
  for (const Triangle& t : mesh.faces()) {
    if (signed_spherical_area(points[t[0]], points[t[1]], points[t[2]]) <= 0.0) ++flipped;
  }
  return flipped;
}

std::vector<double> quasi_conformal_distortion(const Mesh& mesh, const std::vector<Vec3>& points) {
  std::vector<double> out(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    LocalChart src = local_chart(mesh, f);
    const Triangle& t = mesh.face(f);
    const Vec3 q0 = points[t[0]], e1 = points[t[1]] - q0, e2 = points[t[2]] - q0;
    const double l1 = e1.norm();
    const Vec3 x = e1 / l1;
    const Vec3 y = (e2 - x * x.dot(e2)).normalized();
    Eigen::Matrix2d s, d;
    s.col(0) = src.coords[1] - src.coords[0];
    s.col(1) = src.coords[2] - src.coords[0];
    d.col(0) = Vec2(l1, 0.0);
    d.col(1) = Vec2(x.dot(e2), y.dot(e2));
    const Eigen::Matrix2d jac = d * s.inverse();
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(jac);
    const Vec2 sv = svd.singularValues();
    out[f] = sv(1) > 0.0 ? sv(0) / sv(1) : std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace conformal
