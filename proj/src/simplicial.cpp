#include "conformal/simplicial.h"

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace conformal {

void Chain::add(int cell, std::int64_t c) {
  if (c == 0) return;
  auto [it, inserted] = coeffs.try_emplace(cell, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) coeffs.erase(it);
  }
}

Chain Chain::operator+(const Chain& other) const {
  Chain out = *this;
  for (auto [cell, c] : other.coeffs) out.add(cell, c);
  return out;
}

Chain Chain::operator-(const Chain& other) const {
  Chain out = *this;
  for (auto [cell, c] : other.coeffs) out.add(cell, -c);
  return out;
}

Chain Chain::operator*(std::int64_t s) const {
  Chain out;
  out.dim = dim;
  if (s == 0) return out;
  for (auto [cell, c] : coeffs) out.coeffs[cell] = c * s;
  return out;
}

Chain chain_from_loop(const Mesh& mesh, const std::vector<int>& loop) {
  Chain c;
  c.dim = 1;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    int u = loop[i], v = loop[(i + 1) % n];
    int h = mesh.find_halfedge(u, v);
    if (h < 0) {
      throw Error("loop uses missing edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    }
    c.add(mesh.edge(h), mesh.edge_sign(h));
  }
  return c;
}

std::vector<int> loop_from_chain(const Mesh& mesh, const Chain& chain) {
  if (chain.dim != 1 || chain.empty()) throw Error("expected a non-empty 1-chain");
  // outgoing oriented edge per vertex
  std::map<int, int> next;
  for (auto [e, c] : chain.coeffs) {
    if (c != 1 && c != -1) throw Error("chain is not a simple loop (coefficient " + std::to_string(c) + ")");
    auto [u, v] = mesh.edge_vertices(e);
    if (c < 0) std::swap(u, v);
    if (!next.emplace(u, v).second) throw Error("chain is not a simple loop (vertex " + std::to_string(u) + ")");
  }
  std::vector<int> loop;
  int start = next.begin()->first;
  int v = start;
  do {
    loop.push_back(v);
    auto it = next.find(v);
    if (it == next.end()) throw Error("chain is not closed at vertex " + std::to_string(v));
    v = it->second;
  } while (v != start && loop.size() <= next.size());
  if (loop.size() != next.size()) throw Error("chain is not a single simple loop");
  return loop;
}

double chain_length(const Mesh& mesh, const Chain& chain) {
  double len = 0.0;
  for (auto [e, c] : chain.coeffs) len += std::abs(static_cast<double>(c)) * mesh.edge_length(e);
  return len;
}

double OneForm::at(const Mesh& mesh, int from, int to) const {
  int h = mesh.find_halfedge(from, to);
  if (h < 0) throw Error("no edge (" + std::to_string(from) + "," + std::to_string(to) + ")");
  return on(mesh, h);
}

OneForm& OneForm::operator+=(const OneForm& o) {
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
  return *this;
}

OneForm& OneForm::operator-=(const OneForm& o) {
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
  return *this;
}

OneForm& OneForm::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

double OneForm::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

IntSparse boundary_matrix(const Mesh& mesh, int q) {
  std::vector<Eigen::Triplet<int>> trip;
  if (q == 1) {
    IntSparse d(mesh.num_vertices(), mesh.num_edges());
    for (int e = 0; e < mesh.num_edges(); ++e) {
      auto [u, v] = mesh.edge_vertices(e);
      trip.emplace_back(u, e, -1);
      trip.emplace_back(v, e, 1);
    }
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
  }
  if (q == 2) {
    IntSparse d(mesh.num_edges(), mesh.num_faces());
    for (int h = 0; h < mesh.num_halfedges(); ++h) {
      trip.emplace_back(mesh.edge(h), Mesh::face_of(h), mesh.edge_sign(h));
    }
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
  }
  throw Error("boundary_matrix: q must be 1 or 2");
}

Chain boundary(const Mesh& mesh, const Chain& chain) {
  Chain out;
  out.dim = chain.dim - 1;
  if (chain.dim == 1) {
    for (auto [e, c] : chain.coeffs) {
      auto [u, v] = mesh.edge_vertices(e);
      out.add(u, -c);
      out.add(v, c);
    }
  } else if (chain.dim == 2) {
    for (auto [f, c] : chain.coeffs) {
      for (int i = 0; i < 3; ++i) {
        int h = 3 * f + i;
        out.add(mesh.edge(h), c * mesh.edge_sign(h));
      }
    }
  } else {
    throw Error("boundary: chain dimension must be 1 or 2");
  }
  return out;
}

OneForm coboundary_0(const Mesh& mesh, const std::vector<double>& fvals) {
  OneForm w(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    auto [u, v] = mesh.edge_vertices(e);
    w.values[e] = fvals[v] - fvals[u];
  }
  return w;
}

std::vector<double> coboundary_1(const Mesh& mesh, const OneForm& form) {
  std::vector<double> out(mesh.num_faces(), 0.0);
  for (int h = 0; h < mesh.num_halfedges(); ++h) out[Mesh::face_of(h)] += form.on(mesh, h);
  return out;
}

double integrate(const OneForm& form, const Chain& chain) {
  // Neumaier summation
  double sum = 0.0, comp = 0.0;
  for (auto [e, c] : chain.coeffs) {
    double term = static_cast<double>(c) * form.values[e];
    double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) comp += (sum - t) + term;
    else comp += (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

FaceForm gamma(const Mesh& mesh, const OneForm& form) {
  FaceForm ff;
  ff.coeffs.resize(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    LocalChart chart = local_chart(mesh, f);
    Eigen::Matrix<double, 3, 2> a;
    Eigen::Vector3d rhs;
    for (int i = 0; i < 3; ++i) {
      Vec2 d = chart.coords[(i + 1) % 3] - chart.coords[i];
      a.row(i) = d.transpose();
      rhs(i) = form.on(mesh, 3 * f + i);
    }
    Eigen::Matrix2d n = a.transpose() * a;
    ff.coeffs[f] = n.ldlt().solve(a.transpose() * rhs);
  }
  return ff;
}

double gamma_reconstruction_error(const Mesh& mesh, const OneForm& form, const FaceForm& ff) {
  double err = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    LocalChart chart = local_chart(mesh, f);
    for (int i = 0; i < 3; ++i) {
      Vec2 d = chart.coords[(i + 1) % 3] - chart.coords[i];
      err = std::max(err, std::abs(d.dot(ff.coeffs[f]) - form.on(mesh, 3 * f + i)));
    }
  }
  return err;
}

FaceForm pl_gradient(const Mesh& mesh, const std::vector<double>& fvals) {
  FaceForm ff;
  ff.coeffs.resize(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Vec3 p[3] = {mesh.corner(3 * f), mesh.corner(3 * f + 1), mesh.corner(3 * f + 2)};
    Vec3 n = (p[1] - p[0]).cross(p[2] - p[0]);
    double twice_area = n.norm();
    n /= twice_area;
    Vec3 grad = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
      Vec3 opposite = p[(i + 2) % 3] - p[(i + 1) % 3];
      grad += fvals[mesh.face(f)[i]] * n.cross(opposite);
    }
    grad /= twice_area;
    LocalChart chart = local_chart(mesh, f);
    ff.coeffs[f] = chart.to_chart(grad);
  }
  return ff;
}

double check_gamma_commutes(const Mesh& mesh, const std::vector<double>& fvals) {
  FaceForm lhs = gamma(mesh, coboundary_0(mesh, fvals));
  FaceForm rhs = pl_gradient(mesh, fvals);
  double worst = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    worst = std::max(worst, (lhs.coeffs[f] - rhs.coeffs[f]).norm());
  }
  return worst;
}

}  // namespace conformal
