#include "conformal/param.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <set>

namespace conformal {

HolomorphicForm combine_forms(const HolomorphicBasis& holo, const std::vector<int>& indices,
                              const std::vector<std::complex<double>>& coeffs) {
  if (indices.size() != coeffs.size() || indices.empty()) throw Error("combine_forms: bad coefficients");
  const int ne = static_cast<int>(holo.all[indices[0]].real.values.size());
  HolomorphicForm out;
  out.real = OneForm(ne);
  out.imag = OneForm(ne);
  out.alpha = Eigen::VectorXd::Zero(holo.all[indices[0]].alpha.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const HolomorphicForm& z = holo.all[indices[k]];
    const double a = coeffs[k].real(), b = coeffs[k].imag();
    for (int e = 0; e < ne; ++e) {
      out.real.values[e] += a * z.real.values[e] - b * z.imag.values[e];
      out.imag.values[e] += a * z.imag.values[e] + b * z.real.values[e];
    }
  }
  if (indices.size() == 1 && coeffs[0] == 1.0) out = holo.all[indices[0]];
  return out;
}

FlatParam integrate_over_domain(const Mesh& mesh, const CutMesh& domain, const HolomorphicForm& zeta, int root,
                                double tol) {
  if (domain.euler_characteristic(mesh) != 1 || domain.boundary_loops.size() != 1) {
    throw Error("integrate_over_domain: the domain is not a disk");
  }
  if (root < 0 || root >= domain.num_vertices) throw Error("integrate_over_domain: root out of range");
  FlatParam fp;
  fp.domain = domain;
  fp.form = zeta;
  fp.root = root;
  const int nc = domain.num_vertices;
  // copy adjacency through face halfedges
  std::vector<std::vector<int>> out_h(nc);
  for (int h = 0; h < mesh.num_halfedges(); ++h) out_h[domain.tail_copy(h)].push_back(h);
  auto delta = [&](int h) { return Vec2(zeta.real.on(mesh, h), zeta.imag.on(mesh, h)); };

  fp.uv.assign(nc, Vec2::Zero());
  std::vector<char> seen(nc, 0);
  std::deque<int> queue{root};
  seen[root] = 1;
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    for (int h : out_h[c]) {
      const int d = domain.head_copy(h);
      if (seen[d]) continue;
      seen[d] = 1;
      fp.uv[d] = fp.uv[c] + delta(h);
      queue.push_back(d);
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw Error("integrate_over_domain: domain is disconnected");
  double scale = 1.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    scale = std::max({scale, std::abs(zeta.real.values[e]), std::abs(zeta.imag.values[e])});
  }
  for (int h = 0; h < mesh.num_halfedges(); ++h) {
    const Vec2 d = fp.uv[domain.head_copy(h)] - fp.uv[domain.tail_copy(h)] - delta(h);
    fp.residual = std::max(fp.residual, d.lpNorm<Eigen::Infinity>());
  }
  if (fp.residual > tol * scale) {
    throw Error("integrate_over_domain: closed-loop residual " + std::to_string(fp.residual) + " above tolerance");
  }
  fp.zeros = detect_zeros(mesh, zeta);
  return fp;
}

ZeroReport detect_zeros(const Mesh& mesh, const HolomorphicForm& zeta) {
  const FaceForm ff = gamma(mesh, zeta.real);
  std::vector<double> mag(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) mag[f] = ff.coeffs[f].norm();
  std::vector<double> sorted = mag;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  if (!(median > 0.0)) throw Error("detect_zeros: the form vanishes (degenerate)");
  ZeroReport rep;
  std::vector<char> small(mesh.num_faces(), 0);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (mag[f] < 1e-6 * median) {
      small[f] = 1;
      rep.near_singular_faces.push_back(f);
    }
  }
  if (!rep.near_singular_faces.empty()) rep.generic = false;

  // angle of the face field relative to the outgoing halfedge h at tail(h)
  auto field_angle = [&](int h) {
    const int f = Mesh::face_of(h), c = h % 3;
    LocalChart chart = local_chart(mesh, f);
    const Vec2 e = chart.coords[(c + 1) % 3] - chart.coords[c];
    const Vec2& x = ff.coeffs[f];
    return std::atan2(e.x() * x.y() - e.y() * x.x(), e.dot(x));
  };
  const double two_pi = 2.0 * std::numbers::pi;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const std::vector<int> out = mesh.outgoing(v);
    const int d = static_cast<int>(out.size());
    double turn = 0.0, cone = 0.0;
    bool ambiguous = false;
    for (int i = 0; i < d; ++i) {
      const int h = out[i], hn = out[(i + 1) % d];
      if (small[Mesh::face_of(h)]) ambiguous = true;
      const double theta = corner_angle(mesh, h);
      double step = field_angle(hn) - (field_angle(h) - theta);
      step = std::remainder(step, two_pi);
      if (std::abs(std::abs(step) - std::numbers::pi) < 1e-6) ambiguous = true;
      turn += step;
      cone += theta;
    }
    const double index = -(turn + two_pi - cone) / two_pi;
    const long rounded = std::lround(index);
    if (std::abs(index - static_cast<double>(rounded)) > 1e-6) ambiguous = true;
    if (ambiguous) rep.generic = false;
    if (rounded != 0) rep.zeros.push_back({v, static_cast<int>(rounded)});
    rep.total_index += static_cast<int>(rounded);
  }
  return rep;
}

std::vector<std::complex<double>> form_avoiding_vertex(const Mesh& mesh, const HolomorphicBasis& holo, int vertex) {
  const std::vector<int>& idx = holo.independent;
  const int g = static_cast<int>(idx.size());
  if (g == 0) throw Error("form_avoiding_vertex: no holomorphic forms");
  std::set<int> region{vertex};
  for (int w : mesh.neighbors(vertex)) region.insert(w);
  std::vector<std::vector<std::complex<double>>> candidates;
  for (int k = 0; k < g; ++k) {
    std::vector<std::complex<double>> c(g, 0.0);
    c[k] = 1.0;
    candidates.push_back(c);
  }
  const std::complex<double> weights[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {2, 0}, {0.5, 0}};
  for (int j = 0; j < g; ++j) {
    for (int k = j + 1; k < g; ++k) {
      for (auto w : weights) {
        std::vector<std::complex<double>> c(g, 0.0);
        c[j] = 1.0;
        c[k] = w;
        candidates.push_back(c);
      }
    }
  }
  for (const auto& c : candidates) {
    ZeroReport rep = detect_zeros(mesh, combine_forms(holo, idx, c));
    bool clear = true;
    for (const Zero& z : rep.zeros) clear = clear && !region.count(z.vertex);
    if (clear) return c;
  }
  throw Error("form_avoiding_vertex: every candidate combination has a zero near vertex " + std::to_string(vertex));
}

std::pair<Vec2, Vec2> uv_bounds(const FlatParam& fp) {
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (const Vec2& p : fp.uv) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

void export_uv(const Mesh& mesh, const FlatParam& fp, const std::string& path, UvFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << std::setprecision(17);
  const CutMesh& cut = fp.domain;
  if (format == UvFormat::obj) {
    for (const Vec3& p : mesh.positions()) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    for (const Vec2& t : fp.uv) out << "vt " << t.x() << ' ' << t.y() << '\n';
    for (int f = 0; f < mesh.num_faces(); ++f) {
      out << 'f';
      for (int i = 0; i < 3; ++i) out << ' ' << mesh.face(f)[i] + 1 << '/' << cut.corner_vertex[3 * f + i] + 1;
      out << '\n';
    }
  } else {
    auto [lo, hi] = uv_bounds(fp);
    const Vec2 size = (hi - lo).cwiseMax(Vec2::Constant(1e-12));
    const double stroke = 0.002 * std::max(size.x(), size.y());
    // flip y so that v points up
    auto px = [&](const Vec2& p) { return Vec2(p.x(), lo.y() + hi.y() - p.y()); };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << lo.x() << ' ' << lo.y() << ' ' << size.x()
        << ' ' << size.y() << "\">\n";
    out << "<g fill=\"none\" stroke=\"black\" stroke-width=\"" << stroke << "\">\n";
    for (int f = 0; f < mesh.num_faces(); ++f) {
      out << "<polygon points=\"";
      for (int i = 0; i < 3; ++i) {
        Vec2 p = px(fp.uv[cut.corner_vertex[3 * f + i]]);
        out << (i ? " " : "") << p.x() << ',' << p.y();
      }
      out << "\"/>\n";
    }
    out << "</g>\n<g stroke=\"red\" stroke-width=\"" << 2 * stroke << "\">\n";
    for (int h = 0; h < mesh.num_halfedges(); ++h) {
      if (!cut.cut_edge[mesh.edge(h)]) continue;
      Vec2 a = px(fp.uv[cut.tail_copy(h)]), b = px(fp.uv[cut.head_copy(h)]);
      out << "<line x1=\"" << a.x() << "\" y1=\"" << a.y() << "\" x2=\"" << b.x() << "\" y2=\"" << b.y() << "\"/>\n";
    }
    out << "</g>\n</svg>\n";
  }
  if (!out) throw Error("write failed: " + path);
}

}  // namespace conformal
