#include "conformal/mesh.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include <Eigen/Geometry>

namespace conformal {

namespace {

std::uint64_t directed_key(int from, int to) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 32) |
         static_cast<std::uint32_t>(to);
}

std::string edge_name(int u, int v) {
  return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

Mesh Mesh::build(std::vector<Vec3> positions, std::vector<Triangle> faces) {
  std::vector<std::array<Vec3, 3>> corners(faces.size());
  const int n = static_cast<int>(positions.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int i = 0; i < 3; ++i) {
      int v = faces[f][i];
      if (v < 0 || v >= n) {
        throw MeshError("face " + std::to_string(f) + " references missing vertex " +
                        std::to_string(v));
      }
      corners[f][i] = positions[v];
    }
  }
  Mesh mesh = build(std::move(positions), std::move(faces), std::move(corners));
  mesh.intrinsic_corners_ = false;
  return mesh;
}

Mesh Mesh::build(std::vector<Vec3> positions, std::vector<Triangle> faces,
                 std::vector<std::array<Vec3, 3>> corner_positions) {
  if (corner_positions.size() != faces.size()) {
    throw MeshError("corner geometry size does not match face count");
  }
  Mesh mesh;
  mesh.positions_ = std::move(positions);
  mesh.faces_ = std::move(faces);
  mesh.intrinsic_corners_ = true;
  const int n = mesh.num_vertices();
  mesh.corners_.resize(3 * mesh.faces_.size());
  for (std::size_t f = 0; f < mesh.faces_.size(); ++f) {
    const Triangle& t = mesh.faces_[f];
    for (int i = 0; i < 3; ++i) {
      if (t[i] < 0 || t[i] >= n) {
        throw MeshError("face " + std::to_string(f) + " references missing vertex " +
                        std::to_string(t[i]));
      }
      mesh.corners_[3 * f + i] = corner_positions[f][i];
    }
    if (t[0] == t[1] || t[1] == t[2] || t[2] == t[0]) {
      throw MeshError("degenerate face " + std::to_string(f) + ": repeated vertex");
    }
  }
  mesh.connect();
  return mesh;
}

void Mesh::connect() {
  const int nh = num_halfedges();
  const int nv = num_vertices();

  // Group halfedges by undirected edge to classify problems precisely.
  std::unordered_map<std::uint64_t, std::vector<int>> by_edge;
  by_edge.reserve(nh);
  for (int h = 0; h < nh; ++h) {
    int u = tail(h), v = head(h);
    by_edge[directed_key(std::min(u, v), std::max(u, v))].push_back(h);
  }
  twin_.assign(nh, -1);
  edge_of_.assign(nh, -1);
  edge_halfedge_.clear();
  edge_halfedge_.reserve(by_edge.size());
  halfedge_index_.clear();
  halfedge_index_.reserve(nh);

  // Deterministic edge numbering: visit halfedges in order.
  for (int h = 0; h < nh; ++h) {
    if (edge_of_[h] >= 0) continue;
    int u = tail(h), v = head(h);
    const auto& group = by_edge[directed_key(std::min(u, v), std::max(u, v))];
    if (group.size() == 1) throw MeshError("boundary edge " + edge_name(u, v));
    if (group.size() > 2) throw MeshError("non-manifold edge " + edge_name(u, v));
    int a = group[0], b = group[1];
    if (tail(a) == tail(b)) {
      throw MeshError("inconsistent orientation at edge " + edge_name(u, v));
    }
    twin_[a] = b;
    twin_[b] = a;
    int e = static_cast<int>(edge_halfedge_.size());
    edge_of_[a] = edge_of_[b] = e;
    edge_halfedge_.push_back(tail(a) < head(a) ? a : b);
  }
  for (int h = 0; h < nh; ++h) halfedge_index_[directed_key(tail(h), head(h))] = h;

  vertex_halfedge_.assign(nv, -1);
  std::vector<int> corner_count(nv, 0);
  for (int h = 0; h < nh; ++h) {
    if (vertex_halfedge_[tail(h)] < 0) vertex_halfedge_[tail(h)] = h;
    ++corner_count[tail(h)];
  }
  for (int v = 0; v < nv; ++v) {
    if (vertex_halfedge_[v] < 0) throw MeshError("isolated vertex " + std::to_string(v));
    int count = 0;
    int h = vertex_halfedge_[v];
    do {
      ++count;
      h = ccw_outgoing(h);
    } while (h != vertex_halfedge_[v] && count <= corner_count[v]);
    if (count != corner_count[v]) throw MeshError("non-manifold vertex " + std::to_string(v));
  }

  if (intrinsic_corners_) {
    for (int e = 0; e < num_edges(); ++e) {
      int h = edge_halfedge_[e];
      double la = halfedge_vector(h).norm();
      double lb = halfedge_vector(twin_[h]).norm();
      if (std::abs(la - lb) > 1e-9 * std::max(la, lb)) {
        auto [u, v] = edge_vertices(e);
        throw MeshError("inconsistent corner geometry at edge " + edge_name(u, v));
      }
    }
  }

  const double diag = bounding_box_diagonal();
  for (int f = 0; f < num_faces(); ++f) {
    double area = triangle_area(corners_[3 * f], corners_[3 * f + 1], corners_[3 * f + 2]);
    if (area < 1e-12 * diag * diag) {
      throw MeshError("degenerate face " + std::to_string(f));
    }
  }
}

int Mesh::find_halfedge(int from, int to) const {
  auto it = halfedge_index_.find(directed_key(from, to));
  return it == halfedge_index_.end() ? -1 : it->second;
}

int Mesh::find_edge(int u, int v) const {
  int h = find_halfedge(u, v);
  return h < 0 ? -1 : edge_of_[h];
}

std::vector<int> Mesh::outgoing(int v) const {
  std::vector<int> out;
  int start = vertex_halfedge_[v];
  int h = start;
  do {
    out.push_back(h);
    h = ccw_outgoing(h);
  } while (h != start);
  return out;
}

std::vector<int> Mesh::neighbors(int v) const {
  std::vector<int> out;
  for (int h : outgoing(v)) out.push_back(head(h));
  return out;
}

std::vector<std::array<Vec3, 3>> Mesh::corner_positions() const {
  std::vector<std::array<Vec3, 3>> out(faces_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    for (int i = 0; i < 3; ++i) out[f][i] = corners_[3 * f + i];
  }
  return out;
}

double Mesh::bounding_box_diagonal() const {
  if (corners_.empty()) return 0.0;
  Vec3 lo = corners_.front(), hi = corners_.front();
  for (const Vec3& p : corners_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

double Mesh::total_area() const {
  double sum = 0.0;
  for (int f = 0; f < num_faces(); ++f) sum += face_area(*this, f);
  return sum;
}

EulerGenus euler_genus(const Mesh& mesh) {
  EulerGenus out;
  out.chi = mesh.num_vertices() - mesh.num_edges() + mesh.num_faces();
  if (out.chi % 2 != 0 || out.chi > 2) {
    throw Error("internal validation error: Euler characteristic " + std::to_string(out.chi) +
                " is impossible for a closed orientable mesh");
  }
  out.genus = (2 - out.chi) / 2;
  return out;
}

LocalChart local_chart(const Mesh& mesh, int face) {
  if (face < 0 || face >= mesh.num_faces()) throw Error("no face " + std::to_string(face));
  const Vec3& p0 = mesh.corner(3 * face);
  const Vec3& p1 = mesh.corner(3 * face + 1);
  const Vec3& p2 = mesh.corner(3 * face + 2);
  Vec3 e1 = p1 - p0;
  Vec3 e2 = p2 - p0;
  Vec3 normal = e1.cross(e2);
  double scale = std::max(e1.squaredNorm(), e2.squaredNorm());
  if (normal.norm() <= 1e-14 * scale || e1.norm() == 0.0) {
    throw Error("degenerate face " + std::to_string(face) + " has no chart");
  }
  LocalChart chart;
  chart.face = face;
  chart.origin = mesh.face(face)[0];
  chart.origin_position = p0;
  chart.x_axis = e1.normalized();
  chart.y_axis = normal.normalized().cross(chart.x_axis);
  chart.coords[0] = Vec2::Zero();
  chart.coords[1] = Vec2(e1.norm(), 0.0);
  chart.coords[2] = chart.to_chart(e2);
  return chart;
}

double face_area(const Mesh& mesh, int face) {
  return triangle_area(mesh.corner(3 * face), mesh.corner(3 * face + 1), mesh.corner(3 * face + 2));
}

bool is_degenerate_face(const Mesh& mesh, int face) {
  double diag = mesh.bounding_box_diagonal();
  return face_area(mesh, face) < 1e-12 * diag * diag;
}

double opposite_cotangent(const Mesh& mesh, int h) {
  const Vec3& o = mesh.corner(Mesh::prev(h));
  Vec3 a = mesh.corner(h) - o;
  Vec3 b = mesh.corner(Mesh::next(h)) - o;
  double cross = a.cross(b).norm();
  if (cross == 0.0) throw Error("degenerate face " + std::to_string(Mesh::face_of(h)));
  return a.dot(b) / cross;
}

double corner_angle(const Mesh& mesh, int h) {
  Vec3 a = mesh.halfedge_vector(h);
  Vec3 b = -mesh.halfedge_vector(Mesh::prev(h));
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

double EdgeWeights::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double w : values) m = std::min(m, w);
  return m;
}

EdgeWeights cotan_weights(const Mesh& mesh) {
  EdgeWeights w;
  w.values.assign(mesh.num_edges(), 0.0);
  for (int h = 0; h < mesh.num_halfedges(); ++h) {
    w.values[mesh.edge(h)] += 0.5 * opposite_cotangent(mesh, h);
  }
  return w;
}

EdgeWeights unit_weights(const Mesh& mesh) {
  EdgeWeights w;
  w.values.assign(mesh.num_edges(), 1.0);
  return w;
}

PreprocessMode parse_preprocess_mode(const std::string& name) {
  if (name == "none") return PreprocessMode::none;
  if (name == "swap") return PreprocessMode::swap;
  if (name == "split") return PreprocessMode::split;
  throw Error("unknown preprocess mode '" + name + "' (expected swap, split or none)");
}

std::string to_string(PreprocessMode mode) {
  switch (mode) {
    case PreprocessMode::none: return "none";
    case PreprocessMode::swap: return "swap";
    case PreprocessMode::split: return "split";
  }
  return "none";
}

namespace {

constexpr double kNegativeWeight = -1e-12;
constexpr int kMaxPreprocessPasses = 200;

double cot_at(const Vec3& apex, const Vec3& a, const Vec3& b) {
  Vec3 u = a - apex, v = b - apex;
  return u.dot(v) / u.cross(v).norm();
}

struct Editable {
  std::vector<Vec3> positions;
  std::vector<Triangle> faces;
  std::vector<std::array<Vec3, 3>> corners;
};

// Face(h) listed so that corner 0 -> corner 1 is halfedge h.
std::array<int, 3> rotated_face(const Mesh& mesh, int h) {
  return {mesh.tail(h), mesh.head(h), mesh.tail(Mesh::prev(h))};
}
std::array<Vec3, 3> rotated_corners(const Mesh& mesh, int h) {
  return {mesh.corner(h), mesh.corner(Mesh::next(h)), mesh.corner(Mesh::prev(h))};
}

}  // namespace

PreprocessResult preprocess_negative_weights(const Mesh& input, PreprocessMode mode) {
  PreprocessResult result{input, {}};
  if (mode == PreprocessMode::none) {
    EdgeWeights w = cotan_weights(input);
    for (int e = 0; e < input.num_edges(); ++e) {
      if (w[e] < kNegativeWeight) result.report.residual_negative.push_back(input.edge_vertices(e));
    }
    return result;
  }

  const bool intrinsic = input.has_intrinsic_corners();
  for (int pass = 0; pass < kMaxPreprocessPasses; ++pass) {
    const Mesh& mesh = result.mesh;
    EdgeWeights w = cotan_weights(mesh);
    std::vector<int> negative;
    for (int e = 0; e < mesh.num_edges(); ++e) {
      if (w[e] < kNegativeWeight) negative.push_back(e);
    }
    if (negative.empty()) break;
    // Most negative first; ties by edge id.
    std::stable_sort(negative.begin(), negative.end(),
                     [&](int a, int b) { return w[a] < w[b]; });

    Editable ed{mesh.positions(), mesh.faces(), mesh.corner_positions()};
    std::vector<char> face_touched(mesh.num_faces(), 0);
    std::unordered_set<std::uint64_t> new_edges;
    std::vector<Triangle> added_faces;
    std::vector<std::array<Vec3, 3>> added_corners;
    const double diag = mesh.bounding_box_diagonal();
    bool changed = false;

    for (int e : negative) {
      int ha = mesh.edge_halfedge(e);
      int hb = mesh.twin(ha);
      int fa = Mesh::face_of(ha), fb = Mesh::face_of(hb);
      if (face_touched[fa] || face_touched[fb]) continue;
      auto A = rotated_face(mesh, ha);   // (u, v, w)
      auto B = rotated_face(mesh, hb);   // (v, u, x)
      auto cA = rotated_corners(mesh, ha);
      auto cB = rotated_corners(mesh, hb);
      int u = A[0], v = A[1], wv = A[2], x = B[2];
      Vec3 shift = cA[0] - cB[1];
      Vec3 cu = cA[0], cv = cA[1], cw = cA[2], cx = cB[2] + shift;

      bool flipped = false;
      if (mode == PreprocessMode::swap) {
        std::uint64_t key = directed_key(std::min(wv, x), std::max(wv, x));
        bool duplicate = wv == x || mesh.find_edge(wv, x) >= 0 || new_edges.count(key) > 0;
        if (!duplicate) {
          Vec3 n_old = (cv - cu).cross(cw - cu) + (cu - cv).cross(cx - cv);
          Vec3 n1 = (cx - cu).cross(cw - cu);
          Vec3 n2 = (cv - cx).cross(cw - cx);
          bool folded = n1.dot(n_old) <= 0.0 || n2.dot(n_old) <= 0.0;
          bool degenerate = 0.5 * n1.norm() < 1e-12 * diag * diag ||
                            0.5 * n2.norm() < 1e-12 * diag * diag;
          if (!folded && !degenerate) {
            double k_new = 0.5 * (cot_at(cu, cx, cw) + cot_at(cv, cw, cx));
            if (k_new > w[e]) {
              added_faces.push_back({u, x, wv});
              added_corners.push_back({cu, cx, cw});
              added_faces.push_back({x, v, wv});
              added_corners.push_back({cx, cv, cw});
              new_edges.insert(key);
              ++result.report.swaps;
              flipped = true;
            }
          }
        }
      }
      if (!flipped) {
        int m = static_cast<int>(ed.positions.size());
        Vec3 cm = 0.5 * (cu + cv);
        Vec3 cmB = 0.5 * (cB[0] + cB[1]);
        ed.positions.push_back(intrinsic ? cm : 0.5 * (mesh.position(u) + mesh.position(v)));
        added_faces.push_back({u, m, wv});
        added_corners.push_back({cu, cm, cw});
        added_faces.push_back({m, v, wv});
        added_corners.push_back({cm, cv, cw});
        added_faces.push_back({v, m, x});
        added_corners.push_back({cB[0], cmB, cB[2]});
        added_faces.push_back({m, u, x});
        added_corners.push_back({cmB, cB[1], cB[2]});
        new_edges.insert(directed_key(std::min(m, wv), std::max(m, wv)));
        new_edges.insert(directed_key(std::min(m, x), std::max(m, x)));
        ++result.report.splits;
      }
      face_touched[fa] = face_touched[fb] = 1;
      changed = true;
    }
    if (!changed) break;

    std::vector<Triangle> faces;
    std::vector<std::array<Vec3, 3>> corners;
    for (int f = 0; f < mesh.num_faces(); ++f) {
      if (face_touched[f]) continue;
      faces.push_back(ed.faces[f]);
      corners.push_back(ed.corners[f]);
    }
    faces.insert(faces.end(), added_faces.begin(), added_faces.end());
    corners.insert(corners.end(), added_corners.begin(), added_corners.end());
    result.mesh = intrinsic ? Mesh::build(std::move(ed.positions), std::move(faces), std::move(corners))
                            : Mesh::build(std::move(ed.positions), std::move(faces));
  }

  EdgeWeights w = cotan_weights(result.mesh);
  for (int e = 0; e < result.mesh.num_edges(); ++e) {
    if (w[e] < kNegativeWeight) result.report.residual_negative.push_back(result.mesh.edge_vertices(e));
  }
  return result;
}

}  // namespace conformal
