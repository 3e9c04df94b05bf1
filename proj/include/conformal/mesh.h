#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace conformal {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for invalid mesh input; the message names the offending cell.
class MeshError : public Error {
 public:
  using Error::Error;
};

using Triangle = std::array<int, 3>;

// Closed oriented triangle mesh in halfedge form.
//
// Halfedge h = 3*f + i runs from corner i to corner (i+1)%3 of face f, so
// next/prev/face are arithmetic and only twins are stored. Every face also
// carries its own corner positions; by default these are the vertex
// positions, but a flat (e.g. periodic) metric can be supplied per face as
// long as both faces of every edge agree on its length.
class Mesh {
 public:
  Mesh() = default;

  // Validates and builds. Throws MeshError.
  static Mesh build(std::vector<Vec3> positions, std::vector<Triangle> faces);
  static Mesh build(std::vector<Vec3> positions, std::vector<Triangle> faces,
                    std::vector<std::array<Vec3, 3>> corner_positions);

  int num_vertices() const { return static_cast<int>(positions_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_edges() const { return static_cast<int>(edge_halfedge_.size()); }
  int num_halfedges() const { return 3 * num_faces(); }

  static int face_of(int h) { return h / 3; }
  static int next(int h) { return 3 * (h / 3) + (h % 3 + 1) % 3; }
  static int prev(int h) { return 3 * (h / 3) + (h % 3 + 2) % 3; }
  int tail(int h) const { return faces_[h / 3][h % 3]; }
  int head(int h) const { return faces_[h / 3][(h % 3 + 1) % 3]; }
  int twin(int h) const { return twin_[h]; }
  int edge(int h) const { return edge_of_[h]; }

  // Canonical halfedge of an edge: runs from the lower to the higher vertex id.
  int edge_halfedge(int e) const { return edge_halfedge_[e]; }
  std::array<int, 2> edge_vertices(int e) const {
    int h = edge_halfedge_[e];
    return {tail(h), head(h)};
  }
  // +1 if h agrees with the canonical direction of its edge, -1 otherwise.
  int edge_sign(int h) const { return edge_halfedge_[edge_of_[h]] == h ? 1 : -1; }

  // -1 when absent.
  int find_halfedge(int from, int to) const;
  int find_edge(int u, int v) const;

  int vertex_halfedge(int v) const { return vertex_halfedge_[v]; }
  // Outgoing halfedges of v in counter-clockwise order.
  std::vector<int> outgoing(int v) const;
  int ccw_outgoing(int h) const { return twin_[prev(h)]; }
  std::vector<int> neighbors(int v) const;
  int degree(int v) const { return static_cast<int>(outgoing(v).size()); }

  const std::vector<Vec3>& positions() const { return positions_; }
  const Vec3& position(int v) const { return positions_[v]; }
  const std::vector<Triangle>& faces() const { return faces_; }
  const Triangle& face(int f) const { return faces_[f]; }

  // Position of tail(h) in the geometry of face(h).
  const Vec3& corner(int h) const { return corners_[h]; }
  Vec3 halfedge_vector(int h) const { return corners_[next(h)] - corners_[h]; }
  double edge_length(int e) const { return halfedge_vector(edge_halfedge_[e]).norm(); }
  bool has_intrinsic_corners() const { return intrinsic_corners_; }
  std::vector<std::array<Vec3, 3>> corner_positions() const;

  double bounding_box_diagonal() const;
  double total_area() const;

 private:
  void connect();

  std::vector<Vec3> positions_;
  std::vector<Triangle> faces_;
  std::vector<Vec3> corners_;
  std::vector<int> twin_;
  std::vector<int> edge_of_;
  std::vector<int> edge_halfedge_;
  std::vector<int> vertex_halfedge_;
  std::unordered_map<std::uint64_t, int> halfedge_index_;
  bool intrinsic_corners_ = false;
};

struct EulerGenus {
  int chi = 0;
  int genus = 0;
};

EulerGenus euler_genus(const Mesh& mesh);

// Isometric planar frame for one face: corner 0 at the origin, corner 1 on
// the positive x-axis, corner 2 in the upper half plane.
struct LocalChart {
  int face = -1;
  int origin = -1;
  Vec3 origin_position = Vec3::Zero();
  Vec3 x_axis = Vec3::UnitX();
  Vec3 y_axis = Vec3::UnitY();
  std::array<Vec2, 3> coords{};

  Vec2 to_chart(const Vec3& tangent) const { return {tangent.dot(x_axis), tangent.dot(y_axis)}; }
};

LocalChart local_chart(const Mesh& mesh, int face);

double face_area(const Mesh& mesh, int face);
bool is_degenerate_face(const Mesh& mesh, int face);

// Cotangent of the angle opposite halfedge h inside its face.
double opposite_cotangent(const Mesh& mesh, int h);
// Interior angle of face(h) at tail(h).
double corner_angle(const Mesh& mesh, int h);

struct EdgeWeights {
  std::vector<double> values;  // indexed by edge

  double operator[](int e) const { return values[e]; }
  double& operator[](int e) { return values[e]; }
  int size() const { return static_cast<int>(values.size()); }
  double min() const;
};

// k(u,v) = 1/2 (cot alpha + cot beta) with alpha, beta opposite the edge.
EdgeWeights cotan_weights(const Mesh& mesh);
EdgeWeights unit_weights(const Mesh& mesh);

enum class PreprocessMode { none, swap, split };

PreprocessMode parse_preprocess_mode(const std::string& name);
std::string to_string(PreprocessMode mode);

struct PreprocessReport {
  int swaps = 0;
  int splits = 0;
  // Vertex pairs of edges that are still negative.
  std::vector<std::array<int, 2>> residual_negative;

  bool empty() const { return swaps == 0 && splits == 0 && residual_negative.empty(); }
};

struct PreprocessResult {
  Mesh mesh;
  PreprocessReport report;
};

// Removes negative cotangent weights by edge flips (falling back to a
// midpoint split when a flip would duplicate an edge) or by splits only.
PreprocessResult preprocess_negative_weights(const Mesh& mesh, PreprocessMode mode);

}  // namespace conformal
