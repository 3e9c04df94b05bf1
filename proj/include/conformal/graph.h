#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "conformal/mesh.h"

namespace conformal {

// Outgoing halfedges of every vertex in counter-clockwise order, flattened.
class VertexRing {
 public:
  explicit VertexRing(const Mesh& mesh);

  const int* begin(int v) const { return hedges_.data() + offset_[v]; }
  const int* end(int v) const { return hedges_.data() + offset_[v + 1]; }
  int degree(int v) const { return offset_[v + 1] - offset_[v]; }
  // Halfedge v -> w, or -1.
  int halfedge_to(const Mesh& mesh, int v, int w) const;

 private:
  std::vector<int> offset_, hedges_;
};

std::vector<double> edge_lengths(const Mesh& mesh);

struct ShortestPaths {
  std::vector<double> dist;
  std::vector<int> parent_halfedge;  // halfedge parent -> v, -1 at sources
  std::vector<int> order;            // settle order
};

// Multi-source Dijkstra restricted to allowed vertices, ties broken by the
// smaller vertex id. Vertices farther than `radius` stay unsettled. Edges
// flagged in `blocked_edges` (when given) are never used.
ShortestPaths dijkstra(const Mesh& mesh, const VertexRing& ring, const std::vector<double>& lengths,
                       const std::vector<std::pair<int, double>>& sources, const std::vector<char>& allowed,
                       double radius = std::numeric_limits<double>::infinity(),
                       const std::vector<char>* blocked_edges = nullptr);

}  // namespace conformal
