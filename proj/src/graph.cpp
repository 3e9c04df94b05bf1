#include "conformal/graph.h"

#include <functional>
#include <queue>

namespace conformal {

VertexRing::VertexRing(const Mesh& mesh) {
  offset_.assign(mesh.num_vertices() + 1, 0);
  hedges_.reserve(mesh.num_halfedges());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    for (int h : mesh.outgoing(v)) hedges_.push_back(h);
    offset_[v + 1] = static_cast<int>(hedges_.size());
  }
}

int VertexRing::halfedge_to(const Mesh& mesh, int v, int w) const {
  for (const int* h = begin(v); h != end(v); ++h) {
    if (mesh.head(*h) == w) return *h;
  }
  return -1;
}

std::vector<double> edge_lengths(const Mesh& mesh) {
  std::vector<double> len(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) len[e] = mesh.edge_length(e);
  return len;
}

ShortestPaths dijkstra(const Mesh& mesh, const VertexRing& ring, const std::vector<double>& lengths,
                       const std::vector<std::pair<int, double>>& sources, const std::vector<char>& allowed,
                       double radius, const std::vector<char>* blocked_edges) {
  const int nv = mesh.num_vertices();
  ShortestPaths sp;
  sp.dist.assign(nv, std::numeric_limits<double>::infinity());
  sp.parent_halfedge.assign(nv, -1);
  std::vector<char> done(nv, 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  for (auto [s, d] : sources) {
    if (!allowed[s] || d >= sp.dist[s]) continue;
    sp.dist[s] = d;
    pq.emplace(d, s);
  }
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (done[v] || d > sp.dist[v]) continue;
    if (d > radius) break;
    done[v] = 1;
    sp.order.push_back(v);
    for (const int* h = ring.begin(v); h != ring.end(v); ++h) {
      int w = mesh.head(*h);
      if (!allowed[w] || done[w]) continue;
      if (blocked_edges && (*blocked_edges)[mesh.edge(*h)]) continue;
      double nd = d + lengths[mesh.edge(*h)];
      if (nd < sp.dist[w]) {
        sp.dist[w] = nd;
        sp.parent_halfedge[w] = *h;
        pq.emplace(nd, w);
      }
    }
  }
  // Unsettled vertices beyond the radius keep tentative values; hide them.
  for (int v = 0; v < nv; ++v) {
    if (!done[v]) {
      sp.dist[v] = std::numeric_limits<double>::infinity();
      sp.parent_halfedge[v] = -1;
    }
  }
  return sp;
}

}  // namespace conformal
