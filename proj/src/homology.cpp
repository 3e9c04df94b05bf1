#include "conformal/homology.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

#include "conformal/graph.h"
#include "conformal/smith.h"

namespace conformal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_zero(const std::vector<std::int64_t>& v) {
  return std::all_of(v.begin(), v.end(), [](std::int64_t x) { return x == 0; });
}

// Vertex path from the Dijkstra parents, source first.
std::vector<int> trace_path(const Mesh& mesh, const ShortestPaths& sp, int target) {
  std::vector<int> path;
  for (int v = target; v >= 0; v = sp.parent_halfedge[v] >= 0 ? mesh.tail(sp.parent_halfedge[v]) : -1) {
    path.push_back(v);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Vertices strictly inside the wedge swept counter-clockwise at v from the
// direction v->from to the direction v->to.
std::vector<int> wedge_vertices(const Mesh& mesh, const VertexRing& ring, int v, int from, int to) {
  std::vector<int> out;
  int h_from = ring.halfedge_to(mesh, v, from);
  int h_to = ring.halfedge_to(mesh, v, to);
  if (h_from < 0 || h_to < 0) throw Error("wedge query on non-adjacent vertices");
  for (int o = mesh.ccw_outgoing(h_from); o != h_to; o = mesh.ccw_outgoing(o)) out.push_back(mesh.head(o));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Intersection numbers

std::vector<int> loop_dual_cochain(const Mesh& mesh, const std::vector<int>& w) {
  const int n = static_cast<int>(w.size());
  if (n < 3) throw Error("loop needs at least 3 vertices");
  std::vector<int> cochain(mesh.num_edges(), 0);
  for (int i = 0; i < n; ++i) {
    int v = w[i], p = w[(i + n - 1) % n], nx = w[(i + 1) % n];
    int h_in = mesh.find_halfedge(v, p);
    int h_out = mesh.find_halfedge(v, nx);
    if (h_in < 0 || h_out < 0) throw Error("loop uses a missing edge at vertex " + std::to_string(v));
    // Right side: counter-clockwise from the incoming direction to the outgoing one.
    for (int o = mesh.ccw_outgoing(h_in); o != h_out; o = mesh.ccw_outgoing(o)) {
      cochain[mesh.edge(o)] += mesh.edge_sign(o);
    }
  }
  return cochain;
}

std::int64_t intersection_with_loop(const Mesh& mesh, const Chain& z, const std::vector<int>& w) {
  std::vector<int> pd = loop_dual_cochain(mesh, w);
  std::int64_t s = 0;
  for (auto [e, c] : z.coeffs) s += c * pd[e];
  return s;
}

// ---------------------------------------------------------------------------
// Tree/cotree reduction

HomologyContext::HomologyContext(const Mesh& mesh, int root) : mesh_(&mesh) {
  const int nv = mesh.num_vertices(), ne = mesh.num_edges(), nf = mesh.num_faces();
  VertexRing ring(mesh);
  std::vector<double> len = edge_lengths(mesh);
  std::vector<char> all(nv, 1);
  ShortestPaths sp = dijkstra(mesh, ring, len, {{root, 0.0}}, all);

  in_tree_.assign(ne, 0);
  for (int v = 0; v < nv; ++v) {
    if (sp.parent_halfedge[v] >= 0) in_tree_[mesh.edge(sp.parent_halfedge[v])] = 1;
  }

  // Maximum spanning tree of the dual graph, weighted by the length of the
  // loop each edge closes, so the leftover generator loops are short.
  std::vector<int> dual_edges;
  for (int e = 0; e < ne; ++e) {
    if (!in_tree_[e]) dual_edges.push_back(e);
  }
  auto loop_weight = [&](int e) {
    auto [u, v] = mesh.edge_vertices(e);
    return sp.dist[u] + len[e] + sp.dist[v];
  };
  std::stable_sort(dual_edges.begin(), dual_edges.end(),
                   [&](int a, int b) { return loop_weight(a) > loop_weight(b); });
  std::vector<int> uf(nf);
  std::iota(uf.begin(), uf.end(), 0);
  auto find = [&](int x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  in_cotree_.assign(ne, 0);
  for (int e : dual_edges) {
    int h = mesh.edge_halfedge(e);
    int a = find(Mesh::face_of(h)), b = find(Mesh::face_of(mesh.twin(h)));
    if (a == b) {
      generators_.push_back(e);
    } else {
      uf[a] = b;
      in_cotree_[e] = 1;
    }
  }
  std::sort(generators_.begin(), generators_.end());
  EulerGenus eg = euler_genus(mesh);
  if (static_cast<int>(generators_.size()) != 2 * eg.genus) {
    throw Error("tree/cotree reduction left " + std::to_string(generators_.size()) + " generators for genus " +
                std::to_string(eg.genus));
  }

  // Generator loops: v -> ... -> lca -> ... -> u, closed by the edge u -> v.
  std::vector<int> depth(nv, 0);
  for (int v : sp.order) {
    if (sp.parent_halfedge[v] >= 0) depth[v] = depth[mesh.tail(sp.parent_halfedge[v])] + 1;
  }
  auto parent = [&](int v) { return mesh.tail(sp.parent_halfedge[v]); };
  for (int e : generators_) {
    auto [u, v] = mesh.edge_vertices(e);
    std::vector<int> up_u{u}, up_v{v};
    int x = u, y = v;
    while (depth[x] > depth[y]) up_u.push_back(x = parent(x));
    while (depth[y] > depth[x]) up_v.push_back(y = parent(y));
    while (x != y) {
      up_u.push_back(x = parent(x));
      up_v.push_back(y = parent(y));
    }
    std::vector<int> loop = up_v;
    for (int i = static_cast<int>(up_u.size()) - 2; i >= 0; --i) loop.push_back(up_u[i]);
    loops_.push_back(std::move(loop));
  }

  // Root the cotree at face 0.
  std::vector<int> up_halfedge(nf, -1), fdepth(nf, -1);
  {
    std::queue<int> q;
    q.push(0);
    fdepth[0] = 0;
    while (!q.empty()) {
      int f = q.front();
      q.pop();
      for (int i = 0; i < 3; ++i) {
        int h = 3 * f + i;
        if (!in_cotree_[mesh.edge(h)]) continue;
        int g = Mesh::face_of(mesh.twin(h));
        if (fdepth[g] >= 0) continue;
        fdepth[g] = fdepth[f] + 1;
        up_halfedge[g] = mesh.twin(h);
        q.push(g);
      }
    }
  }
  for (int e : generators_) {
    std::vector<std::int8_t> eta(ne, 0);
    auto cross = [&](int h) { eta[mesh.edge(h)] += static_cast<std::int8_t>(mesh.edge_sign(h)); };
    int h = mesh.edge_halfedge(e);
    int fa = Mesh::face_of(h), fb = Mesh::face_of(mesh.twin(h));
    cross(h);
    // Cotree path fb -> fa.
    std::vector<int> down;  // crossings from the lca towards fa, collected upwards
    int x = fb, y = fa;
    while (fdepth[x] > fdepth[y]) {
      cross(up_halfedge[x]);
      x = Mesh::face_of(mesh.twin(up_halfedge[x]));
    }
    while (fdepth[y] > fdepth[x]) {
      down.push_back(mesh.twin(up_halfedge[y]));
      y = Mesh::face_of(mesh.twin(up_halfedge[y]));
    }
    while (x != y) {
      cross(up_halfedge[x]);
      x = Mesh::face_of(mesh.twin(up_halfedge[x]));
      down.push_back(mesh.twin(up_halfedge[y]));
      y = Mesh::face_of(mesh.twin(up_halfedge[y]));
    }
    for (auto it = down.rbegin(); it != down.rend(); ++it) cross(*it);
    cocycles_.push_back(std::move(eta));
  }

  const int n = static_cast<int>(generators_.size());
  pairing_ = IntMatrix::Zero(n, n);
  for (int l = 0; l < n; ++l) {
    std::vector<int> pd = loop_dual_cochain(mesh, loops_[l]);
    for (int k = 0; k < n; ++k) {
      std::int64_t s = 0;
      const auto& lk = loops_[k];
      for (std::size_t i = 0; i < lk.size(); ++i) {
        int hh = mesh.find_halfedge(lk[i], lk[(i + 1) % lk.size()]);
        s += mesh.edge_sign(hh) * pd[mesh.edge(hh)];
      }
      pairing_(k, l) = s;
    }
  }
}

std::vector<std::int64_t> HomologyContext::coordinates(const Chain& cycle) const {
  std::vector<std::int64_t> c(generators_.size(), 0);
  for (auto [e, coeff] : cycle.coeffs) {
    for (std::size_t k = 0; k < generators_.size(); ++k) c[k] += coeff * cocycles_[k][e];
  }
  return c;
}

std::vector<std::int64_t> HomologyContext::loop_coordinates(const std::vector<int>& loop) const {
  std::vector<std::int64_t> c(generators_.size(), 0);
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    int h = mesh_->find_halfedge(loop[i], loop[(i + 1) % n]);
    if (h < 0) throw Error("loop uses a missing edge");
    for (std::size_t k = 0; k < generators_.size(); ++k) c[k] += cocycle(static_cast<int>(k), h);
  }
  return c;
}

std::int64_t HomologyContext::intersection(const Chain& a, const Chain& b) const {
  std::vector<std::int64_t> ca = coordinates(a), cb = coordinates(b);
  std::int64_t s = 0;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    for (std::size_t j = 0; j < cb.size(); ++j) s += ca[i] * pairing_(i, j) * cb[j];
  }
  return s;
}

// ---------------------------------------------------------------------------
// Loop shortening

std::vector<int> shorten_loop(const Mesh& mesh, const HomologyContext& ctx, const std::vector<int>& input,
                              const std::vector<char>& blocked) {
  VertexRing ring(mesh);
  std::vector<double> len = edge_lengths(mesh);
  std::vector<int> loop = input;
  std::vector<char> allowed(mesh.num_vertices(), 1);
  for (int v = 0; v < mesh.num_vertices(); ++v) allowed[v] = !blocked[v];
  for (int v : loop) allowed[v] = 1;

  auto step_length = [&](int a, int b) { return len[mesh.edge(ring.halfedge_to(mesh, a, b))]; };
  auto path_coords = [&](const std::vector<int>& path) {
    std::vector<std::int64_t> c(2 * ctx.genus(), 0);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      int h = ring.halfedge_to(mesh, path[i], path[i + 1]);
      for (int k = 0; k < 2 * ctx.genus(); ++k) c[k] += ctx.cocycle(k, h);
    }
    return c;
  };

  for (int pass = 0; pass < 4; ++pass) {
    bool improved = false;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const std::size_t n = loop.size();
      if (n < 4) break;
      double total = 0.0;
      std::vector<double> seg(n, 0.0);  // arc length from loop[i] forward
      for (std::size_t t = 1; t < n; ++t) {
        seg[t] = seg[t - 1] + step_length(loop[(i + t - 1) % n], loop[(i + t) % n]);
      }
      total = seg[n - 1] + step_length(loop[(i + n - 1) % n], loop[i]);
      ShortestPaths sp = dijkstra(mesh, ring, len, {{loop[i], 0.0}}, allowed, 0.5 * total + 1e-12);
      std::vector<std::pair<double, std::size_t>> gains;
      for (std::size_t t = 2; t < n; ++t) {
        if (seg[t] > 0.5 * total) break;
        double d = sp.dist[loop[(i + t) % n]];
        if (d + 1e-9 * total < seg[t]) gains.emplace_back(seg[t] - d, t);
      }
      std::stable_sort(gains.begin(), gains.end(), [](auto& a, auto& b) { return a.first > b.first; });
      int attempts = 0;
      for (auto [gain, t] : gains) {
        if (++attempts > 8) break;
        std::vector<int> path = trace_path(mesh, sp, loop[(i + t) % n]);
        std::vector<int> old_seg;
        for (std::size_t s = 0; s <= t; ++s) old_seg.push_back(loop[(i + s) % n]);
        std::vector<char> rest(mesh.num_vertices(), 0);
        for (std::size_t s = t + 1; s < n; ++s) rest[loop[(i + s) % n]] = 1;
        bool simple = true;
        for (std::size_t s = 1; s + 1 < path.size(); ++s) simple = simple && !rest[path[s]];
        if (!simple) continue;
        if (path_coords(path) != path_coords(old_seg)) continue;
        std::vector<int> next = path;
        for (std::size_t s = t + 1; s < n; ++s) next.push_back(loop[(i + s) % n]);
        loop = std::move(next);
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return loop;
}

Chain shorten_cycle(const Mesh& mesh, const Chain& cycle) {
  std::vector<int> loop;
  try {
    loop = loop_from_chain(mesh, cycle);
  } catch (const Error&) {
    return cycle;
  }
  if (loop.size() < 4) return cycle;
  HomologyContext ctx(mesh);
  std::vector<char> blocked(mesh.num_vertices(), 0);
  return chain_from_loop(mesh, shorten_loop(mesh, ctx, loop, blocked));
}

// ---------------------------------------------------------------------------
// Canonical system of loops

namespace {

struct LoopCandidate {
  double length;
  int edge;
};

// Shortest-path forest on the allowed vertices; non-tree edges that close a
// homologically nontrivial loop, shortest first.
std::vector<std::vector<int>> nontrivial_loops(const Mesh& mesh, const VertexRing& ring,
                                               const std::vector<double>& len, const HomologyContext& ctx,
                                               const std::vector<char>& allowed, std::size_t max_loops) {
  const int nv = mesh.num_vertices();
  const int n = 2 * ctx.genus();
  std::vector<int> component(nv, -1), depth(nv, 0);
  std::vector<std::vector<std::int64_t>> pot(nv);
  ShortestPaths forest;
  forest.dist.assign(nv, kInf);
  forest.parent_halfedge.assign(nv, -1);
  for (int s = 0; s < nv; ++s) {
    if (!allowed[s] || component[s] >= 0) continue;
    ShortestPaths sp = dijkstra(mesh, ring, len, {{s, 0.0}}, allowed);
    for (int v : sp.order) {
      component[v] = s;
      forest.dist[v] = sp.dist[v];
      forest.parent_halfedge[v] = sp.parent_halfedge[v];
      int h = sp.parent_halfedge[v];
      if (h < 0) {
        pot[v].assign(n, 0);
      } else {
        pot[v] = pot[mesh.tail(h)];
        for (int k = 0; k < n; ++k) pot[v][k] += ctx.cocycle(k, h);
        depth[v] = depth[mesh.tail(h)] + 1;
      }
    }
  }
  std::vector<LoopCandidate> cands;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    auto [u, v] = mesh.edge_vertices(e);
    if (!allowed[u] || !allowed[v] || component[u] != component[v]) continue;
    int h = mesh.edge_halfedge(e);
    if (forest.parent_halfedge[v] == h || forest.parent_halfedge[u] == mesh.twin(h)) continue;
    bool nontrivial = false;
    for (int k = 0; k < n && !nontrivial; ++k) nontrivial = pot[u][k] + ctx.cocycle(k, h) - pot[v][k] != 0;
    if (nontrivial) cands.push_back({forest.dist[u] + len[e] + forest.dist[v], e});
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const LoopCandidate& a, const LoopCandidate& b) { return a.length < b.length; });
  std::vector<std::vector<int>> loops;
  auto parent = [&](int v) { return mesh.tail(forest.parent_halfedge[v]); };
  for (const LoopCandidate& c : cands) {
    if (loops.size() >= max_loops) break;
    auto [u, v] = mesh.edge_vertices(c.edge);
    std::vector<int> up_u{u}, up_v{v};
    int x = u, y = v;
    while (depth[x] > depth[y]) up_u.push_back(x = parent(x));
    while (depth[y] > depth[x]) up_v.push_back(y = parent(y));
    while (x != y) {
      up_u.push_back(x = parent(x));
      up_v.push_back(y = parent(y));
    }
    std::vector<int> loop = up_v;
    for (int i = static_cast<int>(up_u.size()) - 2; i >= 0; --i) loop.push_back(up_u[i]);
    if (loop.size() >= 3) loops.push_back(std::move(loop));
  }
  return loops;
}

// Simple loop through a[i] that leaves a to its left and returns from its
// right, avoiding every other vertex of a and all blocked vertices.
std::vector<int> crossing_loop(const Mesh& mesh, const VertexRing& ring, const std::vector<double>& len,
                               const std::vector<int>& a, const std::vector<char>& blocked) {
  const int n = static_cast<int>(a.size());
  std::vector<char> allowed(mesh.num_vertices(), 1);
  for (int v = 0; v < mesh.num_vertices(); ++v) allowed[v] = !blocked[v];
  for (int v : a) allowed[v] = 0;

  const int samples = std::min(n, 16);
  std::vector<int> best;
  double best_len = kInf;
  for (int s = 0; s < samples; ++s) {
    int i = static_cast<int>((static_cast<long long>(s) * n) / samples);
    int p = a[i], prev = a[(i + n - 1) % n], next = a[(i + 1) % n];
    std::vector<std::pair<int, double>> sources;
    for (int l : wedge_vertices(mesh, ring, p, next, prev)) {
      if (allowed[l]) sources.emplace_back(l, len[mesh.edge(ring.halfedge_to(mesh, p, l))]);
    }
    std::vector<int> right;
    for (int r : wedge_vertices(mesh, ring, p, prev, next)) {
      if (allowed[r]) right.push_back(r);
    }
    if (sources.empty() || right.empty()) continue;
    ShortestPaths sp = dijkstra(mesh, ring, len, sources, allowed, best_len);
    int best_r = -1;
    double local = kInf;
    for (int r : right) {
      double d = sp.dist[r] + len[mesh.edge(ring.halfedge_to(mesh, r, p))];
      if (d < local || (d == local && r < best_r)) {
        local = d;
        best_r = r;
      }
    }
    if (best_r < 0 || !(local < best_len)) continue;
    std::vector<int> path = trace_path(mesh, sp, best_r);
    best.assign(1, p);
    best.insert(best.end(), path.begin(), path.end());
    best_len = local;
  }
  return best;
}

}  // namespace

HomologyBasis generator_basis(const Mesh& mesh) {
  HomologyContext ctx(mesh);
  HomologyBasis basis;
  basis.loops = ctx.generator_loops();
  for (const auto& l : basis.loops) basis.cycles.push_back(chain_from_loop(mesh, l));
  basis.transform = IntMatrix::Identity(basis.cycles.size(), basis.cycles.size());
  return basis;
}

IntMatrix standard_pairing(int genus) {
  IntMatrix j = IntMatrix::Zero(2 * genus, 2 * genus);
  for (int i = 0; i < genus; ++i) {
    j(i, genus + i) = 1;
    j(genus + i, i) = -1;
  }
  return j;
}

HomologyBasis homology_basis(const Mesh& mesh) {
  HomologyContext ctx(mesh);
  const int g = ctx.genus();
  HomologyBasis basis;
  basis.transform = IntMatrix::Identity(2 * g, 2 * g);
  if (g == 0) {
    basis.canonical = true;
    return basis;
  }
  VertexRing ring(mesh);
  std::vector<double> len = edge_lengths(mesh);
  std::vector<char> blocked(mesh.num_vertices(), 0);
  std::vector<std::vector<int>> a_loops, b_loops;
  for (int k = 0; k < g; ++k) {
    std::vector<char> allowed(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) allowed[v] = !blocked[v];
    bool found = false;
    for (const std::vector<int>& cand : nontrivial_loops(mesh, ring, len, ctx, allowed, 24)) {
      std::vector<int> a = shorten_loop(mesh, ctx, cand, blocked);
      std::vector<int> b = crossing_loop(mesh, ring, len, a, blocked);
      if (b.empty()) continue;
      for (int v : a) blocked[v] = 1;
      for (int v : b) blocked[v] = 1;
      a_loops.push_back(std::move(a));
      b_loops.push_back(std::move(b));
      found = true;
      break;
    }
    if (!found) {
      throw Error("could not find a crossing loop pair for handle " + std::to_string(k + 1) +
                  "; the mesh may be too coarse around its handles");
    }
  }
  basis.loops = a_loops;
  basis.loops.insert(basis.loops.end(), b_loops.begin(), b_loops.end());
  for (const auto& l : basis.loops) basis.cycles.push_back(chain_from_loop(mesh, l));
  IntMatrix pairing = pairing_matrix(mesh, basis);
  if (pairing != standard_pairing(g)) throw Error("loop system failed the canonical pairing check");
  basis.canonical = true;
  return basis;
}

// ---------------------------------------------------------------------------
// Transversality

namespace {

enum class Side { left, right, on };

Side side_of(const Mesh& mesh, const VertexRing& ring, const std::vector<int>& loop, int index, int y) {
  const int n = static_cast<int>(loop.size());
  int x = loop[index], prev = loop[(index + n - 1) % n], next = loop[(index + 1) % n];
  for (int v : wedge_vertices(mesh, ring, x, next, prev)) {
    if (v == y) return Side::left;
  }
  for (int v : wedge_vertices(mesh, ring, x, prev, next)) {
    if (v == y) return Side::right;
  }
  return Side::on;
}

std::set<std::pair<int, int>> undirected_edges(const std::vector<int>& loop) {
  std::set<std::pair<int, int>> s;
  for (std::size_t i = 0; i < loop.size(); ++i) s.insert(std::minmax(loop[i], loop[(i + 1) % loop.size()]));
  return s;
}

bool shares_edge(const std::vector<int>& a, const std::vector<int>& b) {
  auto ea = undirected_edges(a);
  for (const auto& e : undirected_edges(b)) {
    if (ea.count(e)) return true;
  }
  return false;
}

// One rerouting step of loop j away from loop i. Returns false when no
// valid detour was found.
bool reroute(const Mesh& mesh, const VertexRing& ring, const std::vector<double>& len, const HomologyContext& ctx,
             std::vector<int>& j_loop, const std::vector<int>& i_loop, const std::vector<char>& blocked_edges) {
  const int n = static_cast<int>(j_loop.size());
  std::vector<int> pos_in_i(mesh.num_vertices(), -1);
  for (std::size_t k = 0; k < i_loop.size(); ++k) pos_in_i[i_loop[k]] = static_cast<int>(k);
  auto shared = undirected_edges(i_loop);
  auto edge_shared = [&](int k) {
    return shared.count(std::minmax(j_loop[k % n], j_loop[(k + 1) % n])) > 0;
  };
  int first = -1;
  for (int k = 0; k < n; ++k) {
    if (edge_shared(k)) {
      first = k;
      break;
    }
  }
  if (first < 0) return true;
  // Maximal stretch of j's vertices lying on i around the shared edge.
  int on_i = 0;
  for (int v : j_loop) on_i += pos_in_i[v] >= 0;
  if (on_i == n) throw Error("perturb_transversal: a cycle lies entirely on another");
  int s = first, t = first + 1;
  while (pos_in_i[j_loop[(s - 1 + n) % n]] >= 0) s = (s - 1 + n) % n;
  while (pos_in_i[j_loop[(t + 1) % n]] >= 0) t = t + 1;
  // Rotate so the stretch is j_loop[1..m], with j_loop[0] and j_loop[m+1] off i.
  std::vector<int> rot;
  for (int k = 0; k < n; ++k) rot.push_back(j_loop[(s - 1 + k + n) % n]);
  const int m = ((t - s) % n + n) % n + 1;
  const int jp = rot[0], jn = rot[m + 1];
  std::vector<int> stretch(rot.begin() + 1, rot.begin() + 1 + m);
  Side sp_side = side_of(mesh, ring, i_loop, pos_in_i[stretch.front()], jp);
  Side sn_side = side_of(mesh, ring, i_loop, pos_in_i[stretch.back()], jn);
  if (sp_side == Side::on || sn_side == Side::on) return false;

  std::vector<char> allowed(mesh.num_vertices(), 1);
  for (int v : i_loop) allowed[v] = 0;
  for (int k = m + 1; k < n; ++k) allowed[rot[k]] = 0;
  allowed[jp] = 1;
  allowed[jn] = 1;
  auto old_coords = ctx.loop_coordinates(rot);

  auto finish = [&](const std::vector<int>& detour) {
    std::vector<int> next = detour;
    for (int k = m + 2; k < n; ++k) next.push_back(rot[k]);
    std::vector<char> seen(mesh.num_vertices(), 0);
    for (int v : next) {
      if (seen[v]) return false;
      seen[v] = 1;
    }
    if (ctx.loop_coordinates(next) != old_coords) return false;
    j_loop = std::move(next);
    return true;
  };

  const int ni = static_cast<int>(i_loop.size());
  auto side_wedge = [&](int q, Side side) {
    int q_pos = pos_in_i[q];
    int qprev = i_loop[(q_pos + ni - 1) % ni], qnext = i_loop[(q_pos + 1) % ni];
    return side == Side::left ? wedge_vertices(mesh, ring, q, qnext, qprev)
                              : wedge_vertices(mesh, ring, q, qprev, qnext);
  };

  if (sp_side == sn_side) {
    ShortestPaths sp = dijkstra(mesh, ring, len, {{jp, 0.0}}, allowed, kInf, &blocked_edges);
    if (std::isfinite(sp.dist[jn]) && finish(trace_path(mesh, sp, jn))) return true;
    // The near side is walled off: cross over at the first stretch vertex,
    // run along the far side and cross back at the last one.
    const int q1 = stretch.front(), q2 = stretch.back();
    const Side far = sp_side == Side::left ? Side::right : Side::left;
    std::vector<char> allowed_far = allowed;
    allowed_far[jp] = 0;
    allowed_far[jn] = 0;
    std::vector<std::pair<int, double>> starts;
    for (int y : side_wedge(q1, far)) {
      if (allowed_far[y]) starts.emplace_back(y, 0.0);
    }
    ShortestPaths pf = dijkstra(mesh, ring, len, starts, allowed_far, kInf, &blocked_edges);
    int z = -1;
    for (int y : side_wedge(q2, far)) {
      if (std::isfinite(pf.dist[y]) && (z < 0 || pf.dist[y] < pf.dist[z])) z = y;
    }
    if (z >= 0) {
      std::vector<int> detour = {jp, q1};
      std::vector<int> mid = trace_path(mesh, pf, z);
      detour.insert(detour.end(), mid.begin(), mid.end());
      detour.push_back(q2);
      detour.push_back(jn);
      if (finish(detour)) return true;
    }
    return false;
  }
  // Cross i at one stretch vertex, middle first.
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(2 * a - (m - 1)) < std::abs(2 * b - (m - 1)); });
  for (int qi : order) {
    int q = stretch[qi];
    std::vector<int> enter = side_wedge(q, sp_side);
    std::vector<int> leave = side_wedge(q, sn_side);
    ShortestPaths p1 = dijkstra(mesh, ring, len, {{jp, 0.0}}, allowed, kInf, &blocked_edges);
    int x1 = -1;
    for (int x : enter) {
      if (allowed[x] && std::isfinite(p1.dist[x]) && (x1 < 0 || p1.dist[x] < p1.dist[x1])) x1 = x;
    }
    if (x1 < 0) continue;
    std::vector<int> path1 = trace_path(mesh, p1, x1);
    std::vector<char> allowed2 = allowed;
    for (int v : path1) allowed2[v] = 0;
    allowed2[q] = 0;
    allowed2[jn] = 1;
    std::vector<std::pair<int, double>> starts;
    for (int y : leave) {
      if (allowed2[y]) starts.emplace_back(y, 0.0);
    }
    if (starts.empty()) continue;
    ShortestPaths p2 = dijkstra(mesh, ring, len, starts, allowed2, kInf, &blocked_edges);
    if (!std::isfinite(p2.dist[jn])) continue;
    std::vector<int> detour = path1;
    detour.push_back(q);
    std::vector<int> path2 = trace_path(mesh, p2, jn);
    detour.insert(detour.end(), path2.begin(), path2.end());
    if (finish(detour)) return true;
  }
  return false;
}

}  // namespace

HomologyBasis perturb_transversal(const Mesh& mesh, const HomologyBasis& basis) {
  if (!basis.geometric()) throw Error("perturb_transversal needs simple vertex loops");
  HomologyContext ctx(mesh);
  VertexRing ring(mesh);
  std::vector<double> len = edge_lengths(mesh);
  HomologyBasis out = basis;
  const int n = static_cast<int>(out.loops.size());
  for (int j = 1; j < n; ++j) {
    // Edges of the loops already fixed may be crossed at a vertex but never reused.
    std::vector<char> blocked_edges(mesh.num_edges(), 0);
    for (int i = 0; i < j; ++i) {
      const auto& l = out.loops[i];
      for (std::size_t k = 0; k < l.size(); ++k) blocked_edges[mesh.find_edge(l[k], l[(k + 1) % l.size()])] = 1;
    }
    const int max_tries = 4 * static_cast<int>(out.loops[j].size()) + 8;
    for (int tries = 0;; ++tries) {
      int culprit = -1;
      for (int i = 0; i < j && culprit < 0; ++i) {
        if (shares_edge(out.loops[i], out.loops[j])) culprit = i;
      }
      if (culprit < 0) break;
      if (tries >= max_tries || !reroute(mesh, ring, len, ctx, out.loops[j], out.loops[culprit], blocked_edges)) {
        throw Error("perturb_transversal: could not separate cycles " + std::to_string(culprit) + " and " +
                    std::to_string(j));
      }
    }
    out.cycles[j] = chain_from_loop(mesh, out.loops[j]);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (shares_edge(out.loops[i], out.loops[j])) {
        throw Error("perturb_transversal: cycles " + std::to_string(i) + " and " + std::to_string(j) +
                    " still share an edge");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Intersection matrix and symplectic reduction

IntMatrix pairing_matrix(const Mesh& mesh, const HomologyBasis& basis) {
  const int n = static_cast<int>(basis.cycles.size());
  IntMatrix out = IntMatrix::Zero(n, n);
  if (n == 0) return out;
  HomologyContext ctx(mesh);
  IntMatrix x(n, 2 * ctx.genus());
  for (int i = 0; i < n; ++i) {
    auto c = ctx.coordinates(basis.cycles[i]);
    for (std::size_t k = 0; k < c.size(); ++k) x(i, k) = c[k];
  }
  return x * ctx.generator_pairing() * x.transpose();
}

IntMatrix intersection_matrix(const Mesh& mesh, const HomologyBasis& basis) {
  return -pairing_matrix(mesh, basis);
}

IntMatrix symplectic_reduction(const IntMatrix& pairing) {
  const int n = static_cast<int>(pairing.rows());
  if (n % 2 != 0 || pairing.cols() != n) throw Error("pairing matrix must be square of even size");
  if (pairing + pairing.transpose() != IntMatrix::Zero(n, n)) throw Error("pairing matrix is not antisymmetric");
  BigMatrix big(n, std::vector<BigInt>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) big[i][j] = pairing(i, j);
  }
  BigInt det = determinant(big);
  if (det != 1 && det != -1) {
    throw Error("pairing matrix has determinant " + det.str() + "; the cycles are not a basis of H1");
  }
  using Vec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
  auto form = [&](const Vec& a, const Vec& b) -> std::int64_t { return a.dot(pairing * b); };
  std::vector<Vec> remaining;
  for (int i = 0; i < n; ++i) remaining.push_back(Vec::Unit(n, i));
  const int g = n / 2;
  IntMatrix out(n, n);
  for (int k = 0; k < g; ++k) {
    Vec u = remaining.front();
    remaining.erase(remaining.begin());
    // Euclid on the pairings with u until a single partner remains.
    for (;;) {
      int best = -1;
      for (int i = 0; i < static_cast<int>(remaining.size()); ++i) {
        std::int64_t p = form(u, remaining[i]);
        if (p != 0 && (best < 0 || std::abs(p) < std::abs(form(u, remaining[best])))) best = i;
      }
      if (best < 0) throw Error("pairing matrix is singular");
      std::int64_t pb = form(u, remaining[best]);
      bool reduced = false;
      for (int i = 0; i < static_cast<int>(remaining.size()); ++i) {
        if (i == best) continue;
        std::int64_t p = form(u, remaining[i]);
        if (p == 0) continue;
        std::int64_t q = p / pb;
        remaining[i] -= q * remaining[best];
        reduced = true;
      }
      if (!reduced) {
        if (std::abs(pb) != 1) throw Error("pairing matrix is not unimodular");
        Vec v = remaining[best] * pb;  // now <u, v> = 1
        remaining.erase(remaining.begin() + best);
        for (Vec& w : remaining) w = w - form(w, v) * u + form(w, u) * v;
        out.row(k) = u.transpose();
        out.row(g + k) = v.transpose();
        break;
      }
    }
  }
  return out;
}

HomologyBasis canonicalize_basis(const Mesh& mesh, const HomologyBasis& basis) {
  IntMatrix pairing = pairing_matrix(mesh, basis);
  IntMatrix t = symplectic_reduction(pairing);
  const int n = static_cast<int>(basis.cycles.size());
  HomologyBasis out;
  out.canonical = true;
  out.transform = t;
  bool permutation = basis.geometric();
  for (int i = 0; i < n; ++i) {
    Chain c;
    int nonzero = 0;
    for (int j = 0; j < n; ++j) {
      if (t(i, j) == 0) continue;
      c = c + basis.cycles[j] * t(i, j);
      ++nonzero;
      permutation = permutation && (t(i, j) == 1 || t(i, j) == -1);
    }
    permutation = permutation && nonzero == 1;
    out.cycles.push_back(std::move(c));
  }
  if (permutation) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (t(i, j) == 0) continue;
        std::vector<int> l = basis.loops[j];
        if (t(i, j) < 0) std::reverse(l.begin(), l.end());
        out.loops.push_back(std::move(l));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cutting

std::vector<Triangle> CutMesh::faces(const Mesh& mesh) const {
  std::vector<Triangle> out(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    out[f] = {corner_vertex[3 * f], corner_vertex[3 * f + 1], corner_vertex[3 * f + 2]};
  }
  return out;
}

CutMesh cut_along(const Mesh& mesh, const std::vector<char>& cut_edges) {
  CutMesh cut;
  cut.cut_edge = cut_edges;
  cut.corner_vertex.assign(mesh.num_halfedges(), -1);
  cut.num_cut_edges = static_cast<int>(std::count(cut_edges.begin(), cut_edges.end(), 1));
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::vector<int> out = mesh.outgoing(v);
    const int d = static_cast<int>(out.size());
    int start = -1;
    for (int i = 0; i < d; ++i) {
      if (cut_edges[mesh.edge(out[i])]) {
        start = i;
        break;
      }
    }
    if (start < 0) {
      int copy = cut.num_vertices++;
      cut.origin.push_back(v);
      for (int h : out) cut.corner_vertex[h] = copy;
      continue;
    }
    int copy = -1;
    for (int k = 0; k < d; ++k) {
      int h = out[(start + k) % d];
      if (cut_edges[mesh.edge(h)]) {
        copy = cut.num_vertices++;
        cut.origin.push_back(v);
      }
      cut.corner_vertex[h] = copy;
    }
  }
  std::vector<char> visited(mesh.num_halfedges(), 0);
  for (int h0 = 0; h0 < mesh.num_halfedges(); ++h0) {
    if (!cut_edges[mesh.edge(h0)] || visited[h0]) continue;
    std::vector<int> loop;
    int h = h0;
    do {
      visited[h] = 1;
      loop.push_back(h);
      int o = Mesh::next(h);
      while (!cut_edges[mesh.edge(o)]) o = Mesh::next(mesh.twin(o));
      h = o;
    } while (h != h0);
    cut.boundary_loops.push_back(std::move(loop));
  }
  return cut;
}

FundamentalDomain fundamental_domain(const Mesh& mesh) {
  HomologyContext ctx(mesh);
  std::vector<char> cut(mesh.num_edges(), 0);
  std::vector<int> degree(mesh.num_vertices(), 0);
  int remaining = 0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (ctx.cotree_edges()[e]) continue;
    cut[e] = 1;
    ++remaining;
    auto [u, v] = mesh.edge_vertices(e);
    ++degree[u];
    ++degree[v];
  }
  std::queue<int> leaves;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (degree[v] == 1) leaves.push(v);
  }
  while (!leaves.empty() && remaining > 1) {
    int v = leaves.front();
    leaves.pop();
    if (degree[v] != 1) continue;
    for (int h : mesh.outgoing(v)) {
      int e = mesh.edge(h);
      if (!cut[e]) continue;
      cut[e] = 0;
      --remaining;
      --degree[v];
      int w = mesh.head(h);
      if (--degree[w] == 1) leaves.push(w);
      break;
    }
  }
  return cut_along(mesh, cut);
}

// ---------------------------------------------------------------------------
// Curve classification and flooding

CurveClass curve_class(const std::vector<OneForm>& forms, const Chain& cycle) {
  CurveClass c;
  for (const OneForm& w : forms) {
    double v = integrate(w, cycle);
    auto r = static_cast<std::int64_t>(std::llround(v));
    c.values.push_back(v);
    c.rounded.push_back(r);
    c.max_deviation = std::max(c.max_deviation, std::abs(v - static_cast<double>(r)));
  }
  return c;
}

FloodResult flood_bounded_domain(const Mesh& mesh, const Chain& cycle) {
  FloodResult result;
  if (!boundary(mesh, cycle).empty()) throw Error("flood_bounded_domain: chain is not a cycle");
  HomologyContext ctx(mesh);
  result.class_vector = ctx.coordinates(cycle);
  if (!is_zero(result.class_vector)) return result;

  // Propagate face coefficients over a breadth-first dual tree: crossing the
  // edge of halfedge h from face(h) to face(twin h) changes sigma by
  // -sign(h) * r(edge). Null-homologous input makes every other edge agree.
  std::vector<std::int64_t> r(mesh.num_edges(), 0);
  for (auto [e, c] : cycle.coeffs) r[e] = c;
  std::vector<std::int64_t> value(mesh.num_faces(), 0);
  std::vector<char> seen(mesh.num_faces(), 0);
  std::queue<int> q;
  for (int root = 0; root < mesh.num_faces(); ++root) {
    if (seen[root]) continue;
    seen[root] = 1;
    q.push(root);
    while (!q.empty()) {
      int f = q.front();
      q.pop();
      for (int i = 0; i < 3; ++i) {
        int h = 3 * f + i;
        int g = Mesh::face_of(mesh.twin(h));
        if (seen[g]) continue;
        seen[g] = 1;
        value[g] = value[f] - mesh.edge_sign(h) * r[mesh.edge(h)];
        q.push(g);
      }
    }
  }
  // The surface itself is a cycle, so sigma is fixed up to a constant; the
  // nonnegative representative is the region to the left of the cycle.
  const std::int64_t lowest = *std::min_element(value.begin(), value.end());
  Chain sigma;
  sigma.dim = 2;
  for (int f = 0; f < mesh.num_faces(); ++f) sigma.add(f, value[f] - lowest);
  if (!(boundary(mesh, sigma) == cycle)) {
    throw Error("flood_bounded_domain: flooded region does not bound the cycle");
  }
  result.faces = std::move(sigma);
  return result;
}

}  // namespace conformal
