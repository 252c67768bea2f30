#include "lemni/detail/curve_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lemni/error.hpp"

namespace lemni::detail {

double dist(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(int i, int j) { parent[find(i)] = find(j); }
};

}  // namespace

GluedComponents glue_arcs(const std::vector<ArcEnds>& arcs,
                          const std::vector<Vec3>& junctions,
                          double merge_tol) {
  // Cluster all arc endpoints plus junction candidates, O(n^2) pairwise
  // (n is a few endpoints per traced arc, never large).
  std::vector<Vec3> pts;
  pts.reserve(arcs.size() * 2 + junctions.size());
  for (const ArcEnds& a : arcs) {
    pts.push_back(a.start);
    pts.push_back(a.end);
  }
  const std::size_t first_junction = pts.size();
  for (const Vec3& j : junctions) pts.push_back(j);

  UnionFind uf(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (dist(pts[i], pts[j]) <= merge_tol)
        uf.unite(static_cast<int>(i), static_cast<int>(j));

  std::vector<int> root_to_node(pts.size(), -1);
  int n_nodes = 0;
  std::vector<int> node_of(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int r = uf.find(static_cast<int>(i));
    if (root_to_node[r] < 0) root_to_node[r] = n_nodes++;
    node_of[i] = root_to_node[r];
  }

  GluedComponents out;
  out.node_junction.assign(n_nodes, -1);
  out.node_pos.assign(n_nodes, Vec3{});
  std::vector<int> node_count(n_nodes, 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int n = node_of[i];
    out.node_pos[n].x += pts[i].x;
    out.node_pos[n].y += pts[i].y;
    out.node_pos[n].z += pts[i].z;
    ++node_count[n];
  }
  for (int n = 0; n < n_nodes; ++n) {
    out.node_pos[n].x /= node_count[n];
    out.node_pos[n].y /= node_count[n];
    out.node_pos[n].z /= node_count[n];
  }
  // Junction candidates override the mean with their exact position.
  for (std::size_t j = 0; j < junctions.size(); ++j) {
    const int n = node_of[first_junction + j];
    out.node_junction[n] = static_cast<int>(j);
    out.node_pos[n] = junctions[j];
  }

  out.arc_nodes.resize(arcs.size());
  std::vector<std::vector<std::pair<std::size_t, bool>>> incident(n_nodes);
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    const int ns = node_of[2 * a];
    const int ne = node_of[2 * a + 1];
    out.arc_nodes[a] = {ns, ne};
    incident[ns].push_back({a, false});  // leaves ns travelling forward
    incident[ne].push_back({a, true});   // leaves ne travelling reversed
  }
  for (int n = 0; n < n_nodes; ++n)
    if (incident[n].size() % 2 != 0)
      throw NumericalError(
          "glue_arcs: odd node degree (gluing tolerance mismatch)");

  // Hierholzer: grow closed sub-loops, splice until every arc is used.
  std::vector<bool> used(arcs.size(), false);
  auto next_unused_from = [&](int node, WalkStep* step) {
    for (const auto& [arc, rev] : incident[node]) {
      if (used[arc]) continue;
      if (step) *step = {arc, rev, node};
      return true;
    }
    return false;
  };
  auto grow_loop = [&](int start) {
    std::vector<WalkStep> loop;
    int cur = start;
    WalkStep s{};
    while (next_unused_from(cur, &s)) {
      used[s.arc] = true;
      loop.push_back(s);
      cur = s.reversed ? out.arc_nodes[s.arc].first
                       : out.arc_nodes[s.arc].second;
      if (cur == start) break;
    }
    if (cur != start)
      throw NumericalError("glue_arcs: walk did not close (gluing mismatch)");
    return loop;
  };

  for (std::size_t a0 = 0; a0 < arcs.size(); ++a0) {
    if (used[a0]) continue;
    std::vector<WalkStep> walk = grow_loop(out.arc_nodes[a0].first);
    bool spliced = true;
    while (spliced) {
      spliced = false;
      for (std::size_t pos = 0; pos < walk.size(); ++pos) {
        if (!next_unused_from(walk[pos].entry_node, nullptr)) continue;
        std::vector<WalkStep> detour = grow_loop(walk[pos].entry_node);
        walk.insert(walk.begin() + pos, detour.begin(), detour.end());
        spliced = true;
        break;
      }
    }
    out.walks.push_back(std::move(walk));
  }
  return out;
}

}  // namespace lemni::detail
