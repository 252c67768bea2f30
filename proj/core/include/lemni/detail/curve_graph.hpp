#pragma once

#include <cstddef>
#include <vector>

namespace lemni::detail {

/// Embedding point used for endpoint clustering. Planar tracers put
/// (x, y, 0); spherical tracers use unit-sphere coordinates so the merge
/// tolerance acts in the chordal metric.
struct Vec3 {
  double x = 0, y = 0, z = 0;
};

double dist(const Vec3& a, const Vec3& b);

struct ArcEnds {
  Vec3 start;
  Vec3 end;
};

/// One step of a closed walk: traverse arc `arc` forward or reversed,
/// entering through node `entry_node`.
struct WalkStep {
  std::size_t arc;
  bool reversed;
  int entry_node;
};

struct GluedComponents {
  /// Closed walks, one per connected component; each traverses every arc
  /// of its component exactly once.
  std::vector<std::vector<WalkStep>> walks;
  /// Node id of every arc endpoint: nodes[i] = {start node, end node}.
  std::vector<std::pair<int, int>> arc_nodes;
  /// Which nodes absorbed a junction candidate (index into `junctions`),
  /// -1 for plain continuation nodes.
  std::vector<int> node_junction;
  /// Representative position per node.
  std::vector<Vec3> node_pos;
};

/// Clusters arc endpoints (and the supplied junction candidates) within
/// `merge_tol`, then decomposes the resulting multigraph into closed
/// Euler walks. Every node must end up with even degree; that holds by
/// construction for level-curve arcs (throws NumericalError otherwise).
GluedComponents glue_arcs(const std::vector<ArcEnds>& arcs,
                          const std::vector<Vec3>& junctions,
                          double merge_tol);

}  // namespace lemni::detail
