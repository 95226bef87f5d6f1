#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "depthtrack/noise_filter.hpp"
#include "depthtrack/roi_detect.hpp"

namespace depthtrack {

struct GraphNode {
  int id = 0;
  double cx = 0;
  double cy = 0;
};

// Undirected adjacency-of-influence-zones graph over the closed regions of
// one frame.
struct RegionGraph {
  std::vector<GraphNode> nodes;        // ascending id
  std::set<std::pair<int, int>> edges; // normalized (lo, hi)

  bool has_node(int id) const;
  const GraphNode* node(int id) const;
  bool has_edge(int a, int b) const;
  std::vector<int> neighbors(int id) const;  // ascending
};

// BFS hop counts from one node to every node of the graph.
struct NodeTable {
  static constexpr int kUnreachable = std::numeric_limits<int>::max();

  int roi = 0;
  std::map<int, int> hops;  // node id -> hop count (roi itself maps to 0)

  int hop(int id) const;
};

struct WeightedRegionGraph {
  RegionGraph graph;
  int roi = 0;
  std::set<std::pair<int, int>> weight_one;  // normalized (lo, hi)

  // 1 for an edge incident to the roi whose far end is one hop away,
  // 0 for every other edge.
  int weight(int a, int b) const;
};

// Nearest-region labels over the full frame: each pixel gets the id of the
// closed region with the smallest Euclidean distance to it (lowest id on
// ties). 0 everywhere when the frame has no closed regions.
std::vector<int32_t> voronoi_labels(const RegionSet& regions);

// Nodes are the closed regions; an edge joins two regions whose influence
// zones share an 8-adjacent pixel pair.
RegionGraph build_graph(const RegionSet& regions);

// Throws when roi is not a node of the graph.
NodeTable node_table(const RegionGraph& graph, int roi);

WeightedRegionGraph assign_weights(const RegionGraph& graph,
                                   const NodeTable& table);

// Weight-1 neighbours of the roi, optionally filtered to those whose centroid
// lies on the direction's side of the roi centroid. An empty filtered set
// falls back to the unfiltered one, so pruning never hides every neighbour.
std::vector<int> candidate_regions(const WeightedRegionGraph& wg, int roi,
                                   std::optional<CardinalDirection> direction);

}  // namespace depthtrack
