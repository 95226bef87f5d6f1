#include "depthtrack/region_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace depthtrack {

namespace {

constexpr double kFar = 1e20;

// Squared distance lower envelope (Felzenszwalb/Huttenlocher). Exact for
// integer site positions, which keeps nearest-region ties well defined.
void dt_1d(double* f, int n, int stride, double* scratch_d, int* scratch_v,
           double* scratch_z) {
  int* v = scratch_v;
  double* z = scratch_z;
  double* d = scratch_d;
  int k = 0;
  v[0] = 0;
  z[0] = -kFar;
  z[1] = kFar;
  auto fv = [&](int i) { return f[static_cast<size_t>(i) * stride]; };
  for (int q = 1; q < n; ++q) {
    double s = ((fv(q) + static_cast<double>(q) * q) -
                (fv(v[k]) + static_cast<double>(v[k]) * v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((fv(q) + static_cast<double>(q) * q) -
           (fv(v[k]) + static_cast<double>(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = static_cast<double>(q - v[k]);
    d[q] = dq * dq + fv(v[k]);
  }
  for (int q = 0; q < n; ++q) {
    f[static_cast<size_t>(q) * stride] = d[q];
  }
}

// In-place 2D squared Euclidean distance transform of a 0/kFar site grid.
void dt_2d(std::vector<double>& f, int w, int h) {
  const int flat = std::max(w, h);
  std::vector<double> d(static_cast<size_t>(flat));
  std::vector<int> v(static_cast<size_t>(flat));
  std::vector<double> z(static_cast<size_t>(flat) + 1);
  for (int x = 0; x < w; ++x) {
    dt_1d(&f[static_cast<size_t>(x)], h, w, d.data(), v.data(), z.data());
  }
  for (int y = 0; y < h; ++y) {
    dt_1d(&f[static_cast<size_t>(y) * w], w, 1, d.data(), v.data(), z.data());
  }
}

}  // namespace

bool RegionGraph::has_node(int id) const { return node(id) != nullptr; }

const GraphNode* RegionGraph::node(int id) const {
  for (const GraphNode& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

bool RegionGraph::has_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  return edges.count({a, b}) > 0;
}

std::vector<int> RegionGraph::neighbors(int id) const {
  std::vector<int> out;
  for (const auto& [a, b] : edges) {
    if (a == id) out.push_back(b);
    if (b == id) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int NodeTable::hop(int id) const {
  auto it = hops.find(id);
  return it == hops.end() ? kUnreachable : it->second;
}

int WeightedRegionGraph::weight(int a, int b) const {
  if (a > b) std::swap(a, b);
  return weight_one.count({a, b}) ? 1 : 0;
}

std::vector<int32_t> voronoi_labels(const RegionSet& regions) {
  const int w = regions.width;
  const int h = regions.height;
  const size_t n = static_cast<size_t>(w) * h;
  std::vector<int32_t> owner(n, 0);
  std::vector<double> best(n, kFar);
  std::vector<double> f(n);
  for (const Region& r : regions.regions) {
    if (r.category == RegionCategory::Background) continue;
    std::fill(f.begin(), f.end(), kFar);
    for (PixelIndex p : r.pixels) f[p] = 0.0;
    dt_2d(f, w, h);
    // strict improvement, so the lowest region id keeps equidistant pixels
    for (size_t i = 0; i < n; ++i) {
      if (f[i] < best[i]) {
        best[i] = f[i];
        owner[i] = r.id;
      }
    }
  }
  return owner;
}

RegionGraph build_graph(const RegionSet& regions) {
  RegionGraph g;
  for (const Region& r : regions.regions) {
    if (r.category == RegionCategory::Background) continue;
    g.nodes.push_back({r.id, r.centroid_x, r.centroid_y});
  }
  if (g.nodes.size() < 2) return g;

  const std::vector<int32_t> owner = voronoi_labels(regions);
  const int w = regions.width;
  const int h = regions.height;
  // half of the 8-stencil; every influence zone owns at least its region's
  // pixels, so each unordered adjacency shows up at some pixel
  const int ndx[4] = {1, -1, 0, 1};
  const int ndy[4] = {0, 1, 1, 1};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int32_t a = owner[static_cast<size_t>(y) * w + x];
      if (a == 0) continue;
      for (int d = 0; d < 4; ++d) {
        int nx = x + ndx[d];
        int ny = y + ndy[d];
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        int32_t b = owner[static_cast<size_t>(ny) * w + nx];
        if (b == 0 || b == a) continue;
        g.edges.insert({std::min(a, b), std::max(a, b)});
      }
    }
  }
  return g;
}

NodeTable node_table(const RegionGraph& graph, int roi) {
  if (!graph.has_node(roi)) {
    throw std::invalid_argument("node_table: roi is not a node");
  }
  NodeTable t;
  t.roi = roi;
  for (const GraphNode& n : graph.nodes) {
    t.hops[n.id] = NodeTable::kUnreachable;
  }
  std::deque<int> queue;
  t.hops[roi] = 0;
  queue.push_back(roi);
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    int next = t.hops[cur] + 1;
    for (int nb : graph.neighbors(cur)) {
      if (t.hops[nb] == NodeTable::kUnreachable) {
        t.hops[nb] = next;
        queue.push_back(nb);
      }
    }
  }
  return t;
}

WeightedRegionGraph assign_weights(const RegionGraph& graph,
                                   const NodeTable& table) {
  WeightedRegionGraph wg;
  wg.graph = graph;
  wg.roi = table.roi;
  for (const auto& [a, b] : graph.edges) {
    // an edge scores only when it connects the roi to a one-hop node
    if ((a == table.roi && table.hop(b) == 1) ||
        (b == table.roi && table.hop(a) == 1)) {
      wg.weight_one.insert({a, b});
    }
  }
  return wg;
}

std::vector<int> candidate_regions(const WeightedRegionGraph& wg, int roi,
                                   std::optional<CardinalDirection> direction) {
  if (roi != wg.roi) {
    throw std::invalid_argument(
        "candidate_regions: weights were assigned for a different roi");
  }
  std::vector<int> base;
  for (const auto& [a, b] : wg.weight_one) {
    base.push_back(a == roi ? b : a);
  }
  std::sort(base.begin(), base.end());
  if (!direction) return base;

  const GraphNode* center = wg.graph.node(roi);
  std::vector<int> filtered;
  for (int id : base) {
    const GraphNode* n = wg.graph.node(id);
    double dx = n->cx - center->cx;
    double dy = n->cy - center->cy;
    bool keep = (direction->contains(CardinalDirection::North) && dy < 0) ||
                (direction->contains(CardinalDirection::South) && dy > 0) ||
                (direction->contains(CardinalDirection::East) && dx > 0) ||
                (direction->contains(CardinalDirection::West) && dx < 0);
    if (keep) filtered.push_back(id);
  }
  // an over-eager filter must not blind the search entirely
  return filtered.empty() ? base : filtered;
}

}  // namespace depthtrack
