#include "depthtrack/noise_filter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

namespace depthtrack {

const char* to_string(RegionCategory c) {
  switch (c) {
    case RegionCategory::Background: return "background";
    case RegionCategory::Enclosed: return "enclosed";
    case RegionCategory::Enclosing: return "enclosing";
    case RegionCategory::Independent: return "independent";
  }
  return "?";
}

const Region* RegionSet::find(int id) const {
  for (const Region& r : regions) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

DepthMap make_depth_map(int width, int height, uint16_t fill,
                        int frame_index) {
  DepthMap m;
  m.width = width;
  m.height = height;
  m.frame_index = frame_index;
  m.values.assign(static_cast<size_t>(width) * height, fill);
  return m;
}

DepthMap gaussian_smooth(const DepthMap& frame, double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("gaussian_smooth: sigma must be positive");
  }
  if (frame.width <= 0 || frame.height <= 0) {
    throw std::invalid_argument("gaussian_smooth: empty frame");
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int side = 2 * radius + 1;
  std::vector<double> kernel(static_cast<size_t>(side) * side);
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      kernel[static_cast<size_t>(dy + radius) * side + (dx + radius)] =
          std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
  }

  DepthMap out = frame;
  const int w = frame.width;
  const int h = frame.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (frame.at(x, y) == 0) {
        out.at(x, y) = 0;  // holes stay holes
        continue;
      }
      double sum = 0.0;
      double wsum = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        int ny = y + dy;
        if (ny < 0 || ny >= h) continue;
        for (int dx = -radius; dx <= radius; ++dx) {
          int nx = x + dx;
          if (nx < 0 || nx >= w) continue;
          uint16_t v = frame.at(nx, ny);
          if (v == 0) continue;  // holes carry no weight
          double kw =
              kernel[static_cast<size_t>(dy + radius) * side + (dx + radius)];
          sum += kw * v;
          wsum += kw;
        }
      }
      out.at(x, y) = static_cast<uint16_t>(std::llround(sum / wsum));
    }
  }
  return out;
}

namespace {

// Gradient magnitude of the depth surface, central differences inside and
// one-sided at the frame edge. Measured on the raw values; callers smooth
// first.
std::vector<double> gradient_magnitude(const DepthMap& f) {
  const int w = f.width;
  const int h = f.height;
  std::vector<double> g(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double gx;
      if (w == 1) {
        gx = 0.0;
      } else if (x == 0) {
        gx = static_cast<double>(f.at(1, y)) - f.at(0, y);
      } else if (x == w - 1) {
        gx = static_cast<double>(f.at(w - 1, y)) - f.at(w - 2, y);
      } else {
        gx = (static_cast<double>(f.at(x + 1, y)) - f.at(x - 1, y)) * 0.5;
      }
      double gy;
      if (h == 1) {
        gy = 0.0;
      } else if (y == 0) {
        gy = static_cast<double>(f.at(x, 1)) - f.at(x, 0);
      } else if (y == h - 1) {
        gy = static_cast<double>(f.at(x, h - 1)) - f.at(x, h - 2);
      } else {
        gy = (static_cast<double>(f.at(x, y + 1)) - f.at(x, y - 1)) * 0.5;
      }
      g[static_cast<size_t>(y) * w + x] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return g;
}

}  // namespace

RegionLabelMap watershed_segment(const DepthMap& frame) {
  if (frame.width <= 0 || frame.height <= 0) {
    throw std::invalid_argument("watershed_segment: empty frame");
  }
  const int w = frame.width;
  const int h = frame.height;
  const size_t n = frame.size();
  const std::vector<double> grad = gradient_magnitude(frame);

  RegionLabelMap out;
  out.width = w;
  out.height = h;
  out.frame_index = frame.frame_index;
  out.labels.assign(n, 0);

  const int dx4[4] = {0, -1, 1, 0};
  const int dy4[4] = {-1, 0, 0, 1};

  // Markers: 4-connected plateaus of the gradient with no lower neighbour,
  // labeled in raster order of their first pixel.
  std::vector<uint8_t> seen(n, 0);
  std::vector<uint32_t> plateau;
  int32_t next_label = 1;
  for (size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    plateau.clear();
    plateau.push_back(static_cast<uint32_t>(start));
    seen[start] = 1;
    const double level = grad[start];
    bool is_minimum = true;
    for (size_t i = 0; i < plateau.size(); ++i) {
      uint32_t p = plateau[i];
      int x = static_cast<int>(p % w);
      int y = static_cast<int>(p / w);
      for (int d = 0; d < 4; ++d) {
        int nx = x + dx4[d];
        int ny = y + dy4[d];
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        size_t q = static_cast<size_t>(ny) * w + nx;
        if (grad[q] < level) {
          is_minimum = false;
        } else if (grad[q] == level && !seen[q]) {
          seen[q] = 1;
          plateau.push_back(static_cast<uint32_t>(q));
        }
      }
    }
    if (is_minimum) {
      for (uint32_t p : plateau) out.labels[p] = next_label;
      ++next_label;
    }
  }

  // Flood from the markers in order of gradient height; FIFO within a level.
  struct QItem {
    double value;
    uint64_t seq;
    uint32_t pixel;
  };
  auto higher = [](const QItem& a, const QItem& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.seq > b.seq;
  };
  std::priority_queue<QItem, std::vector<QItem>, decltype(higher)> queue(
      higher);
  std::vector<uint8_t> queued(n, 0);
  uint64_t seq = 0;
  for (size_t p = 0; p < n; ++p) {
    if (out.labels[p] == 0) continue;
    int x = static_cast<int>(p % w);
    int y = static_cast<int>(p / w);
    for (int d = 0; d < 4; ++d) {
      int nx = x + dx4[d];
      int ny = y + dy4[d];
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
      size_t q = static_cast<size_t>(ny) * w + nx;
      if (out.labels[q] == 0 && !queued[q]) {
        queued[q] = 1;
        queue.push({grad[q], seq++, static_cast<uint32_t>(q)});
      }
    }
  }
  while (!queue.empty()) {
    uint32_t p = queue.top().pixel;
    queue.pop();
    if (out.labels[p] != 0) continue;
    int x = static_cast<int>(p % w);
    int y = static_cast<int>(p / w);
    // label of the lowest labeled neighbour, lowest label on ties
    double best_g = 0.0;
    int32_t best_label = 0;
    for (int d = 0; d < 4; ++d) {
      int nx = x + dx4[d];
      int ny = y + dy4[d];
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
      size_t q = static_cast<size_t>(ny) * w + nx;
      int32_t lq = out.labels[q];
      if (lq == 0) continue;
      if (best_label == 0 || grad[q] < best_g ||
          (grad[q] == best_g && lq < best_label)) {
        best_g = grad[q];
        best_label = lq;
      }
    }
    out.labels[p] = best_label;  // a queued pixel always has a labeled side
    for (int d = 0; d < 4; ++d) {
      int nx = x + dx4[d];
      int ny = y + dy4[d];
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
      size_t q = static_cast<size_t>(ny) * w + nx;
      if (out.labels[q] == 0 && !queued[q]) {
        queued[q] = 1;
        queue.push({grad[q], seq++, static_cast<uint32_t>(q)});
      }
    }
  }
  return out;
}

namespace {

// Shared by categorize_regions and merge_enclosed: regions plus categories
// from a label grid.
RegionSet build_region_set(std::vector<int32_t> labels, int w, int h,
                           int frame_index, int border_points) {
  RegionSet rs;
  rs.frame_index = frame_index;
  rs.width = w;
  rs.height = h;
  rs.border_points = border_points;
  rs.labels = std::move(labels);

  std::map<int32_t, Region> by_id;
  std::map<int32_t, std::set<int32_t>> adj;
  std::map<int32_t, bool> touches_unassigned;
  std::map<int32_t, long long> cx_sum, cy_sum;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int32_t l = rs.labels[static_cast<size_t>(y) * w + x];
      if (l == 0) continue;
      Region& r = by_id[l];
      if (r.pixels.empty()) {
        r.id = l;
        r.frame_width = w;
        r.frame_height = h;
      }
      r.pixels.push_back(pack_pixel(x, y, w));
      cx_sum[l] += x;
      cy_sum[l] += y;
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1) {
        ++r.border_pixels;
      }
      // full 8-neighbourhood: unassigned pixels never run this loop, so the
      // scan from the labeled side has to see them in every direction
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          int nx = x + dx;
          int ny = y + dy;
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          int32_t m = rs.labels[static_cast<size_t>(ny) * w + nx];
          if (m == l) continue;
          if (m == 0) {
            touches_unassigned[l] = true;
          } else {
            adj[l].insert(m);
          }
        }
      }
    }
  }

  for (auto& [id, r] : by_id) {
    r.area = static_cast<long long>(r.pixels.size());
    r.bbox = mask_bbox(r.pixels, w);
    r.centroid_x = static_cast<double>(cx_sum[id]) / r.area;
    r.centroid_y = static_cast<double>(cy_sum[id]) / r.area;
  }

  // background first, the other categories depend on it
  for (auto& [id, r] : by_id) {
    r.category = r.border_pixels >= border_points ? RegionCategory::Background
                                                  : RegionCategory::Independent;
  }
  std::set<int32_t> enclosing;
  for (auto& [id, r] : by_id) {
    if (r.category == RegionCategory::Background) continue;
    if (r.border_pixels > 0 || touches_unassigned[id]) continue;
    const std::set<int32_t>& around = adj[id];
    if (around.size() != 1) continue;
    int32_t host = *around.begin();
    if (by_id[host].category == RegionCategory::Background) continue;
    r.category = RegionCategory::Enclosed;
    enclosing.insert(host);
  }
  for (int32_t id : enclosing) {
    Region& host = by_id[id];
    if (host.category == RegionCategory::Independent) {
      host.category = RegionCategory::Enclosing;
    }
  }

  rs.regions.reserve(by_id.size());
  for (auto& [id, r] : by_id) {
    rs.regions.push_back(std::move(r));
  }
  return rs;
}

}  // namespace

RegionSet categorize_regions(const RegionLabelMap& labels, int border_points) {
  if (border_points <= 0) {
    throw std::invalid_argument(
        "categorize_regions: border_points must be positive");
  }
  return build_region_set(labels.labels, labels.width, labels.height,
                          labels.frame_index, border_points);
}

RegionSet merge_enclosed(const RegionSet& regions) {
  RegionSet current = build_region_set(regions.labels, regions.width,
                                       regions.height, regions.frame_index,
                                       regions.border_points);
  // nesting can be transitive, so fold until a fixpoint
  for (size_t round = 0; round <= regions.regions.size(); ++round) {
    std::vector<std::pair<int, int>> folds;  // (enclosed, container)
    for (const Region& r : current.regions) {
      if (r.category != RegionCategory::Enclosed) continue;
      // the single adjacent region, by construction of Enclosed
      std::set<int32_t> around;
      for (PixelIndex p : r.pixels) {
        int x = static_cast<int>(p % static_cast<PixelIndex>(current.width));
        int y = static_cast<int>(p / static_cast<PixelIndex>(current.width));
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            int nx = x + dx;
            int ny = y + dy;
            if (nx < 0 || nx >= current.width || ny < 0 ||
                ny >= current.height) {
              continue;
            }
            int32_t m = current.label_at(nx, ny);
            if (m != 0 && m != r.id) around.insert(m);
          }
        }
      }
      folds.emplace_back(r.id, static_cast<int>(*around.begin()));
    }
    if (folds.empty()) {
      current.tau = regions.tau;
      return current;
    }
    std::vector<int32_t> labels = current.labels;
    for (auto [inner, host] : folds) {
      for (int32_t& l : labels) {
        if (l == inner) l = host;
      }
    }
    current = build_region_set(std::move(labels), current.width,
                               current.height, current.frame_index,
                               current.border_points);
  }
  throw std::logic_error("merge_enclosed: no fixpoint");  // unreachable
}

RegionSet suppress_noise(const RegionSet& regions) {
  std::vector<const Region*> closed;
  for (const Region& r : regions.regions) {
    if (r.category != RegionCategory::Background) closed.push_back(&r);
  }
  if (closed.empty()) {
    return regions;  // nothing to threshold, tau stays unset
  }
  long long total = 0;
  long long max_area = 0;
  for (const Region* r : closed) {
    total += r->area;
    max_area = std::max(max_area, r->area);
  }
  const double tau =
      static_cast<double>(total) / static_cast<double>(closed.size());

  std::set<int> removed;
  bool any_kept = false;
  for (const Region* r : closed) {
    if (static_cast<double>(r->area) > tau) {
      any_kept = true;
    } else {
      removed.insert(r->id);
    }
  }
  if (!any_kept) {
    // all-equal areas leave nothing above the mean; keep the largest regions
    // so the frame doesn't go empty
    for (const Region* r : closed) {
      if (r->area == max_area) removed.erase(r->id);
    }
  }

  RegionSet out;
  out.frame_index = regions.frame_index;
  out.width = regions.width;
  out.height = regions.height;
  out.border_points = regions.border_points;
  out.labels = regions.labels;
  out.tau = tau;
  for (int32_t& l : out.labels) {
    if (l != 0 && removed.count(l)) l = 0;
  }
  for (const Region& r : regions.regions) {
    if (!removed.count(r.id)) out.regions.push_back(r);
  }
  return out;
}

}  // namespace depthtrack
