#include "depthtrack/mask_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace depthtrack {

long long overlap_count(const Mask& a, const Mask& b) {
  long long n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

long long difference_count(const Mask& b, const Mask& a) {
  return static_cast<long long>(b.size()) - overlap_count(a, b);
}

Box mask_bbox(const Mask& m, int width) {
  if (m.empty()) {
    throw std::invalid_argument("mask_bbox: empty mask");
  }
  int min_x = std::numeric_limits<int>::max();
  int max_x = std::numeric_limits<int>::min();
  // rows are sorted by construction
  int min_y = static_cast<int>(m.front() / static_cast<PixelIndex>(width));
  int max_y = static_cast<int>(m.back() / static_cast<PixelIndex>(width));
  for (PixelIndex p : m) {
    int x = static_cast<int>(p % static_cast<PixelIndex>(width));
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
  }
  return Box{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
}

void mask_centroid(const Mask& m, int width, double* cx, double* cy) {
  if (m.empty()) {
    throw std::invalid_argument("mask_centroid: empty mask");
  }
  long long sx = 0;
  long long sy = 0;
  for (PixelIndex p : m) {
    sx += static_cast<long long>(p % static_cast<PixelIndex>(width));
    sy += static_cast<long long>(p / static_cast<PixelIndex>(width));
  }
  *cx = static_cast<double>(sx) / static_cast<double>(m.size());
  *cy = static_cast<double>(sy) / static_cast<double>(m.size());
}

Mask mask_boundary(const Mask& m, int width, int height) {
  Mask out;
  for (PixelIndex p : m) {
    int x = static_cast<int>(p % static_cast<PixelIndex>(width));
    int y = static_cast<int>(p / static_cast<PixelIndex>(width));
    if (x == 0 || y == 0 || x == width - 1 || y == height - 1) {
      out.push_back(p);
      continue;
    }
    bool edge = false;
    for (int dy = -1; dy <= 1 && !edge; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        PixelIndex q = pack_pixel(x + dx, y + dy, width);
        if (!std::binary_search(m.begin(), m.end(), q)) {
          edge = true;
          break;
        }
      }
    }
    if (edge) out.push_back(p);
  }
  return out;
}

double euclidean_gap(const Mask& a, const Mask& b, int width, int height) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("euclidean_gap: empty mask");
  }
  if (overlap_count(a, b) > 0) return 0.0;
  Mask ba = mask_boundary(a, width, height);
  Mask bb = mask_boundary(b, width, height);
  long long best = std::numeric_limits<long long>::max();
  for (PixelIndex p : ba) {
    long long px = p % static_cast<PixelIndex>(width);
    long long py = p / static_cast<PixelIndex>(width);
    for (PixelIndex q : bb) {
      long long dx = px - static_cast<long long>(q % static_cast<PixelIndex>(width));
      long long dy = py - static_cast<long long>(q / static_cast<PixelIndex>(width));
      best = std::min(best, dx * dx + dy * dy);
    }
  }
  // 8-adjacent boundaries count as touching
  if (best <= 2) return 0.0;
  return std::sqrt(static_cast<double>(best));
}

}  // namespace depthtrack
