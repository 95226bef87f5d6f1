#pragma once

#include <cstdint>
#include <vector>

#include "depthtrack/depth_map.hpp"

namespace depthtrack {

// A pixel mask is a sorted vector of row-major packed indices
// (y * width + x). Sortedness is relied on by the set operations below.
using PixelIndex = uint32_t;
using Mask = std::vector<PixelIndex>;

inline PixelIndex pack_pixel(int x, int y, int width) {
  return static_cast<PixelIndex>(y) * static_cast<PixelIndex>(width) +
         static_cast<PixelIndex>(x);
}

long long overlap_count(const Mask& a, const Mask& b);

// |b \ a|, i.e. pixels of b not present in a.
long long difference_count(const Mask& b, const Mask& a);

// Tight bounding box of a non-empty mask.
Box mask_bbox(const Mask& m, int width);

// Centroid of a non-empty mask (pixel centers at integer coordinates).
void mask_centroid(const Mask& m, int width, double* cx, double* cy);

// Pixels of m that lie on the image border or have an 8-neighbour outside m.
Mask mask_boundary(const Mask& m, int width, int height);

// Minimum Euclidean distance between the boundaries of two masks, in pixels.
// Defined as 0 when the masks overlap or their boundaries are 8-adjacent.
double euclidean_gap(const Mask& a, const Mask& b, int width, int height);

}  // namespace depthtrack
