#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "depthtrack/depth_map.hpp"
#include "depthtrack/mask_ops.hpp"

namespace depthtrack {

enum class RegionCategory { Background, Enclosed, Enclosing, Independent };

const char* to_string(RegionCategory c);

struct Region {
  int id = 0;  // label in the owning RegionSet, > 0
  RegionCategory category = RegionCategory::Independent;
  long long area = 0;
  Box bbox;
  double centroid_x = 0;
  double centroid_y = 0;
  int border_pixels = 0;  // pixels of the mask on the image border
  int frame_width = 0;
  int frame_height = 0;
  Mask pixels;
};

// Watershed output: every pixel carries the label of its catchment basin.
struct RegionLabelMap {
  int width = 0;
  int height = 0;
  int frame_index = 0;
  std::vector<int32_t> labels;  // row-major, labels start at 1

  int32_t at(int x, int y) const {
    return labels[static_cast<size_t>(y) * width + x];
  }
};

// Segmentation of one frame. labels[i] == 0 means the pixel belongs to no
// region (only possible after noise suppression removed its region).
struct RegionSet {
  int frame_index = 0;
  int width = 0;
  int height = 0;
  int border_points = 0;  // background threshold the categories were built with
  std::vector<int32_t> labels;
  std::vector<Region> regions;       // ascending id
  std::optional<double> tau;         // area cutoff used by suppress_noise

  const Region* find(int id) const;
  int32_t label_at(int x, int y) const {
    return labels[static_cast<size_t>(y) * width + x];
  }
};

// Weighted average over a (2*ceil(3*sigma)+1)^2 window. Holes contribute
// nothing and stay holes; weights renormalize over the valid neighbours.
DepthMap gaussian_smooth(const DepthMap& frame, double sigma);

// Marker-based flooding of the depth gradient magnitude. Markers are the
// regional minima of the gradient; each pixel ends up with the label of the
// basin that reached it first (lowest gradient value, then insertion order).
RegionLabelMap watershed_segment(const DepthMap& frame);

// Builds Region entries and assigns categories:
//   Background  - at least border_points pixels on the image border
//   Enclosed    - no border contact and the whole outer boundary abuts a
//                 single non-background region
//   Enclosing   - has at least one Enclosed region inside it
//   Independent - everything else
RegionSet categorize_regions(const RegionLabelMap& labels, int border_points);

// Folds every Enclosed region into its container, repeating until none are
// left (nesting can be transitive). Categories are recomputed after merging.
RegionSet merge_enclosed(const RegionSet& regions);

// Area filter over the closed (non-background) regions: keep a region iff its
// area exceeds the mean closed-region area. If nothing survives the cut, the
// largest closed region(s) are kept so a frame never loses all content.
RegionSet suppress_noise(const RegionSet& regions);

}  // namespace depthtrack
