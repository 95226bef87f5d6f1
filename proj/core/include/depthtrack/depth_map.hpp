#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace depthtrack {

// Axis-aligned box in pixel coordinates, origin at the top-left corner.
// w/h count whole pixels, so the covered range is [x, x+w) x [y, y+h).
struct Box {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const Box&) const = default;

  long long area() const { return static_cast<long long>(w) * h; }
  int right() const { return x + w; }
  int bottom() const { return y + h; }
};

// Single-channel depth frame. Values are millimeters; 0 marks an invalid
// sample (a sensor hole), never a measured distance.
struct DepthMap {
  int width = 0;
  int height = 0;
  int frame_index = 0;
  std::vector<uint16_t> values;  // row-major

  uint16_t at(int x, int y) const {
    return values[static_cast<size_t>(y) * width + x];
  }
  uint16_t& at(int x, int y) {
    return values[static_cast<size_t>(y) * width + x];
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  size_t size() const { return values.size(); }
};

DepthMap make_depth_map(int width, int height, uint16_t fill = 0,
                        int frame_index = 0);

struct GroundTruthEntry {
  int object_id = 0;
  Box box;
};

// Per-frame annotated object boxes, keyed by frame index.
struct GroundTruth {
  std::map<int, std::vector<GroundTruthEntry>> frames;

  bool empty() const { return frames.empty(); }
  // nullptr when the frame has no entries.
  const std::vector<GroundTruthEntry>* at_frame(int frame) const {
    auto it = frames.find(frame);
    return it == frames.end() ? nullptr : &it->second;
  }
};

}  // namespace depthtrack
