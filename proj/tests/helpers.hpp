#pragma once

// Shared fixture builders for the unit tests. Everything here is test-side
// only and deliberately independent of the library internals it exercises.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "depthtrack/depth_map.hpp"
#include "depthtrack/mask_ops.hpp"
#include "depthtrack/noise_filter.hpp"

namespace testutil {

inline depthtrack::Mask rect_mask(int x, int y, int w, int h, int frame_width) {
  depthtrack::Mask m;
  m.reserve(static_cast<size_t>(w) * h);
  for (int yy = y; yy < y + h; ++yy) {
    for (int xx = x; xx < x + w; ++xx) {
      m.push_back(depthtrack::pack_pixel(xx, yy, frame_width));
    }
  }
  return m;
}

// Square blob of the given side centred at (cx, cy).
inline depthtrack::Mask blob_mask(int cx, int cy, int side, int frame_width) {
  const int half = side / 2;
  return rect_mask(cx - half, cy - half, side, side, frame_width);
}

// Builds a RegionSet from explicit masks, skipping segmentation entirely.
// Mask i becomes region id i+1 and is categorized Independent, so every
// region counts as closed. Masks must be disjoint and inside the frame.
inline depthtrack::RegionSet make_region_set(
    int width, int height, int frame_index,
    const std::vector<depthtrack::Mask>& masks) {
  depthtrack::RegionSet set;
  set.frame_index = frame_index;
  set.width = width;
  set.height = height;
  set.border_points = 20;
  set.labels.assign(static_cast<size_t>(width) * height, 0);
  for (size_t i = 0; i < masks.size(); ++i) {
    depthtrack::Region r;
    r.id = static_cast<int>(i) + 1;
    r.category = depthtrack::RegionCategory::Independent;
    r.frame_width = width;
    r.frame_height = height;
    r.pixels = masks[i];
    std::sort(r.pixels.begin(), r.pixels.end());
    r.area = static_cast<long long>(r.pixels.size());
    if (r.pixels.empty()) throw std::invalid_argument("empty test mask");
    long long sx = 0;
    long long sy = 0;
    int min_x = width;
    int min_y = height;
    int max_x = -1;
    int max_y = -1;
    for (depthtrack::PixelIndex p : r.pixels) {
      const int x = static_cast<int>(p % width);
      const int y = static_cast<int>(p / width);
      if (x < 0 || x >= width || y < 0 || y >= height) {
        throw std::invalid_argument("test mask outside the frame");
      }
      if (set.labels[p] != 0) throw std::invalid_argument("test masks overlap");
      set.labels[p] = r.id;
      sx += x;
      sy += y;
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
      if (x == 0 || y == 0 || x == width - 1 || y == height - 1) {
        ++r.border_pixels;
      }
    }
    r.centroid_x = static_cast<double>(sx) / static_cast<double>(r.area);
    r.centroid_y = static_cast<double>(sy) / static_cast<double>(r.area);
    r.bbox = {min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
    set.regions.push_back(std::move(r));
  }
  return set;
}

// Frame sequence for exact-mask tracker tests: one RegionSet per frame, each
// built from the per-frame masks.
inline std::vector<depthtrack::RegionSet> make_region_frames(
    int width, int height,
    const std::vector<std::vector<depthtrack::Mask>>& frames) {
  std::vector<depthtrack::RegionSet> out;
  out.reserve(frames.size());
  for (size_t f = 0; f < frames.size(); ++f) {
    out.push_back(
        make_region_set(width, height, static_cast<int>(f), frames[f]));
  }
  return out;
}

// Scratch directory unique to one test run, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "scratch") {
    std::random_device rd;
    std::ostringstream name;
    name << "depthtrack_" << tag << "_" << std::hex << rd() << rd();
    path_ = std::filesystem::temp_directory_path() / name.str();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& leaf = "") const {
    return leaf.empty() ? path_.string() : (path_ / leaf).string();
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
}

}  // namespace testutil
