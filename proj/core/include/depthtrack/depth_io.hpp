#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "depthtrack/depth_map.hpp"
#include "depthtrack/mask_ops.hpp"

namespace depthtrack {

// 16-bit binary PGM (P5, maxval 65535, big-endian samples). Loading rejects
// 8-bit files and rasters that disagree with the header dimensions.
DepthMap load_depth_frame(const std::filesystem::path& path);
void save_depth_frame(const DepthMap& frame, const std::filesystem::path& path);

// Text format, one object per line: frame_index object_id x y w h.
// Lines with a non-numeric third token (track output) are accepted too, so a
// track file can be re-read for scoring; blank lines and '#' comments skip.
GroundTruth load_ground_truth(const std::filesystem::path& path);
void save_ground_truth(const GroundTruth& gt,
                       const std::filesystem::path& path);

// A sequence manifest lists one frame path per line, optionally preceded by a
// "gt: <path>" line. Relative paths resolve against the manifest directory.
class SequenceReader {
 public:
  static SequenceReader open(const std::filesystem::path& manifest);

  size_t size() const { return paths_.size(); }
  // Loads frame i from disk; frame_index is set to i. Every frame must match
  // the dimensions of frame 0.
  DepthMap frame(size_t index);
  const std::optional<GroundTruth>& ground_truth() const { return gt_; }
  const std::filesystem::path& manifest_path() const { return manifest_; }

 private:
  std::filesystem::path manifest_;
  std::vector<std::filesystem::path> paths_;
  std::optional<GroundTruth> gt_;
  int width_ = 0;
  int height_ = 0;
};

SequenceReader load_sequence(const std::filesystem::path& manifest);

// ---- synthetic scene generation ----

struct VelocityChange {
  int frame = 0;
  double vx = 0;
  double vy = 0;
};

struct ActorSpec {
  enum class Shape { Rect, Disc };

  Shape shape = Shape::Rect;
  double x = 0;  // top-left for rects, center for discs
  double y = 0;
  int w = 0;      // rect only
  int h = 0;
  double radius = 0;  // disc only
  uint16_t depth = 1500;
  double vx = 0;  // pixels per frame
  double vy = 0;
  std::vector<VelocityChange> moves;  // velocity takes effect at .frame
};

struct NoiseRecipe {
  double sensor_stddev = 0;   // additive gaussian jitter, millimeters
  int blob_count = 0;         // spurious foreground patches per frame
  long long blob_area_min = 100;
  long long blob_area_max = 3000;
  double hole_prob = 0;       // per-pixel dropout probability
};

struct SceneSpec {
  int frames = 0;
  int width = 0;
  int height = 0;
  uint16_t background_depth = 8000;
  std::vector<ActorSpec> actors;
  NoiseRecipe noise;

  void validate() const;  // throws std::invalid_argument
};

SceneSpec load_scene_spec(const std::filesystem::path& path);

struct SyntheticScene {
  std::vector<DepthMap> frames;
  GroundTruth gt;  // tight visible-pixel boxes, object ids = actor indices
  // Visible pixels per frame per actor (nearer actors win overlaps).
  std::vector<std::vector<Mask>> actor_masks;
};

// Deterministic: identical spec and seed give identical frames. Noise comes
// from a single mt19937_64 stream advanced in a fixed order. Throws when an
// actor would leave the frame.
SyntheticScene synthesize_scene(const SceneSpec& spec, uint64_t seed);

// ---- overlays ----

struct OverlayShape {
  int id = 0;  // selects the color
  Box box;
  Mask mask;  // outlined when non-empty
};

// Depth rendered as grayscale with colored boxes and mask outlines on top,
// written as binary PPM. Color is a pure function of the shape id.
void write_overlay(const DepthMap& frame,
                   const std::vector<OverlayShape>& shapes,
                   const std::filesystem::path& path);

}  // namespace depthtrack
