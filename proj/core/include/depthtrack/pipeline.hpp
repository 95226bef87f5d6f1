#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "depthtrack/depth_io.hpp"
#include "depthtrack/eval.hpp"
#include "depthtrack/tracker.hpp"

namespace depthtrack {

struct PipelineConfig {
  double sigma = 1.0;
  int border_points = 20;
  int k = 5;
  long long delta = 80;
  long long roi_threshold = 70;
  double iota = 0.4;
  double r_min = 0.5;
  bool optimize = true;
  uint64_t seed = 0;

  std::filesystem::path manifest;
  std::filesystem::path gt_path;  // overrides a manifest gt: line when set
  std::filesystem::path out_dir;
  bool overlays = false;

  void validate() const;  // throws std::invalid_argument
  TrackerParams tracker_params() const;
  // "key=value" pairs echoed into every report header.
  std::string echo() const;
};

// smooth -> watershed -> categorize -> merge -> suppress, for one frame.
RegionSet process_frame(const DepthMap& frame, const PipelineConfig& cfg);

struct FrameDetections {
  int frame = 0;
  std::vector<Box> boxes;  // current boxes of the window's ROI lineages
};

struct DetectionRun {
  std::vector<FrameDetections> frames;  // frames k-1 .. end
  std::optional<DetectionCounts> counts;  // when ground truth is available
  std::optional<Scores> scores;
};

struct TrackingRun {
  int width = 0;
  int height = 0;
  std::vector<TrackRecord> records;
  std::vector<OcclusionReport> reports;  // every evaluation, flagged or not
  std::vector<CandidateStats> candidate_stats;
  std::optional<double> sr;  // at r_min, when ground truth is available
  std::vector<SrPoint> curve;
};

struct BenchRun {
  size_t frames = 0;
  double unoptimized_ms = 0;  // mean per frame, file I/O excluded
  double optimized_ms = 0;
  double mean_full_candidates = 0;
  double mean_pruned_candidates = 0;
  bool identical_tracks = false;  // both modes produced the same records
};

// Per-frame callback for overlay output (empty shapes before tracking
// starts). Receives the raw frame, not the segmentation.
using OverlaySink =
    std::function<void(const DepthMap&, const std::vector<OverlayShape>&)>;

DetectionRun run_detection(SequenceReader& seq, const PipelineConfig& cfg,
                           const OverlaySink* sink = nullptr);
TrackingRun run_tracking(SequenceReader& seq, const PipelineConfig& cfg,
                         const OverlaySink* sink = nullptr);
BenchRun run_bench(SequenceReader& seq, const PipelineConfig& cfg);

// Subcommand bodies. Each writes its reports under cfg.out_dir (created on
// demand) and returns a process exit code. Reports land atomically: a failed
// run leaves no partial file behind.
int cmd_detect(const PipelineConfig& cfg);
int cmd_track(const PipelineConfig& cfg);
int cmd_bench(const PipelineConfig& cfg);
int cmd_synth(const std::filesystem::path& spec_path, uint64_t seed,
              const std::filesystem::path& out_dir);

// Serialized track record line: "frame track_id status x y w h" where status
// is "active" or "occluded:<occluder id>".
std::string format_track_record(const TrackRecord& r);

}  // namespace depthtrack
