#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "depthtrack/region_graph.hpp"
#include "depthtrack/roi_detect.hpp"

namespace depthtrack {

struct TrackerParams {
  int k = 5;                    // window for ROI detection, also the refresh
                                // interval and the occlusion patience
  long long delta = 80;         // per-step displacement for "moving"
  long long roi_threshold = 70; // accumulated displacement for an ROI
  double iota = 0.4;            // occlusion flag cutoff
  bool optimize = true;         // direction-pruned candidate search
};

enum class TrackStatus { Active, Occluded, Lost };

const char* to_string(TrackStatus s);

struct RoiTrack {
  int id = -1;
  TrackStatus status = TrackStatus::Active;
  int occluder = -1;       // track id, valid while status == Occluded
  int occluded_since = -1; // frame the occlusion started
  int birth_frame = 0;
  int region_id = 0;       // region in the most recent frame (stale while
                           // occluded: the mask below stays frozen)
  Mask mask;
  Box box;
  double cx = 0;
  double cy = 0;
  std::vector<long long> area_history;  // one entry per covered frame
  std::optional<CardinalDirection> direction;  // last observed motion
};

struct TrackRecord {
  int frame = 0;
  int track_id = 0;
  TrackStatus status = TrackStatus::Active;
  int occluder = -1;  // valid when status == Occluded
  Box box;
};

// One pairwise occlusion evaluation. flagged marks the detections.
struct OcclusionReport {
  int frame = 0;
  int occludee = 0;    // track whose area is changing faster
  int occluder = 0;
  double gap = 0;      // boundary distance between the two masks
  long long area_delta = 0;  // larger of the two per-frame area changes
  double od = 0;       // area_delta scaled down by the gap
  bool flagged = false;
};

// Candidate-set sizes for one track advance, with and without direction
// pruning. pruned == full when the tracker runs unoptimized.
struct CandidateStats {
  int frame = 0;
  int track_id = 0;
  size_t pruned = 0;
  size_t full = 0;
};

// |area(t) - area(t-1)| over the last two covered frames. Requires at least
// two frames of history.
long long area_change(const RoiTrack& track);

double euclidean_gap(const RoiTrack& a, const RoiTrack& b, int width,
                     int height);

// Occlusion score for a pair of Active tracks, each with at least two frames
// of history: od = max area change / (exp(-gap) + 1), flagged when the masks
// touch (gap == 0) and od stays below iota. The occludee is the track whose
// area changes faster; on a tie the lower id.
OcclusionReport detect_occlusion(const RoiTrack& a, const RoiTrack& b,
                                 double iota, int frame, int width,
                                 int height);

class Tracker {
 public:
  // frames: the first k+1 region sets of the sequence (consecutive). ROIs
  // detected over the first k frames become Active tracks on frame k.
  Tracker(std::span<const RegionSet> frames, const TrackerParams& params);

  // Advances every track into the next frame's region set, runs the pairwise
  // occlusion check, and refreshes the ROI detection every k frames.
  void step(const RegionSet& regions);

  // Re-runs ROI detection over the retained window: tracks whose region is no
  // longer a moving ROI are dropped, ROI regions without a track spawn one.
  void refresh();

  int current_frame() const { return frame_; }
  const std::vector<RoiTrack>& tracks() const { return tracks_; }
  const std::vector<TrackRecord>& records() const { return records_; }
  const std::vector<OcclusionReport>& occlusion_reports() const {
    return reports_;
  }
  const std::vector<CandidateStats>& candidate_stats() const { return stats_; }

 private:
  const RoiTrack* find_track(int id) const;
  void spawn_track(const Region& region, std::vector<long long> areas,
                   std::optional<CardinalDirection> direction);
  void advance_track(RoiTrack& track, const Region& region,
                     std::optional<CardinalDirection> direction);
  void emit_records();

  TrackerParams params_;
  int frame_ = 0;
  int width_ = 0;
  int height_ = 0;
  int next_track_id_ = 0;
  int steps_since_refresh_ = 0;
  std::vector<RegionSet> window_;  // last k region sets, back() is current
  std::vector<RoiTrack> tracks_;   // ascending id, Lost tracks retained
  std::vector<TrackRecord> records_;
  std::vector<OcclusionReport> reports_;
  std::vector<CandidateStats> stats_;
};

}  // namespace depthtrack
