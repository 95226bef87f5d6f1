#pragma once

#include <vector>

#include "depthtrack/depth_map.hpp"
#include "depthtrack/tracker.hpp"

namespace depthtrack {

struct DetectionCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;

  DetectionCounts& operator+=(const DetectionCounts& o);
};

struct Scores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Intersection over union of two boxes. Throws on a degenerate (zero-area)
// box.
double overlap_ratio(const Box& a, const Box& b);

// Greedy one-to-one matching by descending overlap ratio; a prediction counts
// as a true positive when its matched overlap reaches r_min. r_min must lie
// in (0, 1].
DetectionCounts match_detections(const std::vector<Box>& predicted,
                                 const std::vector<Box>& truth, double r_min);

// Harmonic mean of precision and recall; 0 when both are 0.
double harmonic_f1(double precision, double recall);

// precision = tp/(tp+fp), recall = tp/(tp+fn), f1 their harmonic mean; all 0
// when the corresponding denominator is 0.
Scores f1_score(const DetectionCounts& counts);

// Fraction of (frame, annotated object) pairs whose matched track box
// overlaps strictly above r_min. Only frames from the first tracked frame
// onward count; earlier frames have no output to grade by construction.
// Throws on empty ground truth.
double success_rate(const std::vector<TrackRecord>& tracks,
                    const GroundTruth& gt, double r_min = 0.5);

struct SrPoint {
  double threshold = 0;
  double sr = 0;
};

// success_rate sampled at each threshold; thresholds must be ascending and
// within [0, 1]. The resulting curve is non-increasing.
std::vector<SrPoint> sr_curve(const std::vector<TrackRecord>& tracks,
                              const GroundTruth& gt,
                              const std::vector<double>& thresholds);

}  // namespace depthtrack
