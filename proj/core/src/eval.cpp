#include "depthtrack/eval.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace depthtrack {

DetectionCounts& DetectionCounts::operator+=(const DetectionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

double overlap_ratio(const Box& a, const Box& b) {
  if (a.w <= 0 || a.h <= 0 || b.w <= 0 || b.h <= 0) {
    throw std::invalid_argument("overlap_ratio: degenerate box");
  }
  const long long ix = std::max(
      0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const long long iy = std::max(
      0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  const long long inter = ix * iy;
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

// Greedy one-to-one assignment by descending overlap; ties break to the
// earlier prediction, then the earlier truth box. Returns per-prediction
// matched overlap (-1 for unmatched).
std::vector<double> greedy_match(const std::vector<Box>& predicted,
                                 const std::vector<Box>& truth) {
  struct Cand {
    double r;
    size_t p;
    size_t t;
  };
  std::vector<Cand> cands;
  for (size_t p = 0; p < predicted.size(); ++p) {
    for (size_t t = 0; t < truth.size(); ++t) {
      double r = overlap_ratio(predicted[p], truth[t]);
      if (r > 0) cands.push_back({r, p, t});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.r != b.r) return a.r > b.r;
    if (a.p != b.p) return a.p < b.p;
    return a.t < b.t;
  });
  std::vector<double> matched(predicted.size(), -1.0);
  std::vector<uint8_t> taken(truth.size(), 0);
  for (const Cand& c : cands) {
    if (matched[c.p] >= 0 || taken[c.t]) continue;
    matched[c.p] = c.r;
    taken[c.t] = 1;
  }
  return matched;
}

}  // namespace

DetectionCounts match_detections(const std::vector<Box>& predicted,
                                 const std::vector<Box>& truth, double r_min) {
  if (!(r_min > 0.0) || r_min > 1.0) {
    throw std::invalid_argument("match_detections: r_min must be in (0, 1]");
  }
  const std::vector<double> matched = greedy_match(predicted, truth);
  DetectionCounts c;
  for (double r : matched) {
    if (r >= r_min) {
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  c.fn = static_cast<long long>(truth.size()) - c.tp;
  return c;
}

double harmonic_f1(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

Scores f1_score(const DetectionCounts& counts) {
  Scores s;
  const long long tp = counts.tp;
  if (tp + counts.fp > 0) {
    s.precision = static_cast<double>(tp) / (tp + counts.fp);
  }
  if (tp + counts.fn > 0) {
    s.recall = static_cast<double>(tp) / (tp + counts.fn);
  }
  s.f1 = harmonic_f1(s.precision, s.recall);
  return s;
}

namespace {

double success_fraction(const std::vector<TrackRecord>& tracks,
                        const GroundTruth& gt, double r_min) {
  if (gt.empty()) {
    throw std::invalid_argument("success_rate: empty ground truth");
  }
  if (!(r_min >= 0.0) || r_min > 1.0) {
    throw std::invalid_argument("success_rate: r_min must be in [0, 1]");
  }
  if (tracks.empty()) return 0.0;

  int first_frame = tracks.front().frame;
  std::map<int, std::vector<Box>> by_frame;
  for (const TrackRecord& r : tracks) {
    first_frame = std::min(first_frame, r.frame);
    by_frame[r.frame].push_back(r.box);
  }

  long long total = 0;
  long long hits = 0;
  for (const auto& [frame, entries] : gt.frames) {
    // nothing can be tracked before the warm-up window has output
    if (frame < first_frame) continue;
    total += static_cast<long long>(entries.size());
    auto it = by_frame.find(frame);
    if (it == by_frame.end()) continue;
    std::vector<Box> truth;
    truth.reserve(entries.size());
    for (const GroundTruthEntry& e : entries) truth.push_back(e.box);
    const std::vector<double> matched = greedy_match(it->second, truth);
    for (double r : matched) {
      if (r > r_min) ++hits;  // strictly above, the boundary does not count
    }
  }
  if (total == 0) return 0.0;
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

double success_rate(const std::vector<TrackRecord>& tracks,
                    const GroundTruth& gt, double r_min) {
  return success_fraction(tracks, gt, r_min);
}

std::vector<SrPoint> sr_curve(const std::vector<TrackRecord>& tracks,
                              const GroundTruth& gt,
                              const std::vector<double>& thresholds) {
  if (thresholds.empty()) {
    throw std::invalid_argument("sr_curve: no thresholds");
  }
  for (size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i] < 0.0 || thresholds[i] > 1.0) {
      throw std::invalid_argument("sr_curve: thresholds must be in [0, 1]");
    }
    if (i > 0 && thresholds[i] <= thresholds[i - 1]) {
      throw std::invalid_argument("sr_curve: thresholds must be ascending");
    }
  }
  std::vector<SrPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    out.push_back({t, success_fraction(tracks, gt, t)});
  }
  return out;
}

}  // namespace depthtrack
