#include "depthtrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>

namespace depthtrack {

const char* to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::Active: return "active";
    case TrackStatus::Occluded: return "occluded";
    case TrackStatus::Lost: return "lost";
  }
  return "?";
}

long long area_change(const RoiTrack& track) {
  const size_t n = track.area_history.size();
  if (n < 2) {
    throw std::invalid_argument("area_change: needs two frames of history");
  }
  return std::llabs(track.area_history[n - 1] - track.area_history[n - 2]);
}

double euclidean_gap(const RoiTrack& a, const RoiTrack& b, int width,
                     int height) {
  return euclidean_gap(a.mask, b.mask, width, height);
}

OcclusionReport detect_occlusion(const RoiTrack& a, const RoiTrack& b,
                                 double iota, int frame, int width,
                                 int height) {
  if (a.status != TrackStatus::Active || b.status != TrackStatus::Active) {
    throw std::invalid_argument("detect_occlusion: both tracks must be active");
  }
  if (!(iota > 0.0)) {
    throw std::invalid_argument("detect_occlusion: iota must be positive");
  }
  const long long da = area_change(a);
  const long long db = area_change(b);
  const double gap = euclidean_gap(a, b, width, height);
  const long long delta = std::max(da, db);
  const double od = static_cast<double>(delta) / (std::exp(-gap) + 1.0);

  OcclusionReport r;
  r.frame = frame;
  r.gap = gap;
  r.area_delta = delta;
  r.od = od;
  // touching masks with a suspiciously small area change: one object is
  // slipping behind the other rather than arriving or leaving
  r.flagged = gap == 0.0 && od < iota;
  // the faster-shrinking-or-growing track is the one being covered
  const RoiTrack& ee = da > db ? a : (db > da ? b : (a.id < b.id ? a : b));
  const RoiTrack& er = &ee == &a ? b : a;
  r.occludee = ee.id;
  r.occluder = er.id;
  return r;
}

namespace {

std::optional<CardinalDirection> direction_from_masks(const Mask& prev_mask,
                                                      const Region& curr,
                                                      int width) {
  Mask fresh;
  std::set_difference(curr.pixels.begin(), curr.pixels.end(),
                      prev_mask.begin(), prev_mask.end(),
                      std::back_inserter(fresh));
  if (fresh.empty()) return std::nullopt;
  double fx, fy;
  mask_centroid(fresh, width, &fx, &fy);
  return CardinalDirection::from_offset(fx - curr.centroid_x,
                                        fy - curr.centroid_y);
}

}  // namespace

Tracker::Tracker(std::span<const RegionSet> frames,
                 const TrackerParams& params)
    : params_(params) {
  if (params_.k < 2) {
    throw std::invalid_argument("Tracker: k must be at least 2");
  }
  if (params_.delta < 0 || params_.roi_threshold < 0) {
    throw std::invalid_argument("Tracker: thresholds must be non-negative");
  }
  if (!(params_.iota > 0.0)) {
    throw std::invalid_argument("Tracker: iota must be positive");
  }
  const size_t need = static_cast<size_t>(params_.k) + 1;
  if (frames.size() != need) {
    throw std::invalid_argument("Tracker: needs exactly k+1 region sets");
  }
  width_ = frames[0].width;
  height_ = frames[0].height;
  for (size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].width != width_ || frames[i].height != height_) {
      throw std::invalid_argument("Tracker: frame dimensions differ");
    }
    if (i > 0 && frames[i].frame_index != frames[i - 1].frame_index + 1) {
      throw std::invalid_argument("Tracker: frames are not consecutive");
    }
  }

  const size_t k = static_cast<size_t>(params_.k);
  std::vector<RegionMapping> mappings;
  mappings.reserve(k - 1);
  for (size_t i = 0; i + 1 < k; ++i) {
    mappings.push_back(map_regions(frames[i], frames[i + 1], params_.delta));
  }
  const std::vector<RoiCandidate> cands =
      detect_rois(frames.first(k), mappings, params_.roi_threshold);
  const RegionMapping into_now =
      map_regions(frames[k - 1], frames[k], params_.delta);
  frame_ = frames[k].frame_index;

  for (const RoiCandidate& c : cands) {
    if (!c.is_roi || c.last_step() != static_cast<int>(k) - 1) continue;
    const MappedPair* pair = into_now.pair_for_prev(c.last_region());
    if (pair == nullptr) continue;  // the ROI vanished right at the boundary
    const Region* region = frames[k].find(pair->curr_id);
    std::vector<long long> areas;
    for (size_t i = 0; i < c.region_ids.size(); ++i) {
      areas.push_back(frames[static_cast<size_t>(c.start_step) + i]
                          .find(c.region_ids[i])
                          ->area);
    }
    areas.push_back(region->area);
    std::optional<CardinalDirection> dir = c.direction;
    if (pair->displacement > 0) {
      dir = direction_from_masks(
          frames[k - 1].find(pair->prev_id)->pixels, *region, width_);
    }
    spawn_track(*region, std::move(areas), dir);
  }

  window_.assign(frames.begin() + 1, frames.end());
  steps_since_refresh_ = 0;
  emit_records();
}

void Tracker::spawn_track(const Region& region, std::vector<long long> areas,
                          std::optional<CardinalDirection> direction) {
  RoiTrack t;
  t.id = next_track_id_++;
  t.status = TrackStatus::Active;
  t.birth_frame = frame_;
  t.region_id = region.id;
  t.mask = region.pixels;
  t.box = region.bbox;
  t.cx = region.centroid_x;
  t.cy = region.centroid_y;
  t.area_history = std::move(areas);
  t.direction = direction;
  tracks_.push_back(std::move(t));
}

void Tracker::advance_track(RoiTrack& track, const Region& region,
                            std::optional<CardinalDirection> direction) {
  track.region_id = region.id;
  track.mask = region.pixels;
  track.box = region.bbox;
  track.cx = region.centroid_x;
  track.cy = region.centroid_y;
  track.area_history.push_back(region.area);
  if (direction) track.direction = direction;
}

const RoiTrack* Tracker::find_track(int id) const {
  for (const RoiTrack& t : tracks_) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

void Tracker::step(const RegionSet& curr) {
  if (curr.width != width_ || curr.height != height_) {
    throw std::invalid_argument("step: frame dimensions differ");
  }
  if (curr.frame_index != frame_ + 1) {
    throw std::invalid_argument("step: frames must arrive consecutively");
  }
  const RegionSet& prev = window_.back();
  const RegionMapping mapping = map_regions(prev, curr, params_.delta);
  const RegionGraph graph = build_graph(curr);
  frame_ = curr.frame_index;

  // Plan every advance against the previous state before mutating anything,
  // so the outcome cannot depend on track iteration order.
  struct Advance {
    RoiTrack* track;
    const Region* region;
    const MappedPair* pair;
  };
  std::vector<Advance> advances;
  std::vector<RoiTrack*> strays;  // active tracks whose region went unmatched
  std::map<int, int> winner_track;  // curr region id -> track id

  for (RoiTrack& t : tracks_) {
    if (t.status != TrackStatus::Active) continue;
    const MappedPair* pair = mapping.pair_for_prev(t.region_id);
    if (pair == nullptr) {
      strays.push_back(&t);
      continue;
    }
    // Candidate search around the landing node. The direction prune may only
    // shrink the set; a region matched to some other lineage is off limits.
    std::vector<int> full = {};
    std::vector<int> pruned = {};
    if (graph.has_node(pair->curr_id)) {
      const NodeTable table = node_table(graph, pair->curr_id);
      const WeightedRegionGraph wg = assign_weights(graph, table);
      full = candidate_regions(wg, pair->curr_id, std::nullopt);
      pruned = params_.optimize
                   ? candidate_regions(wg, pair->curr_id, t.direction)
                   : full;
    }
    stats_.push_back({frame_, t.id, pruned.size(), full.size()});

    long long best_overlap = pair->overlap;
    int best_id = pair->curr_id;
    for (int cand : pruned) {
      if (mapping.pair_for_curr(cand) != nullptr) continue;
      const Region* r = curr.find(cand);
      long long ov = overlap_count(t.mask, r->pixels);
      if (ov > best_overlap || (ov == best_overlap && cand < best_id)) {
        best_overlap = ov;
        best_id = cand;
      }
    }
    advances.push_back({&t, curr.find(best_id), pair});
    winner_track[best_id] = t.id;
  }

  for (const Advance& a : advances) {
    const Mask prev_mask = a.track->mask;
    std::optional<CardinalDirection> dir;
    bool moved = a.region->id == a.pair->curr_id
                     ? a.pair->displacement > 0
                     : difference_count(a.region->pixels, prev_mask) > 0;
    if (moved) dir = direction_from_masks(prev_mask, *a.region, width_);
    advance_track(*a.track, *a.region, dir);
  }

  // A stray track's old region matched nothing, and every current region
  // overlapping its mask is already matched to some other lineage (greedy
  // matching guarantees this). If the best of those belongs to a track, the
  // stray slipped behind it; otherwise there is nothing to follow.
  for (RoiTrack* t : strays) {
    long long best_overlap = 0;
    int best_region = 0;
    for (const Region& r : curr.regions) {
      if (r.category == RegionCategory::Background) continue;
      long long ov = overlap_count(t->mask, r.pixels);
      if (ov > best_overlap) {
        best_overlap = ov;
        best_region = r.id;
      }
    }
    auto owner = winner_track.find(best_region);
    if (best_overlap > 0 && owner != winner_track.end()) {
      t->status = TrackStatus::Occluded;
      t->occluder = owner->second;
      t->occluded_since = frame_;
      t->area_history.push_back(t->area_history.back());  // mask is frozen
    } else {
      t->status = TrackStatus::Lost;
    }
  }

  // Occluded tracks: give up after k frames, otherwise look for a region
  // that split back off. Only regions no lineage claimed are up for grabs.
  std::set<int> reclaimed;
  for (RoiTrack& t : tracks_) {
    if (t.status != TrackStatus::Occluded) continue;
    if (t.occluded_since == frame_) continue;  // handled by the stray pass
    if (frame_ - t.occluded_since >= params_.k) {
      t.status = TrackStatus::Lost;
      continue;
    }
    long long best_overlap = 0;
    const Region* best = nullptr;
    for (const Region& r : curr.regions) {
      if (r.category == RegionCategory::Background) continue;
      if (mapping.pair_for_curr(r.id) != nullptr) continue;
      if (winner_track.count(r.id) || reclaimed.count(r.id)) continue;
      long long ov = overlap_count(t.mask, r.pixels);
      if (ov > best_overlap) {
        best_overlap = ov;
        best = &r;
      }
    }
    if (best != nullptr) {
      reclaimed.insert(best->id);
      t.status = TrackStatus::Active;
      t.occluder = -1;
      t.occluded_since = -1;
      advance_track(t, *best, direction_from_masks(t.mask, *best, width_));
    } else {
      t.area_history.push_back(t.area_history.back());
    }
  }

  window_.push_back(curr);
  if (window_.size() > static_cast<size_t>(params_.k)) {
    window_.erase(window_.begin());
  }
  ++steps_since_refresh_;
  if (steps_since_refresh_ >= params_.k) {
    refresh();
  }

  // Pairwise occlusion screen over everything still active.
  for (size_t i = 0; i < tracks_.size(); ++i) {
    if (tracks_[i].status != TrackStatus::Active) continue;
    for (size_t j = i + 1; j < tracks_.size(); ++j) {
      if (tracks_[j].status != TrackStatus::Active) continue;
      if (tracks_[i].area_history.size() < 2 ||
          tracks_[j].area_history.size() < 2) {
        continue;
      }
      reports_.push_back(detect_occlusion(tracks_[i], tracks_[j],
                                          params_.iota, frame_, width_,
                                          height_));
    }
  }

  emit_records();
}

void Tracker::refresh() {
  steps_since_refresh_ = 0;
  std::vector<RegionMapping> mappings;
  mappings.reserve(window_.size() - 1);
  for (size_t i = 0; i + 1 < window_.size(); ++i) {
    mappings.push_back(
        map_regions(window_[i], window_[i + 1], params_.delta));
  }
  const std::vector<RoiCandidate> cands =
      detect_rois(window_, mappings, params_.roi_threshold);
  const int last_step = static_cast<int>(window_.size()) - 1;

  std::set<int> roi_regions;
  for (const RoiCandidate& c : cands) {
    if (c.is_roi && c.last_step() == last_step) {
      roi_regions.insert(c.last_region());
    }
  }
  std::set<int> owned;
  for (RoiTrack& t : tracks_) {
    if (t.status != TrackStatus::Active) continue;
    if (roi_regions.count(t.region_id)) {
      owned.insert(t.region_id);
    } else {
      // the window says this region stopped moving; without motion there is
      // no detection to hold the track up
      t.status = TrackStatus::Lost;
    }
  }
  for (const RoiCandidate& c : cands) {
    if (!c.is_roi || c.last_step() != last_step) continue;
    if (owned.count(c.last_region())) continue;
    const Region* region = window_.back().find(c.last_region());
    std::vector<long long> areas;
    for (size_t i = 0; i < c.region_ids.size(); ++i) {
      areas.push_back(window_[static_cast<size_t>(c.start_step) + i]
                          .find(c.region_ids[i])
                          ->area);
    }
    spawn_track(*region, std::move(areas), c.direction);
  }
}

void Tracker::emit_records() {
  for (const RoiTrack& t : tracks_) {
    if (t.status == TrackStatus::Lost) continue;
    records_.push_back({frame_, t.id, t.status, t.occluder, t.box});
  }
}

}  // namespace depthtrack
