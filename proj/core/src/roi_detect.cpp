#include "depthtrack/roi_detect.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <stdexcept>

namespace depthtrack {

namespace {

constexpr uint8_t kAllCardinals =
    CardinalDirection::North | CardinalDirection::East |
    CardinalDirection::South | CardinalDirection::West;

bool valid_direction_bits(uint8_t bits) {
  if ((bits & ~kAllCardinals) != 0 || bits == 0) return false;
  int count = __builtin_popcount(bits);
  if (count == 1) return true;
  if (count != 2) return false;
  // two cardinals must be adjacent, not opposite
  bool ns = (bits & CardinalDirection::North) && (bits & CardinalDirection::South);
  bool ew = (bits & CardinalDirection::East) && (bits & CardinalDirection::West);
  return !ns && !ew;
}

}  // namespace

CardinalDirection::CardinalDirection(uint8_t bits) : bits_(bits) {
  if (!valid_direction_bits(bits)) {
    throw std::invalid_argument("CardinalDirection: invalid cardinal combo");
  }
}

std::optional<CardinalDirection> CardinalDirection::from_offset(double dx,
                                                                double dy) {
  if (dx == 0.0 && dy == 0.0) return std::nullopt;
  // tan(22.5 deg); offsets at most 22.5 deg off an axis collapse to a single
  // cardinal, anything between the bands takes both
  constexpr double kSlack = 0.41421356237309503;
  const double adx = std::abs(dx);
  const double ady = std::abs(dy);
  uint8_t bits = 0;
  if (ady <= kSlack * adx) {
    bits = dx > 0 ? East : West;
  } else if (adx <= kSlack * ady) {
    bits = dy > 0 ? South : North;
  } else {
    bits = static_cast<uint8_t>((dx > 0 ? East : West) |
                                (dy > 0 ? South : North));
  }
  return CardinalDirection(bits);
}

std::string CardinalDirection::to_string() const {
  std::string s;
  if (bits_ & North) s += 'N';
  if (bits_ & South) s += 'S';
  if (bits_ & East) s += 'E';
  if (bits_ & West) s += 'W';
  return s;
}

const MappedPair* RegionMapping::pair_for_prev(int prev_id) const {
  for (const MappedPair& p : pairs) {
    if (p.prev_id == prev_id) return &p;
  }
  return nullptr;
}

const MappedPair* RegionMapping::pair_for_curr(int curr_id) const {
  for (const MappedPair& p : pairs) {
    if (p.curr_id == curr_id) return &p;
  }
  return nullptr;
}

long long displacement(const Region& a, const Region& b) {
  if (a.frame_width != b.frame_width || a.frame_height != b.frame_height) {
    throw std::invalid_argument("displacement: frame dimensions differ");
  }
  return difference_count(b.pixels, a.pixels);
}

RegionMapping map_regions(const RegionSet& prev, const RegionSet& curr,
                          long long delta) {
  if (prev.width != curr.width || prev.height != curr.height) {
    throw std::invalid_argument("map_regions: frame dimensions differ");
  }
  if (delta < 0) {
    throw std::invalid_argument("map_regions: delta must be non-negative");
  }

  std::map<int, long long> area_prev, area_curr;
  for (const Region& r : prev.regions) {
    if (r.category != RegionCategory::Background) area_prev[r.id] = r.area;
  }
  for (const Region& r : curr.regions) {
    if (r.category != RegionCategory::Background) area_curr[r.id] = r.area;
  }

  // joint histogram over the closed labels of both grids
  std::map<std::pair<int, int>, long long> overlaps;
  const size_t n = prev.labels.size();
  for (size_t i = 0; i < n; ++i) {
    int32_t a = prev.labels[i];
    int32_t b = curr.labels[i];
    if (a == 0 || b == 0) continue;
    if (!area_prev.count(a) || !area_curr.count(b)) continue;
    ++overlaps[{a, b}];
  }

  struct Cand {
    int a;
    int b;
    long long overlap;
    long long disp;
  };
  std::vector<Cand> cands;
  cands.reserve(overlaps.size());
  for (const auto& [key, ov] : overlaps) {
    cands.push_back({key.first, key.second, ov, area_curr[key.second] - ov});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& l, const Cand& r) {
    if (l.overlap != r.overlap) return l.overlap > r.overlap;
    if (l.disp != r.disp) return l.disp < r.disp;
    if (l.a != r.a) return l.a < r.a;
    return l.b < r.b;
  });

  RegionMapping out;
  out.frame_prev = prev.frame_index;
  out.frame_curr = curr.frame_index;
  std::map<int, bool> taken_prev, taken_curr;
  for (const Cand& c : cands) {
    if (taken_prev[c.a] || taken_curr[c.b]) continue;
    taken_prev[c.a] = true;
    taken_curr[c.b] = true;
    out.pairs.push_back({c.a, c.b, c.overlap, c.disp, c.disp > delta});
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const MappedPair& l, const MappedPair& r) {
              return l.prev_id < r.prev_id;
            });
  for (const auto& [id, area] : area_prev) {
    if (!taken_prev[id]) out.unmatched_prev.push_back(id);
  }
  for (const auto& [id, area] : area_curr) {
    if (!taken_curr[id]) out.unmatched_curr.push_back(id);
  }
  return out;
}

std::vector<RoiCandidate> detect_rois(std::span<const RegionSet> frames,
                                      std::span<const RegionMapping> mappings,
                                      long long roi_threshold) {
  if (frames.size() < 2) {
    throw std::invalid_argument("detect_rois: needs at least two frames");
  }
  if (mappings.size() != frames.size() - 1) {
    throw std::invalid_argument(
        "detect_rois: needs one mapping per consecutive frame pair");
  }
  for (size_t s = 0; s < mappings.size(); ++s) {
    if (mappings[s].frame_prev != frames[s].frame_index ||
        mappings[s].frame_curr != frames[s + 1].frame_index) {
      throw std::invalid_argument("detect_rois: mappings misaligned");
    }
  }

  std::vector<RoiCandidate> out;
  std::map<int, size_t> alive;  // region id in frames[s] -> candidate index
  for (size_t s = 0; s < mappings.size(); ++s) {
    std::map<int, size_t> next_alive;
    for (const MappedPair& p : mappings[s].pairs) {
      auto it = alive.find(p.prev_id);
      size_t idx;
      if (it != alive.end()) {
        idx = it->second;
        out[idx].region_ids.push_back(p.curr_id);
        out[idx].accumulated += p.displacement;
      } else {
        idx = out.size();
        RoiCandidate c;
        c.start_step = static_cast<int>(s);
        c.region_ids = {p.prev_id, p.curr_id};
        c.accumulated = p.displacement;
        out.push_back(std::move(c));
      }
      next_alive[p.curr_id] = idx;
    }
    alive = std::move(next_alive);  // lineages without a match just end
  }

  for (RoiCandidate& c : out) {
    c.is_roi = c.accumulated > roi_threshold;
    const int last = c.last_step();
    const RegionMapping& m = mappings[static_cast<size_t>(last) - 1];
    const MappedPair* p =
        m.pair_for_prev(c.region_ids[c.region_ids.size() - 2]);
    if (p != nullptr && p->displacement > 0) {
      const Region* a = frames[static_cast<size_t>(last) - 1].find(p->prev_id);
      const Region* b = frames[static_cast<size_t>(last)].find(p->curr_id);
      c.direction = estimate_direction(*a, *b);
    }
  }
  return out;
}

std::optional<CardinalDirection> estimate_direction(const Region& prev,
                                                    const Region& curr) {
  if (prev.frame_width != curr.frame_width ||
      prev.frame_height != curr.frame_height) {
    throw std::invalid_argument("estimate_direction: frame dimensions differ");
  }
  Mask fresh;
  std::set_difference(curr.pixels.begin(), curr.pixels.end(),
                      prev.pixels.begin(), prev.pixels.end(),
                      std::back_inserter(fresh));
  if (fresh.empty()) {
    throw std::invalid_argument("estimate_direction: zero displacement");
  }
  double fx, fy;
  mask_centroid(fresh, curr.frame_width, &fx, &fy);
  return CardinalDirection::from_offset(fx - curr.centroid_x,
                                        fy - curr.centroid_y);
}

}  // namespace depthtrack
