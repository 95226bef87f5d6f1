#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "depthtrack/noise_filter.hpp"

namespace depthtrack {

// One or two adjacent compass cardinals, e.g. "N" or "NE". Two opposite
// cardinals never combine.
class CardinalDirection {
 public:
  enum Cardinal : uint8_t { North = 1, East = 2, South = 4, West = 8 };

  explicit CardinalDirection(uint8_t bits);

  // Classifies a centroid offset into 45-degree sectors: within 22.5 degrees
  // of an axis the direction is a single cardinal, otherwise the two
  // straddled cardinals. Exactly zero offsets have no direction.
  // +dx points East, +dy points South (image rows grow downward).
  static std::optional<CardinalDirection> from_offset(double dx, double dy);

  bool contains(uint8_t cardinal) const { return (bits_ & cardinal) != 0; }
  uint8_t bits() const { return bits_; }
  std::string to_string() const;

  bool operator==(const CardinalDirection&) const = default;

 private:
  uint8_t bits_;
};

// Association of one region across two consecutive frames.
struct MappedPair {
  int prev_id = 0;
  int curr_id = 0;
  long long overlap = 0;
  long long displacement = 0;  // pixels of curr not covered by prev
  bool moving = false;         // displacement > delta
};

struct RegionMapping {
  int frame_prev = 0;
  int frame_curr = 0;
  std::vector<MappedPair> pairs;  // ordered by prev_id, injective both ways
  std::vector<int> unmatched_prev;
  std::vector<int> unmatched_curr;

  const MappedPair* pair_for_prev(int prev_id) const;
  const MappedPair* pair_for_curr(int curr_id) const;
};

// A chain of mapped regions across a frame window.
struct RoiCandidate {
  int start_step = 0;           // offset of the first covered frame
  std::vector<int> region_ids;  // one per covered frame
  long long accumulated = 0;    // summed per-step displacements
  bool is_roi = false;
  std::optional<CardinalDirection> direction;  // from the final step

  int last_step() const {
    return start_step + static_cast<int>(region_ids.size()) - 1;
  }
  int last_region() const { return region_ids.back(); }
};

// |mask(b) \ mask(a)|: how much of b is newly uncovered ground relative to a.
long long displacement(const Region& a, const Region& b);

// Greedy association of the closed regions of two consecutive frames by
// descending overlap (ties: smaller displacement, then lower prev id, then
// lower curr id). Pairs require a positive overlap.
RegionMapping map_regions(const RegionSet& prev, const RegionSet& curr,
                          long long delta);

// Chains mappings into per-region lineages over the window and accumulates
// their displacement. A lineage is an ROI when the accumulated displacement
// exceeds roi_threshold. mappings[i] must map frames[i] -> frames[i+1].
std::vector<RoiCandidate> detect_rois(std::span<const RegionSet> frames,
                                      std::span<const RegionMapping> mappings,
                                      long long roi_threshold);

// Direction of travel from the offset between the centroid of the newly
// covered pixels (curr \ prev) and the centroid of curr. Throws when the
// displacement is zero; returns nullopt when the offset is exactly zero.
std::optional<CardinalDirection> estimate_direction(const Region& prev,
                                                    const Region& curr);

}  // namespace depthtrack
