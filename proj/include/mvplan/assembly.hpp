#pragma once

// Timeline assembly: snaps segment boundaries onto beat anchors and plans
// how each generated clip is trimmed or extended to fill its slot.

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvplan/core_model.hpp"
#include "mvplan/mckp.hpp"

namespace mvplan {

struct SnapOptions {
  double tolerance_s = 0.25;
  bool downbeats_only = false;
  // With downbeats_only off, a downbeat within tolerance beats a closer
  // plain beat.
  bool prefer_downbeats = true;
  // Snapped boundaries must stay strictly inside (lower_bound, upper_bound).
  double lower_bound_s = -std::numeric_limits<double>::infinity();
  double upper_bound_s = std::numeric_limits<double>::infinity();
};

struct TimelineCut {
  std::string segment_id;  // segment that ends at this boundary
  double planned_boundary_s = 0.0;
  double snapped_boundary_s = 0.0;
  std::optional<std::size_t> snapped_to;  // beat index
  bool on_downbeat = false;
  double adjustment_s = 0.0;  // snapped - planned

  bool operator==(const TimelineCut&) const = default;
};

// Moves each boundary to its nearest eligible anchor within tolerance.
// A boundary already sitting on an eligible anchor stays there. When two
// boundaries pick the same anchor the nearer one keeps it (the earlier on
// a tie); if snapping would break strict ordering the boundary that moved
// further is reverted. Throws std::invalid_argument if boundaries are not
// strictly ascending or the tolerance is negative.
std::vector<TimelineCut> snap_boundaries(std::span<const double> boundaries, const BeatGrid& grid,
                                         const SnapOptions& options);

enum class ExtendPolicy { kHold, kLoop };
std::string_view to_string(ExtendPolicy policy);

struct EditPlan {
  enum class Kind { kNone, kTrim, kExtend };
  Kind kind = Kind::kNone;
  double amount_s = 0.0;  // tail trimmed or time added
  ExtendPolicy policy = ExtendPolicy::kHold;
  double clip_len_s = 0.0;
  double target_len_s = 0.0;

  // Length after applying the plan; equals target_len_s by construction.
  double result_len_s() const { return target_len_s; }
};
std::string_view to_string(EditPlan::Kind kind);

inline constexpr double kDefaultMaxStretch = 1.5;

// Trims the tail of long clips and extends short ones (last-frame hold or
// loop). Throws ValidationError if target / clip exceeds max_stretch.
EditPlan trim_extend(double clip_len_s, double target_len_s, ExtendPolicy policy,
                     double max_stretch = kDefaultMaxStretch);

struct AssemblyConfig {
  SnapOptions snap;
  ExtendPolicy extend_policy = ExtendPolicy::kHold;
  double max_stretch = kDefaultMaxStretch;
};

struct TimelineEntry {
  std::string segment_id;
  Action action = Action::kMid;
  double planned_in_s = 0.0;
  double planned_out_s = 0.0;
  double in_s = 0.0;
  double out_s = 0.0;
  bool in_snapped = false;
  bool out_snapped = false;
  std::string transition;  // "cut" onto a beat, otherwise "crossfade"
  EditPlan edit;
};

struct Timeline {
  std::vector<TimelineEntry> entries;
  std::vector<TimelineCut> cuts;  // interior boundaries
  double song_duration_s = 0.0;

  double total_abs_adjustment_s() const;
  double assembled_duration_s() const;
};

// clip_lengths maps segment id to generated clip length in seconds.
// Segments must be contiguous. Throws ValidationError naming the segment
// when a clip or allocation entry is missing.
Timeline assemble_timeline(const SongStructure& song, const AllocationResult& allocation,
                           const std::map<std::string, double>& clip_lengths, const BeatGrid& grid,
                           const AssemblyConfig& config);

}  // namespace mvplan
