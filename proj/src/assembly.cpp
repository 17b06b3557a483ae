#include "mvplan/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvplan/error.hpp"

namespace mvplan {

namespace {

constexpr double kExactHit = 1e-9;

struct Candidate {
  std::optional<std::size_t> beat;
  double distance = 0.0;
};

// Nearest beat within tolerance that passes `eligible`; earlier beat on ties.
template <typename Pred>
Candidate nearest_anchor(double t, const BeatGrid& grid, double tolerance, Pred eligible) {
  Candidate best;
  const auto& beats = grid.beats_s;
  auto it = std::lower_bound(beats.begin(), beats.end(), t - tolerance - kExactHit);
  for (; it != beats.end() && *it <= t + tolerance + kExactHit; ++it) {
    const auto idx = static_cast<std::size_t>(it - beats.begin());
    if (!eligible(idx)) continue;
    const double d = std::abs(*it - t);
    if (d > tolerance && d > kExactHit) continue;
    if (!best.beat || d < best.distance) {
      best.beat = idx;
      best.distance = d;
    }
  }
  return best;
}

Candidate choose_anchor(double t, const BeatGrid& grid, const SnapOptions& opt) {
  auto is_down = [&](std::size_t i) { return static_cast<bool>(grid.downbeat_flags[i]); };
  auto any = [](std::size_t) { return true; };
  if (opt.downbeats_only) return nearest_anchor(t, grid, opt.tolerance_s, is_down);

  Candidate exact = nearest_anchor(t, grid, 0.0, any);
  if (exact.beat) return exact;
  if (opt.prefer_downbeats) {
    Candidate down = nearest_anchor(t, grid, opt.tolerance_s, is_down);
    if (down.beat) return down;
  }
  return nearest_anchor(t, grid, opt.tolerance_s, any);
}

}  // namespace

std::vector<TimelineCut> snap_boundaries(std::span<const double> boundaries, const BeatGrid& grid,
                                         const SnapOptions& options) {
  if (!(options.tolerance_s >= 0.0)) throw std::invalid_argument("snap tolerance must be >= 0");
  if (grid.downbeat_flags.size() != grid.beats_s.size()) {
    throw std::invalid_argument("beat grid has mismatched downbeat flags");
  }
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (!(boundaries[i] > boundaries[i - 1])) {
      throw std::invalid_argument("boundaries must be strictly ascending");
    }
  }

  const std::size_t n = boundaries.size();
  std::vector<TimelineCut> cuts(n);
  std::vector<double> distance(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cuts[i].planned_boundary_s = boundaries[i];
    cuts[i].snapped_boundary_s = boundaries[i];
    Candidate c = choose_anchor(boundaries[i], grid, options);
    if (c.beat) {
      const double anchor = grid.beats_s[*c.beat];
      if (anchor > options.lower_bound_s && anchor < options.upper_bound_s) {
        cuts[i].snapped_to = c.beat;
        distance[i] = c.distance;
      }
    }
  }

  // One anchor, one cut: the nearer boundary keeps it.
  for (std::size_t i = 0; i < n; ++i) {
    if (!cuts[i].snapped_to) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (cuts[j].snapped_to != cuts[i].snapped_to) continue;
      if (distance[j] < distance[i]) {
        cuts[i].snapped_to.reset();
        break;
      }
      cuts[j].snapped_to.reset();
    }
  }

  auto position = [&](std::size_t i) {
    return cuts[i].snapped_to ? grid.beats_s[*cuts[i].snapped_to] : cuts[i].planned_boundary_s;
  };

  // Order repair. Planned boundaries are strictly ascending, so reverting
  // snapped cuts always converges.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = i == 0 ? options.lower_bound_s : position(i - 1);
      const double hi = i + 1 == n ? options.upper_bound_s : position(i + 1);
      const double here = position(i);
      if (here > lo && here < hi) continue;
      // Prefer reverting whichever participant moved further.
      std::size_t victim = i;
      if (here <= lo && i > 0 && cuts[i - 1].snapped_to &&
          (!cuts[i].snapped_to || distance[i - 1] > distance[i])) {
        victim = i - 1;
      } else if (here >= hi && i + 1 < n && cuts[i + 1].snapped_to &&
                 (!cuts[i].snapped_to || distance[i + 1] > distance[i])) {
        victim = i + 1;
      }
      if (!cuts[victim].snapped_to) {
        throw std::invalid_argument("boundaries lie outside the snapping bounds");
      }
      cuts[victim].snapped_to.reset();
      changed = true;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    cuts[i].snapped_boundary_s = position(i);
    cuts[i].adjustment_s = cuts[i].snapped_boundary_s - cuts[i].planned_boundary_s;
    cuts[i].on_downbeat = cuts[i].snapped_to && grid.downbeat_flags[*cuts[i].snapped_to];
  }
  return cuts;
}

std::string_view to_string(ExtendPolicy policy) {
  return policy == ExtendPolicy::kHold ? "hold" : "loop";
}

std::string_view to_string(EditPlan::Kind kind) {
  switch (kind) {
    case EditPlan::Kind::kNone:
      return "none";
    case EditPlan::Kind::kTrim:
      return "trim";
    case EditPlan::Kind::kExtend:
      return "extend";
  }
  return "none";
}

EditPlan trim_extend(double clip_len_s, double target_len_s, ExtendPolicy policy, double max_stretch) {
  if (!(clip_len_s > 0.0) || !(target_len_s > 0.0)) {
    throw std::invalid_argument("trim_extend: clip and target lengths must be positive");
  }
  EditPlan plan;
  plan.policy = policy;
  plan.clip_len_s = clip_len_s;
  plan.target_len_s = target_len_s;
  if (clip_len_s > target_len_s) {
    plan.kind = EditPlan::Kind::kTrim;
    plan.amount_s = clip_len_s - target_len_s;
  } else if (clip_len_s < target_len_s) {
    if (target_len_s / clip_len_s > max_stretch) {
      throw ValidationError("trim_extend: extending " + std::to_string(clip_len_s) + " s to " +
                            std::to_string(target_len_s) + " s exceeds the maximum stretch ratio " +
                            std::to_string(max_stretch));
    }
    plan.kind = EditPlan::Kind::kExtend;
    plan.amount_s = target_len_s - clip_len_s;
  }
  return plan;
}

double Timeline::total_abs_adjustment_s() const {
  double sum = 0.0;
  for (const auto& c : cuts) sum += std::abs(c.adjustment_s);
  return sum;
}

double Timeline::assembled_duration_s() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.out_s - e.in_s;
  return sum;
}

Timeline assemble_timeline(const SongStructure& song, const AllocationResult& allocation,
                           const std::map<std::string, double>& clip_lengths, const BeatGrid& grid,
                           const AssemblyConfig& config) {
  Timeline timeline;
  const auto& segs = song.segments;
  if (segs.empty()) return timeline;

  const auto actions = allocation.assignments();
  for (const auto& seg : segs) {
    if (!clip_lengths.contains(seg.id)) {
      throw ValidationError("assemble: no clip entry for segment '" + seg.id + "'");
    }
    if (!actions.contains(seg.id)) {
      throw ValidationError("assemble: allocation has no action for segment '" + seg.id + "'");
    }
  }
  for (std::size_t i = 1; i < segs.size(); ++i) {
    if (std::abs(segs[i].start_s - segs[i - 1].end_s) > kDurationTolerance) {
      throw ValidationError("assemble: segment '" + segs[i].id + "' does not start where '" +
                            segs[i - 1].id + "' ends");
    }
  }

  std::vector<double> boundaries;
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) boundaries.push_back(segs[i].end_s);
  SnapOptions snap = config.snap;
  snap.lower_bound_s = segs.front().start_s;
  snap.upper_bound_s = segs.back().end_s;
  timeline.cuts = snap_boundaries(boundaries, grid, snap);
  for (std::size_t i = 0; i < timeline.cuts.size(); ++i) timeline.cuts[i].segment_id = segs[i].id;

  timeline.song_duration_s = segs.back().end_s - segs.front().start_s;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    TimelineEntry e;
    e.segment_id = segs[i].id;
    e.action = actions.at(segs[i].id);
    e.planned_in_s = segs[i].start_s;
    e.planned_out_s = segs[i].end_s;
    e.in_s = i == 0 ? segs[i].start_s : timeline.cuts[i - 1].snapped_boundary_s;
    e.out_s = i + 1 == segs.size() ? segs[i].end_s : timeline.cuts[i].snapped_boundary_s;
    e.in_snapped = i > 0 && timeline.cuts[i - 1].snapped_to.has_value();
    e.out_snapped = i + 1 < segs.size() && timeline.cuts[i].snapped_to.has_value();
    e.transition = (i == 0 || e.in_snapped) ? "cut" : "crossfade";
    e.edit = trim_extend(clip_lengths.at(segs[i].id), e.out_s - e.in_s, config.extend_policy,
                         config.max_stretch);
    timeline.entries.push_back(std::move(e));
  }
  return timeline;
}

}  // namespace mvplan
