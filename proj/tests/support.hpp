#pragma once

// Shared helpers for the unit and acceptance tests: fixture paths and
// hand-rolled generators for random songs, plan tables and timelines.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mvplan/core_model.hpp"
#include "mvplan/mckp.hpp"
#include "mvplan/rng.hpp"

namespace mvtest {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(MVPLAN_FIXTURE_DIR) / name;
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline double round_to(double v, double step) { return std::round(v / step) * step; }

inline std::string seg_id(std::size_t i) {
  return (i < 9 ? "s0" : "s") + std::to_string(i + 1);
}

// Random contiguous song with up to max_segments segments. Groups take
// 2..max_group ungrouped segments, owner first in song order.
inline mvplan::SongStructure random_song(mvplan::SplitMix64& rng, std::size_t max_segments = 8,
                                         std::size_t max_group = 3, double group_chance = 0.5) {
  mvplan::SongStructure song;
  song.song_id = "random";
  const std::size_t n = 1 + rng.below(max_segments);
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mvplan::Segment s;
    s.id = seg_id(i);
    s.type_label = "verse";
    s.section_type = mvplan::SectionType::kVerse;
    s.start_s = t;
    s.end_s = t + round_to(rng.uniform(1.0, 12.0), 0.1);
    s.duration_s = s.end_s - s.start_s;  // what the song reader recomputes
    t = s.end_s;
    s.saliency_raw = 1 + static_cast<int>(rng.below(5));
    song.segments.push_back(s);
  }

  std::vector<std::size_t> free_idx(n);
  for (std::size_t i = 0; i < n; ++i) free_idx[i] = i;
  std::size_t gcount = 0;
  while (free_idx.size() >= 2 && rng.uniform() < group_chance) {
    const std::size_t cap = std::min(max_group, free_idx.size());
    const std::size_t size = 2 + rng.below(cap - 1);
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < size; ++k) {
      const std::size_t pick = rng.below(free_idx.size());
      members.push_back(free_idx[pick]);
      free_idx.erase(free_idx.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    std::sort(members.begin(), members.end());
    mvplan::SharingGroup g;
    g.id = "g" + std::to_string(++gcount);
    double shortest = 1e9;
    for (std::size_t m : members) shortest = std::min(shortest, song.segments[m].duration_s);
    g.shared_duration_s = round_to(rng.uniform(0.2, 0.9) * shortest, 0.1);
    g.owner_segment_id = song.segments[members.front()].id;
    for (std::size_t m : members) {
      auto& seg = song.segments[m];
      seg.group_id = g.id;
      g.member_segment_ids.push_back(seg.id);
      g.unique_durations_s.push_back(std::max(0.0, seg.duration_s - g.shared_duration_s));
      g.member_saliencies.push_back(seg.saliency_raw);
    }
    song.groups.push_back(g);
  }
  return song;
}

inline double all_high_cost(const mvplan::SongStructure& song, const mvplan::CostModel& cm) {
  double sum = 0.0;
  for (const auto& s : song.segments) sum += mvplan::cost(mvplan::Action::kHigh, s.duration_s, cm);
  return sum;
}

// Synthetic plan table with arbitrary (cost, utility) plans, for solver
// properties that do not need a song behind them.
inline mvplan::PlanTable random_plan_table(mvplan::SplitMix64& rng, std::size_t units,
                                           std::size_t max_plans) {
  mvplan::PlanTable table(units);
  for (std::size_t g = 0; g < units; ++g) {
    const std::size_t p = 1 + rng.below(max_plans);
    for (std::size_t k = 0; k < p; ++k) {
      mvplan::GroupPlan plan;
      plan.group_id = "u" + std::to_string(g);
      plan.solo = true;
      plan.cost_cents = static_cast<mvplan::Cents>(rng.below(40));
      plan.cost_usd = static_cast<double>(plan.cost_cents) / 100.0;
      plan.utility = static_cast<double>(rng.below(1000)) / 8.0;
      plan.suffix_mask = static_cast<std::uint32_t>(k);
      table[g].push_back(plan);
    }
  }
  return table;
}

// Ascending boundaries with gaps of at least min_gap.
inline std::vector<double> random_boundaries(mvplan::SplitMix64& rng, std::size_t count, double min_gap,
                                             double max_gap) {
  std::vector<double> out;
  double t = rng.uniform(0.0, 2.0);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(t);
    t += rng.uniform(min_gap, max_gap);
  }
  return out;
}

inline mvplan::BeatGrid regular_grid(double period_s, double end_s, int beats_per_bar,
                                     double offset_s = 0.0) {
  mvplan::BeatGrid grid;
  int k = 0;
  for (double t = offset_s; t <= end_s + 1e-9; t = offset_s + period_s * ++k) {
    grid.beats_s.push_back(t);
    grid.downbeat_flags.push_back(k % beats_per_bar == 0);
  }
  return grid;
}

}  // namespace mvtest
