#pragma once

// Synthetic songs and mock generation backends for desk-scale runs.

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvplan/assembly.hpp"
#include "mvplan/core_model.hpp"
#include "mvplan/mckp.hpp"
#include "mvplan/metrics.hpp"

namespace mvplan {

struct SyntheticSongConfig {
  std::optional<std::uint64_t> seed;  // required
  std::size_t min_segments = 6;
  std::size_t max_segments = 10;
  double min_duration_s = 5.0;
  double max_duration_s = 20.0;
  double min_total_s = 0.0;
  double max_total_s = std::numeric_limits<double>::infinity();
  // Chance that the repeated sections of one type form sharing groups.
  double group_probability = 0.5;
  std::size_t min_group_size = 2;
  std::size_t max_group_size = 3;
  // Shared prefix as a fraction of the shortest member.
  double min_shared_fraction = 0.3;
  double max_shared_fraction = 0.7;
  double bpm = 120.0;
  int beats_per_bar = 4;
  std::array<double, 5> saliency_weights{1.0, 1.0, 1.0, 1.0, 1.0};  // for 1..5
  // Explicit section type sequence; when empty the usual
  // intro / verse / chorus / bridge / outro template is used.
  std::vector<std::string> type_pattern;
};

// Songs shaped like the pilot corpus: 94 +- 11 s, repeated choruses and
// verses that share prefixes.
SyntheticSongConfig pilot_song_config(std::uint64_t seed);

// Throws ValidationError when the ranges cannot be satisfied or no seed
// is set. The result validates and carries a beat grid.
SongStructure generate_song(const SyntheticSongConfig& config);

struct JudgeConfig {
  double high_target = 4.5;       // noise-free score of a High segment
  double noise_amplitude = 0.0;   // per-dimension uniform noise in [-a, a]
  QualityFactors quality;
};

inline constexpr int kJudgeDimensions = 4;

// Mean of four per-dimension scores, each the tier target
// high_target * Q(action) / Q(High) plus seeded noise, clamped to [1, 5].
SegmentQuality mock_judge(const Segment& segment, Action action, const JudgeConfig& config,
                          std::uint64_t noise_seed);

// Same, for a segment realised with a shared prefix and a suffix on
// possibly different tiers: the target is the duration-weighted mix.
SegmentQuality mock_judge(const MemberAssignment& member, const JudgeConfig& config,
                          std::uint64_t noise_seed);

struct EndToEndConfig {
  CostModel cost_model;
  QualityFactors quality;
  double budget_usd = 0.6 * 2.85;
  JudgeConfig judge;
  std::uint64_t noise_seed = 0;
  AssemblyConfig assembly;
  double clip_granularity_s = 0.5;  // mock backend rounds clip lengths up to this
  EnumerationOptions enumeration;
};

struct MetricsSummary {
  double cqr = 0.0;
  double total_cost_usd = 0.0;
  double total_utility = 0.0;
  std::vector<SegmentQuality> qualities;
  CostLedger ledger;
};

struct EndToEndResult {
  AllocationResult allocation;
  PersistentState state;
  Timeline timeline;
  std::map<std::string, double> clip_lengths;
  MetricsSummary metrics;
  // Baselines generate every segment independently on one tier.
  MetricsSummary uniform_high;
  MetricsSummary uniform_mid;
};

// Every segment independently on `action`, no sharing.
AllocationResult uniform_allocation(const SongStructure& song, Action action, const CostModel& cost_model,
                                    const QualityFactors& quality);

// All-High cost without sharing: the song's maximum spend.
double max_song_cost(const SongStructure& song, const CostModel& cost_model);

// Plan, build the persistent state, judge, assemble and score one song.
// Propagates InfeasibleError when the budget cannot be met.
EndToEndResult run_end_to_end(const SongStructure& song, const EndToEndConfig& config);

}  // namespace mvplan
