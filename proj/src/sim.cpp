#include "mvplan/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mvplan/error.hpp"
#include "mvplan/rng.hpp"

namespace mvplan {

namespace {

double round_ms(double t) { return std::round(t * 1000.0) / 1000.0; }

void check_config(const SyntheticSongConfig& c) {
  auto fail = [](const std::string& what) { throw ValidationError("synthetic song config: " + what); };
  if (!c.seed) fail("seed is required");
  if (c.type_pattern.empty()) {
    if (c.min_segments == 0) fail("min_segments must be >= 1");
    if (c.min_segments > c.max_segments) fail("min_segments exceeds max_segments");
  }
  if (!(c.min_duration_s > 0.0)) fail("min_duration_s must be > 0");
  if (!(c.min_duration_s <= c.max_duration_s) || !std::isfinite(c.max_duration_s)) {
    fail("segment duration range is empty or unbounded");
  }
  if (!(c.min_total_s <= c.max_total_s)) fail("total duration range is empty");
  if (!(c.group_probability >= 0.0 && c.group_probability <= 1.0)) {
    fail("group_probability must lie in [0, 1]");
  }
  if (c.min_group_size < 2) fail("min_group_size must be >= 2");
  if (c.min_group_size > c.max_group_size) fail("min_group_size exceeds max_group_size");
  if (!(c.min_shared_fraction >= 0.0 && c.min_shared_fraction <= c.max_shared_fraction &&
        c.max_shared_fraction <= 1.0)) {
    fail("shared fraction range must lie in [0, 1]");
  }
  if (!(c.bpm > 0.0) || !std::isfinite(c.bpm)) fail("bpm must be positive");
  if (c.beats_per_bar < 1) fail("beats_per_bar must be >= 1");
  double weight_sum = 0.0;
  for (double w : c.saliency_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail("saliency weights must be finite and >= 0");
    weight_sum += w;
  }
  if (!(weight_sum > 0.0)) fail("saliency weights sum to zero");
}

// Segment-count choices whose duration range can meet the total range.
std::vector<std::size_t> feasible_counts(const SyntheticSongConfig& c) {
  std::vector<std::size_t> out;
  auto fits = [&](std::size_t n) {
    const double lo = std::max(c.min_total_s, static_cast<double>(n) * c.min_duration_s);
    const double hi = std::min(c.max_total_s, static_cast<double>(n) * c.max_duration_s);
    return lo <= hi;
  };
  if (!c.type_pattern.empty()) {
    if (fits(c.type_pattern.size())) out.push_back(c.type_pattern.size());
    return out;
  }
  for (std::size_t n = c.min_segments; n <= c.max_segments; ++n) {
    if (fits(n)) out.push_back(n);
  }
  return out;
}

// Fills [min_d, max_d] durations summing to total, proportional to weights
// above the floor, redistributing whatever the cap cuts off.
std::vector<double> split_durations(double total, std::vector<double> weights, double min_d,
                                    double max_d) {
  const std::size_t n = weights.size();
  std::vector<double> d(n, min_d);
  std::vector<bool> capped(n, false);
  double slack = total - min_d * static_cast<double>(n);
  while (slack > 1e-12) {
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!capped[i]) wsum += weights[i];
    }
    if (!(wsum > 0.0)) break;
    double spill = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (capped[i]) continue;
      d[i] += slack * weights[i] / wsum;
      if (d[i] >= max_d) {
        spill += d[i] - max_d;
        d[i] = max_d;
        capped[i] = true;
      }
    }
    slack = spill;
  }
  return d;
}

std::vector<std::string> template_types(std::size_t n) {
  if (n == 1) return {"chorus"};
  if (n == 2) return {"verse", "chorus"};
  std::vector<std::string> types{"intro"};
  const std::size_t middle = n - 2;
  for (std::size_t i = 0; i < middle; ++i) types.push_back(i % 2 == 0 ? "verse" : "chorus");
  // Longer songs get a bridge before the final chorus.
  if (middle >= 7) {
    types[middle - 1] = "bridge";
    types[middle] = "chorus";
  }
  types.push_back("outro");
  return types;
}

int sample_saliency(SplitMix64& rng, const std::array<double, 5>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double r = rng.uniform() * total;
  for (int i = 0; i < 5; ++i) {
    if (weights[i] > 0.0 && r < weights[i]) return i + 1;
    r -= weights[i];
  }
  for (int i = 4; i >= 0; --i) {
    if (weights[i] > 0.0) return i + 1;
  }
  return 1;
}

std::string pad_id(const char* prefix, std::size_t k) {
  std::string digits = std::to_string(k);
  if (digits.size() < 2) digits.insert(0, 2 - digits.size(), '0');
  return prefix + digits;
}

std::uint64_t segment_stream(std::uint64_t noise_seed, const std::string& id) {
  return derive_seed(noise_seed, fnv1a64(id.data(), id.size()));
}

SegmentQuality judge_target(const std::string& id, double target, const JudgeConfig& config,
                            std::uint64_t noise_seed) {
  if (!(config.noise_amplitude >= 0.0)) throw std::invalid_argument("judge noise amplitude must be >= 0");
  SplitMix64 rng(segment_stream(noise_seed, id));
  double sum = 0.0;
  for (int k = 0; k < kJudgeDimensions; ++k) {
    const double noise = config.noise_amplitude == 0.0
                             ? 0.0
                             : config.noise_amplitude * (2.0 * rng.uniform() - 1.0);
    sum += std::clamp(target + noise, 1.0, 5.0);
  }
  return make_quality(id, std::clamp(sum / kJudgeDimensions, 1.0, 5.0), QualityScale::kJudge1To5);
}

double tier_target(Action action, const JudgeConfig& config) {
  return config.high_target * config.quality.of(action) / config.quality.q_high;
}

MetricsSummary summarize(const AllocationResult& allocation, const JudgeConfig& judge,
                         std::uint64_t noise_seed) {
  MetricsSummary s;
  s.ledger = ledger_from_allocation(allocation);
  std::vector<int> saliencies;
  for (const auto& m : allocation.segments()) {
    saliencies.push_back(m.saliency_raw);
    s.qualities.push_back(mock_judge(m, judge, noise_seed));
  }
  s.total_cost_usd = s.ledger.total();
  s.total_utility = allocation.total_utility;
  s.cqr = compute_cqr(saliencies, s.qualities, s.ledger);
  return s;
}

}  // namespace

SyntheticSongConfig pilot_song_config(std::uint64_t seed) {
  SyntheticSongConfig c;
  c.seed = seed;
  c.min_segments = 8;
  c.max_segments = 10;
  c.min_duration_s = 7.0;
  c.max_duration_s = 14.0;
  c.min_total_s = 83.0;
  c.max_total_s = 105.0;
  c.group_probability = 1.0;
  c.min_group_size = 2;
  c.max_group_size = 4;
  c.min_shared_fraction = 0.7;
  c.max_shared_fraction = 0.9;
  c.saliency_weights = {0.5, 1.0, 1.5, 1.5, 1.0};
  return c;
}

SongStructure generate_song(const SyntheticSongConfig& config) {
  check_config(config);
  const auto counts = feasible_counts(config);
  if (counts.empty()) {
    throw ValidationError(
        "synthetic song config: no segment count can meet the total duration range with the "
        "per-segment duration range");
  }
  SplitMix64 rng(*config.seed);
  const std::size_t n = counts[rng.below(counts.size())];
  const double dn = static_cast<double>(n);
  const double t_lo = std::max(config.min_total_s, dn * config.min_duration_s);
  const double t_hi = std::min(config.max_total_s, dn * config.max_duration_s);
  const double total = rng.uniform(t_lo, t_hi);

  std::vector<double> weights(n);
  for (auto& w : weights) w = rng.uniform(0.05, 1.0);
  const auto durations = split_durations(total, weights, config.min_duration_s, config.max_duration_s);
  const auto types = config.type_pattern.empty() ? template_types(n) : config.type_pattern;

  SongStructure song;
  song.song_id = "synthetic-" + std::to_string(*config.seed);
  double cursor = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Segment s;
    s.id = pad_id("s", i + 1);
    s.type_label = types[i];
    s.section_type = section_type_from_label(types[i]);
    s.start_s = round_ms(cursor);
    cursor += durations[i];
    s.end_s = round_ms(cursor);
    s.duration_s = s.end_s - s.start_s;
    s.saliency_raw = sample_saliency(rng, config.saliency_weights);
    song.segments.push_back(std::move(s));
  }

  // Repeated sections of one label become sharing groups, owner first.
  std::vector<std::string> labels;
  for (const auto& t : types) {
    if (std::find(labels.begin(), labels.end(), t) == labels.end()) labels.push_back(t);
  }
  std::size_t group_count = 0;
  for (const auto& label : labels) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (types[i] == label) idx.push_back(i);
    }
    if (idx.size() < config.min_group_size) continue;
    if (!(rng.uniform() < config.group_probability)) continue;
    std::size_t pos = 0;
    while (idx.size() - pos >= config.min_group_size) {
      const std::size_t cap = std::min(config.max_group_size, idx.size() - pos);
      std::size_t size = config.min_group_size + rng.below(cap - config.min_group_size + 1);
      // Do not strand a remainder too small to form its own group.
      const std::size_t rest = idx.size() - pos - size;
      if (rest > 0 && rest < config.min_group_size && size + rest <= config.max_group_size) size += rest;
      SharingGroup g;
      g.id = pad_id("g", ++group_count);
      double shortest = song.segments[idx[pos]].duration_s;
      for (std::size_t k = pos; k < pos + size; ++k) {
        shortest = std::min(shortest, song.segments[idx[k]].duration_s);
      }
      const double fraction = rng.uniform(config.min_shared_fraction, config.max_shared_fraction);
      g.shared_duration_s = std::floor(fraction * shortest * 1000.0) / 1000.0;
      for (std::size_t k = pos; k < pos + size; ++k) {
        Segment& seg = song.segments[idx[k]];
        seg.group_id = g.id;
        g.member_segment_ids.push_back(seg.id);
        g.unique_durations_s.push_back(std::max(0.0, seg.duration_s - g.shared_duration_s));
        g.member_saliencies.push_back(seg.saliency_raw);
      }
      g.owner_segment_id = g.member_segment_ids.front();
      song.groups.push_back(std::move(g));
      pos += size;
    }
  }

  const double beat = 60.0 / config.bpm;
  const double end = song.segments.back().end_s;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * beat;
    if (t > end + 1e-9) break;
    song.beat_grid.beats_s.push_back(t);
    song.beat_grid.downbeat_flags.push_back(k % static_cast<std::size_t>(config.beats_per_bar) == 0);
  }

  song.characters["lead"] = "asset://" + song.song_id + "/character/lead";
  song.scenes["stage"] = "asset://" + song.song_id + "/scene/stage";

  const ValidationReport report = validate_song(song);
  if (!report.ok()) {
    const Violation& v = report.violations.front();
    throw std::logic_error("generated song does not validate: " + v.code + " " + v.subject);
  }
  return song;
}

SegmentQuality mock_judge(const Segment& segment, Action action, const JudgeConfig& config,
                          std::uint64_t noise_seed) {
  return judge_target(segment.id, tier_target(action, config), config, noise_seed);
}

SegmentQuality mock_judge(const MemberAssignment& member, const JudgeConfig& config,
                          std::uint64_t noise_seed) {
  const double span = member.shared_s + member.unique_s;
  double target = tier_target(member.suffix_action, config);
  if (span > 0.0) {
    // A consumer's prefix is the owner's clip, so it carries the owner's tier.
    target = (tier_target(member.shared_action, config) * member.shared_s +
              tier_target(member.suffix_action, config) * member.unique_s) /
             span;
  }
  return judge_target(member.segment_id, target, config, noise_seed);
}

AllocationResult uniform_allocation(const SongStructure& song, Action action, const CostModel& cost_model,
                                    const QualityFactors& quality) {
  if (action == Action::kReuse) throw std::invalid_argument("uniform allocation needs a generating tier");
  AllocationResult r;
  for (const auto& seg : song.segments) {
    auto plans = enumerate_plans(seg, cost_model, quality);
    const std::size_t pick = action == Action::kHigh ? 1 : 0;
    r.total_cost_cents += plans[pick].cost_cents;
    r.total_cost_usd += plans[pick].cost_usd;
    r.total_utility += plans[pick].utility;
    r.selected.push_back(std::move(plans[pick]));
    r.selected_index.push_back(pick);
  }
  r.budget_usd = r.total_cost_usd;
  r.budget_cents = r.total_cost_cents;
  r.b_star = r.total_cost_cents;
  return r;
}

double max_song_cost(const SongStructure& song, const CostModel& cost_model) {
  double total = 0.0;
  for (const auto& seg : song.segments) total += cost(Action::kHigh, seg.duration_s, cost_model);
  return total;
}

EndToEndResult run_end_to_end(const SongStructure& song, const EndToEndConfig& config) {
  EndToEndResult out;
  out.allocation = plan_song(song, config.cost_model, config.quality, config.budget_usd, config.enumeration);
  out.state = build_persistent_state(song, out.allocation.assignments());

  const double g = config.clip_granularity_s;
  if (!(g > 0.0)) throw std::invalid_argument("clip granularity must be positive");
  for (const auto& seg : song.segments) {
    out.clip_lengths[seg.id] = std::ceil(seg.duration_s / g - 1e-9) * g;
  }
  out.timeline = assemble_timeline(song, out.allocation, out.clip_lengths, song.beat_grid, config.assembly);

  out.metrics = summarize(out.allocation, config.judge, config.noise_seed);
  out.uniform_high = summarize(uniform_allocation(song, Action::kHigh, config.cost_model, config.quality),
                               config.judge, config.noise_seed);
  out.uniform_mid = summarize(uniform_allocation(song, Action::kMid, config.cost_model, config.quality),
                              config.judge, config.noise_seed);
  return out;
}

}  // namespace mvplan
