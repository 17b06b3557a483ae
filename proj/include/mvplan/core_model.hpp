#pragma once

// Domain types shared by the planner, the metrics and the calibration
// pipelines. Everything here is a plain value type: construct, validate,
// then treat as immutable.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mvplan {

enum class SectionType { kIntro, kVerse, kChorus, kBridge, kOutro, kOther };

// Generation tier for a segment.
enum class Action { kHigh, kMid, kReuse };

std::string_view to_string(Action action);
std::string_view to_string(SectionType type);

// Maps a free-form structure label onto the closed enum; anything not
// recognised becomes kOther.
SectionType section_type_from_label(std::string_view label);

inline constexpr int kMinSaliency = 1;
inline constexpr int kMaxSaliency = 5;

// Saliency is annotated on the integer 1..5 scale; utility and CQR use m/5.
inline double normalized_saliency(int saliency_raw) {
  return static_cast<double>(saliency_raw) / kMaxSaliency;
}

struct Segment {
  std::string id;
  SectionType section_type = SectionType::kOther;
  std::string type_label;  // raw label from the analysis stage
  double start_s = 0.0;
  double end_s = 0.0;
  double duration_s = 0.0;
  int saliency_raw = 1;
  std::optional<std::string> group_id;
  std::optional<std::string> lyric_text;
  std::optional<std::string> assigned_action;  // raw label, e.g. "mid_gen"

  bool operator==(const Segment&) const = default;
};

// A set of segments sharing one generated visual prefix. The owner
// generates the prefix; consumers reuse it and only generate their suffix.
// Index j in the per-member vectors refers to member_segment_ids[j].
struct SharingGroup {
  std::string id;
  std::string owner_segment_id;
  std::vector<std::string> member_segment_ids;  // owner first
  double shared_duration_s = 0.0;
  std::vector<double> unique_durations_s;
  std::vector<int> member_saliencies;
  bool back_reference = false;  // owner may follow consumers in song order

  std::size_t size() const { return member_segment_ids.size(); }
  bool operator==(const SharingGroup&) const = default;
};

struct BeatGrid {
  std::vector<double> beats_s;
  std::vector<bool> downbeat_flags;

  bool empty() const { return beats_s.empty(); }
  bool operator==(const BeatGrid&) const = default;
};

struct SongStructure {
  std::string song_id;
  std::vector<Segment> segments;  // song order
  std::vector<SharingGroup> groups;
  std::map<std::string, std::string> characters;  // character id -> asset ref
  std::map<std::string, std::string> scenes;      // scene id -> asset ref
  BeatGrid beat_grid;

  const Segment* find_segment(std::string_view id) const;
  std::optional<std::size_t> segment_index(std::string_view id) const;
  double total_duration_s() const;

  bool operator==(const SongStructure&) const = default;
};

// Linear per-second pricing. Defaults put a 94 s all-High song at 2.85 USD.
struct CostModel {
  double rate_high_usd_per_s = 2.85 / 94.0;
  double rate_mid_usd_per_s = 0.7 * (2.85 / 94.0);
  double fixed_overhead_usd = 0.0;

  double rate(Action action) const;
  bool operator==(const CostModel&) const = default;
};

// Proxy quality per tier. q_reuse has no calibrated value yet and defaults
// to q_mid.
struct QualityFactors {
  double q_high = 1.0;
  double q_mid = 0.7;
  double q_reuse = 0.7;

  double of(Action action) const;
  bool operator==(const QualityFactors&) const = default;
};

// C(a, d) = rate(a) * d. Reuse is free: the prefix it consumes was paid
// for by the group owner. Throws std::invalid_argument on d < 0.
double cost(Action action, double duration_s, const CostModel& model);

struct Violation {
  std::string code;     // machine-readable, e.g. "segment.duration"
  std::string subject;  // offending segment or group id
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(std::string_view code) const;
  bool operator==(const ValidationReport&) const = default;
};

inline constexpr double kDurationTolerance = 1e-6;

// Checks every structural invariant of a song and its sharing groups.
// Violations are returned as data; the input is never modified.
ValidationReport validate_song(const SongStructure& song);

struct SharingEdge {
  std::string owner;
  std::string consumer;
  bool back_reference = false;

  auto operator<=>(const SharingEdge&) const = default;
};

// The auditable planner output: identity and environment libraries,
// the owner->consumer sharing graph, reusable motif assets and the
// per-segment tier assignment.
struct PersistentState {
  std::map<std::string, std::string> identity_lib;
  std::map<std::string, std::string> environment_lib;
  std::vector<SharingEdge> sharing_graph;
  std::set<std::string> motif_index;
  std::map<std::string, Action> action_assignments;

  bool operator==(const PersistentState&) const = default;
};

// Throws ValidationError when an assignment is missing, unknown, or a
// segment is assigned Reuse without being a consumer in a sharing group.
PersistentState build_persistent_state(const SongStructure& song,
                                       const std::map<std::string, Action>& assignments);

// Invariant check for states that were edited by hand and read back.
ValidationReport check_state(const PersistentState& state, const SongStructure& song);

}  // namespace mvplan
