#include "mvplan/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "mvplan/error.hpp"

namespace mvplan {

std::string_view to_string(Action action) {
  switch (action) {
    case Action::kHigh:
      return "high";
    case Action::kMid:
      return "mid";
    case Action::kReuse:
      return "reuse";
  }
  throw std::invalid_argument("unknown action value");
}

std::string_view to_string(SectionType type) {
  switch (type) {
    case SectionType::kIntro:
      return "intro";
    case SectionType::kVerse:
      return "verse";
    case SectionType::kChorus:
      return "chorus";
    case SectionType::kBridge:
      return "bridge";
    case SectionType::kOutro:
      return "outro";
    case SectionType::kOther:
      return "other";
  }
  return "other";
}

SectionType section_type_from_label(std::string_view label) {
  std::string lower(label);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "intro") return SectionType::kIntro;
  if (lower == "verse") return SectionType::kVerse;
  if (lower == "chorus") return SectionType::kChorus;
  if (lower == "bridge") return SectionType::kBridge;
  if (lower == "outro") return SectionType::kOutro;
  return SectionType::kOther;
}

const Segment* SongStructure::find_segment(std::string_view id) const {
  for (const auto& seg : segments) {
    if (seg.id == id) return &seg;
  }
  return nullptr;
}

std::optional<std::size_t> SongStructure::segment_index(std::string_view id) const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].id == id) return i;
  }
  return std::nullopt;
}

double SongStructure::total_duration_s() const {
  double total = 0.0;
  for (const auto& seg : segments) total += seg.duration_s;
  return total;
}

double CostModel::rate(Action action) const {
  switch (action) {
    case Action::kHigh:
      return rate_high_usd_per_s;
    case Action::kMid:
      return rate_mid_usd_per_s;
    case Action::kReuse:
      return 0.0;
  }
  throw std::invalid_argument("unknown action value");
}

double QualityFactors::of(Action action) const {
  switch (action) {
    case Action::kHigh:
      return q_high;
    case Action::kMid:
      return q_mid;
    case Action::kReuse:
      return q_reuse;
  }
  throw std::invalid_argument("unknown action value");
}

double cost(Action action, double duration_s, const CostModel& model) {
  if (!(duration_s >= 0.0)) {
    throw std::invalid_argument("cost: duration must be >= 0");
  }
  return model.rate(action) * duration_s;
}

std::size_t ValidationReport::count(std::string_view code) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(), [&](const Violation& v) { return v.code == code; }));
}

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

class Reporter {
 public:
  void add(std::string code, std::string subject, std::string message) {
    report_.violations.push_back({std::move(code), std::move(subject), std::move(message)});
  }
  ValidationReport take() { return std::move(report_); }

 private:
  ValidationReport report_;
};

void check_segments(const SongStructure& song, Reporter& out) {
  std::unordered_set<std::string> seen;
  const Segment* prev = nullptr;
  for (const auto& seg : song.segments) {
    if (seg.id.empty()) out.add("segment.id", seg.id, "segment id is empty");
    if (!seen.insert(seg.id).second) {
      out.add("segment.duplicate_id", seg.id, "segment id '" + seg.id + "' is not unique");
    }
    if (!(seg.duration_s > 0.0)) {
      out.add("segment.duration", seg.id, "duration " + fmt_num(seg.duration_s) + " s is not positive");
    }
    if (std::abs((seg.end_s - seg.start_s) - seg.duration_s) > kDurationTolerance) {
      out.add("segment.span", seg.id,
              "end - start = " + fmt_num(seg.end_s - seg.start_s) + " s but duration is " +
                  fmt_num(seg.duration_s) + " s");
    }
    if (seg.saliency_raw < kMinSaliency || seg.saliency_raw > kMaxSaliency) {
      out.add("segment.saliency", seg.id,
              "saliency " + std::to_string(seg.saliency_raw) + " outside 1..5");
    }
    if (prev != nullptr && seg.start_s < prev->end_s - kDurationTolerance) {
      out.add("segment.overlap", seg.id, "starts before '" + prev->id + "' ends");
    }
    prev = &seg;
  }
}

void check_groups(const SongStructure& song, Reporter& out) {
  std::unordered_map<std::string, std::string> membership;  // segment -> group
  std::unordered_set<std::string> group_ids;
  for (const auto& g : song.groups) {
    if (!group_ids.insert(g.id).second) {
      out.add("group.duplicate_id", g.id, "group id '" + g.id + "' is not unique");
    }
    const std::size_t n = g.member_segment_ids.size();
    if (n < 1) {
      out.add("group.empty", g.id, "group has no unique-suffix members");
      continue;
    }
    if (g.member_segment_ids.front() != g.owner_segment_id) {
      const bool present = std::find(g.member_segment_ids.begin(), g.member_segment_ids.end(),
                                     g.owner_segment_id) != g.member_segment_ids.end();
      out.add("group.owner", g.id,
              present ? "owner '" + g.owner_segment_id + "' must be listed first"
                      : "owner '" + g.owner_segment_id + "' is not a member");
    }
    if (g.unique_durations_s.size() != n) {
      out.add("group.unique_count", g.id,
              std::to_string(g.unique_durations_s.size()) + " unique durations for " +
                  std::to_string(n) + " members");
    }
    if (g.member_saliencies.size() != n) {
      out.add("group.saliency_count", g.id,
              std::to_string(g.member_saliencies.size()) + " saliencies for " +
                  std::to_string(n) + " members");
    }
    if (!(g.shared_duration_s >= 0.0)) {
      out.add("group.shared_duration", g.id, "shared duration is negative");
    }

    std::optional<std::size_t> owner_pos = song.segment_index(g.owner_segment_id);
    for (std::size_t j = 0; j < n; ++j) {
      const std::string& member = g.member_segment_ids[j];
      auto [it, fresh] = membership.emplace(member, g.id);
      if (!fresh) {
        out.add("group.multiple_membership", member,
                "segment belongs to groups '" + it->second + "' and '" + g.id + "'");
      }
      const Segment* seg = song.find_segment(member);
      if (seg == nullptr) {
        out.add("group.unknown_member", g.id, "member '" + member + "' is not a segment");
        continue;
      }
      if (seg->group_id && *seg->group_id != g.id) {
        out.add("group.member_tag", member,
                "segment is tagged with group '" + *seg->group_id + "' but listed in '" + g.id + "'");
      }
      if (j < g.member_saliencies.size() && g.member_saliencies[j] != seg->saliency_raw) {
        out.add("group.saliency_mismatch", member, "group saliency differs from segment saliency");
      }
      if (j < g.unique_durations_s.size()) {
        const double unique = g.unique_durations_s[j];
        if (!(unique >= 0.0)) {
          out.add("group.unique_duration", member, "unique duration is negative");
        }
        const double used = g.shared_duration_s + unique;
        if (used > seg->duration_s + kDurationTolerance) {
          out.add("group.duration_budget", member,
                  "shared + unique = " + fmt_num(used) + " s exceeds segment duration " +
                      fmt_num(seg->duration_s) + " s");
        }
      }
      if (j > 0 && owner_pos && !g.back_reference) {
        auto pos = song.segment_index(member);
        if (pos && *pos < *owner_pos) {
          out.add("group.order", member,
                  "consumer precedes owner '" + g.owner_segment_id + "' without back_reference");
        }
      }
    }
  }
  for (const auto& seg : song.segments) {
    if (!seg.group_id) continue;
    if (!group_ids.contains(*seg.group_id)) {
      out.add("segment.unknown_group", seg.id, "group '" + *seg.group_id + "' is not defined");
    } else if (!membership.contains(seg.id)) {
      out.add("segment.group_membership", seg.id,
              "tagged with group '" + *seg.group_id + "' but not listed as a member");
    }
  }
}

void check_beat_grid(const BeatGrid& grid, Reporter& out) {
  if (grid.downbeat_flags.size() != grid.beats_s.size()) {
    out.add("beats.flag_count", "", "downbeat flag count differs from beat count");
  }
  for (std::size_t i = 1; i < grid.beats_s.size(); ++i) {
    if (!(grid.beats_s[i] > grid.beats_s[i - 1])) {
      out.add("beats.order", std::to_string(i), "beat times are not strictly ascending");
      break;
    }
  }
  if (!grid.empty() &&
      std::none_of(grid.downbeat_flags.begin(), grid.downbeat_flags.end(), [](bool b) { return b; })) {
    out.add("beats.no_downbeat", "", "non-empty beat grid has no downbeat");
  }
}

bool has_cycle(const std::vector<SharingEdge>& edges) {
  std::map<std::string, std::vector<std::string>> adj;
  std::map<std::string, int> indegree;
  for (const auto& e : edges) {
    adj[e.owner].push_back(e.consumer);
    indegree.try_emplace(e.owner, 0);
    ++indegree[e.consumer];
  }
  std::queue<std::string> ready;
  for (const auto& [node, deg] : indegree) {
    if (deg == 0) ready.push(node);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const std::string node = ready.front();
    ready.pop();
    ++visited;
    for (const auto& next : adj[node]) {
      if (--indegree[next] == 0) ready.push(next);
    }
  }
  return visited != indegree.size();
}

}  // namespace

ValidationReport validate_song(const SongStructure& song) {
  Reporter out;
  check_segments(song, out);
  check_groups(song, out);
  check_beat_grid(song.beat_grid, out);
  return out.take();
}

PersistentState build_persistent_state(const SongStructure& song,
                                       const std::map<std::string, Action>& assignments) {
  for (const auto& [id, action] : assignments) {
    if (song.find_segment(id) == nullptr) {
      throw ValidationError("assignment for unknown segment '" + id + "'");
    }
  }
  for (const auto& seg : song.segments) {
    if (!assignments.contains(seg.id)) {
      throw ValidationError("segment '" + seg.id + "' has no action assignment");
    }
  }

  std::unordered_map<std::string, const SharingGroup*> consumer_of;
  for (const auto& g : song.groups) {
    for (std::size_t j = 1; j < g.member_segment_ids.size(); ++j) {
      consumer_of.emplace(g.member_segment_ids[j], &g);
    }
  }

  PersistentState state;
  state.identity_lib = song.characters;
  state.environment_lib = song.scenes;
  state.action_assignments = assignments;

  // Emit edges in song order so the document is stable.
  for (const auto& seg : song.segments) {
    if (assignments.at(seg.id) != Action::kReuse) continue;
    auto it = consumer_of.find(seg.id);
    if (it == consumer_of.end()) {
      throw ValidationError("segment '" + seg.id +
                            "' is assigned Reuse but is not a consumer in any sharing group");
    }
    const SharingGroup& g = *it->second;
    state.sharing_graph.push_back({g.owner_segment_id, seg.id, g.back_reference});
    state.motif_index.insert("motif/" + g.id);
  }

  ValidationReport report = check_state(state, song);
  if (!report.ok()) {
    const Violation& v = report.violations.front();
    throw ValidationError(v.subject + ": " + v.message);
  }
  return state;
}

ValidationReport check_state(const PersistentState& state, const SongStructure& song) {
  Reporter out;
  for (const auto& seg : song.segments) {
    if (!state.action_assignments.contains(seg.id)) {
      out.add("state.unassigned", seg.id, "segment has no action assignment");
    }
  }
  for (const auto& [id, action] : state.action_assignments) {
    if (song.find_segment(id) == nullptr) {
      out.add("state.unknown_segment", id, "assignment for unknown segment");
    }
  }

  std::set<std::string> has_incoming;
  for (const auto& e : state.sharing_graph) {
    has_incoming.insert(e.consumer);
    auto owner = song.segment_index(e.owner);
    auto consumer = song.segment_index(e.consumer);
    if (!owner || !consumer) {
      out.add("state.edge_endpoint", e.consumer, "edge references unknown segment");
      continue;
    }
    if (*owner >= *consumer && !e.back_reference) {
      out.add("state.edge_order", e.consumer,
              "owner '" + e.owner + "' does not precede consumer and edge is not a back-reference");
    }
  }
  if (has_cycle(state.sharing_graph)) {
    out.add("state.cycle", "", "sharing graph contains a cycle");
  }
  for (const auto& [id, action] : state.action_assignments) {
    if (action == Action::kReuse && !has_incoming.contains(id)) {
      out.add("state.reuse_without_edge", id, "Reuse assignment without an incoming sharing edge");
    }
  }
  return out.take();
}

}  // namespace mvplan
