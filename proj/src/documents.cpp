#include "mvplan/documents.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "mvplan/error.hpp"
#include "mvplan/rng.hpp"

namespace mvplan {

using io::json;

namespace {

Action action_field(const json& obj, const char* key, const std::string& source,
                    const std::string& pointer) {
  const json& v = io::require(obj, key, source, pointer);
  if (!v.is_string()) io::schema_error(source, pointer + "/" + key, "expected an action label");
  auto a = io::parse_action_label(v.get<std::string>());
  if (!a) io::schema_error(source, pointer + "/" + key, "unknown action '" + v.get<std::string>() + "'");
  return *a;
}

double number_field(const json& obj, const char* key, const std::string& source,
                    const std::string& pointer) {
  return io::as_number(io::require(obj, key, source, pointer), source, pointer + "/" + key);
}

bool bool_field(const json& obj, const char* key, const std::string& source, const std::string& pointer) {
  const json& v = io::require(obj, key, source, pointer);
  if (!v.is_boolean()) io::schema_error(source, pointer + "/" + key, "expected a boolean");
  return v.get<bool>();
}

std::string string_field(const json& obj, const char* key, const std::string& source,
                         const std::string& pointer) {
  return io::as_id(io::require(obj, key, source, pointer), source, pointer + "/" + key);
}

std::uint64_t uint_field(const json& v, const std::string& source, const std::string& pointer) {
  if (!v.is_number_unsigned()) io::schema_error(source, pointer, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

Cents cents_field(const json& obj, const char* key, const std::string& source, const std::string& pointer) {
  const json& v = io::require(obj, key, source, pointer);
  if (!v.is_number_integer()) io::schema_error(source, pointer + "/" + key, "expected integer cents");
  return v.get<Cents>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& source,
                    const std::string& pointer) {
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) io::schema_error(source, pointer + "/" + key, "unknown field");
  }
}

std::string action_name(Action a) { return std::string(to_string(a)); }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json t_test_to_json(const stats::TTestResult& t) {
  json j = json::object();
  // JSON has no infinities; a degenerate t is written as null.
  j["t"] = std::isfinite(t.t) ? json(t.t) : json(nullptr);
  j["df"] = t.df;
  j["p_two_sided"] = t.p_two_sided;
  j["degenerate"] = t.degenerate;
  return j;
}

json exclusions_to_json(const std::vector<Exclusion>& excluded) {
  json arr = json::array();
  for (const auto& e : excluded) arr.push_back({{"section_id", e.section_id}, {"reason", e.reason}});
  return arr;
}

json member_to_json(const MemberAssignment& m) {
  json j = json::object();
  j["segment_id"] = m.segment_id;
  j["role"] = std::string(to_string(m.role));
  j["saliency"] = m.saliency_raw;
  j["shared_s"] = m.shared_s;
  j["unique_s"] = m.unique_s;
  j["shared_action"] = action_name(m.shared_action);
  j["suffix_action"] = action_name(m.suffix_action);
  j["action"] = action_name(m.action);
  j["cost_usd"] = m.cost_usd;
  j["utility"] = m.utility;
  return j;
}

MemberRole role_from_string(const std::string& s, const std::string& source, const std::string& pointer) {
  if (s == "solo") return MemberRole::kSolo;
  if (s == "owner") return MemberRole::kOwner;
  if (s == "consumer") return MemberRole::kConsumer;
  io::schema_error(source, pointer, "unknown role '" + s + "'");
}

}  // namespace

PlannerConfig planner_config_from_json(const json& doc, const std::string& source,
                                       const std::filesystem::path& base_dir) {
  if (!doc.is_object()) io::schema_error(source, "", "expected an object");
  reject_unknown(doc,
                 {"budget_usd", "cost_model", "quality", "assembly", "max_group_members", "seed",
                  "noise_seed", "judge_noise", "bootstrap_iterations", "rho0", "min_raters", "files"},
                 source, "");
  PlannerConfig c;
  auto num = [&](const json& obj, const char* key, double& out, const std::string& ptr) {
    if (auto it = obj.find(key); it != obj.end()) out = io::as_number(*it, source, ptr + "/" + key);
  };
  auto count = [&](const json& obj, const char* key, std::size_t& out) {
    if (auto it = obj.find(key); it != obj.end()) {
      out = static_cast<std::size_t>(uint_field(*it, source, std::string("/") + key));
    }
  };
  num(doc, "budget_usd", c.budget_usd, "");
  if (auto it = doc.find("cost_model"); it != doc.end()) {
    reject_unknown(*it, {"rate_high_usd_per_s", "rate_mid_usd_per_s", "fixed_overhead_usd"}, source,
                   "/cost_model");
    num(*it, "rate_high_usd_per_s", c.cost_model.rate_high_usd_per_s, "/cost_model");
    num(*it, "rate_mid_usd_per_s", c.cost_model.rate_mid_usd_per_s, "/cost_model");
    num(*it, "fixed_overhead_usd", c.cost_model.fixed_overhead_usd, "/cost_model");
  }
  if (auto it = doc.find("quality"); it != doc.end()) {
    reject_unknown(*it, {"q_high", "q_mid", "q_reuse"}, source, "/quality");
    num(*it, "q_high", c.quality.q_high, "/quality");
    num(*it, "q_mid", c.quality.q_mid, "/quality");
    num(*it, "q_reuse", c.quality.q_reuse, "/quality");
  }
  if (auto it = doc.find("assembly"); it != doc.end()) {
    reject_unknown(*it,
                   {"snap_tolerance_s", "downbeats_only", "prefer_downbeats", "extend_policy", "max_stretch"},
                   source, "/assembly");
    num(*it, "snap_tolerance_s", c.snap.tolerance_s, "/assembly");
    num(*it, "max_stretch", c.max_stretch, "/assembly");
    if (it->contains("downbeats_only")) c.snap.downbeats_only = bool_field(*it, "downbeats_only", source, "/assembly");
    if (it->contains("prefer_downbeats")) {
      c.snap.prefer_downbeats = bool_field(*it, "prefer_downbeats", source, "/assembly");
    }
    if (it->contains("extend_policy")) {
      const std::string p = string_field(*it, "extend_policy", source, "/assembly");
      if (p == "hold") {
        c.extend_policy = ExtendPolicy::kHold;
      } else if (p == "loop") {
        c.extend_policy = ExtendPolicy::kLoop;
      } else {
        io::schema_error(source, "/assembly/extend_policy", "expected 'hold' or 'loop'");
      }
    }
  }
  count(doc, "max_group_members", c.max_group_members);
  if (auto it = doc.find("seed"); it != doc.end()) c.seed = uint_field(*it, source, "/seed");
  if (auto it = doc.find("noise_seed"); it != doc.end()) c.noise_seed = uint_field(*it, source, "/noise_seed");
  num(doc, "judge_noise", c.judge_noise, "");
  count(doc, "bootstrap_iterations", c.bootstrap_iterations);
  num(doc, "rho0", c.rho0, "");
  count(doc, "min_raters", c.min_raters);
  if (auto it = doc.find("files"); it != doc.end()) {
    for (const auto& [name, path] : io::string_map(*it, source, "/files")) {
      std::filesystem::path p(path);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      if (!std::filesystem::exists(p)) {
        throw ParseError(source, "/files/" + name + ": file '" + p.string() + "' does not exist");
      }
      c.files.emplace(name, p);
    }
  }

  auto invalid = [&](const std::string& what) { throw ValidationError(source + ": " + what); };
  if (!(c.budget_usd > 0.0) || !std::isfinite(c.budget_usd)) invalid("budget_usd must be positive");
  if (!(c.cost_model.rate_high_usd_per_s > 0.0) || !(c.cost_model.rate_mid_usd_per_s > 0.0)) {
    invalid("cost rates must be positive");
  }
  if (!(c.cost_model.fixed_overhead_usd >= 0.0)) invalid("fixed_overhead_usd must be >= 0");
  if (!(c.quality.q_high > 0.0) || !(c.quality.q_mid > 0.0) || !(c.quality.q_reuse > 0.0)) {
    invalid("quality factors must be positive");
  }
  if (!(c.snap.tolerance_s >= 0.0)) invalid("snap_tolerance_s must be >= 0");
  if (!(c.max_stretch >= 1.0)) invalid("max_stretch must be >= 1");
  if (c.max_group_members < 1 || c.max_group_members > 20) invalid("max_group_members must lie in 1..20");
  if (!(c.judge_noise >= 0.0)) invalid("judge_noise must be >= 0");
  if (c.bootstrap_iterations < 1000) invalid("bootstrap_iterations must be >= 1000");
  if (!(c.rho0 > 0.0)) invalid("rho0 must be positive");
  if (c.min_raters < 1) invalid("min_raters must be >= 1");
  return c;
}

PlannerConfig read_planner_config(const std::filesystem::path& path) {
  return planner_config_from_json(io::read_json_file(path), path.string(), path.parent_path());
}

json planner_config_to_json(const PlannerConfig& c) {
  json doc = json::object();
  doc["budget_usd"] = c.budget_usd;
  doc["cost_model"] = {{"rate_high_usd_per_s", c.cost_model.rate_high_usd_per_s},
                       {"rate_mid_usd_per_s", c.cost_model.rate_mid_usd_per_s},
                       {"fixed_overhead_usd", c.cost_model.fixed_overhead_usd}};
  doc["quality"] = {{"q_high", c.quality.q_high}, {"q_mid", c.quality.q_mid}, {"q_reuse", c.quality.q_reuse}};
  doc["assembly"] = {{"snap_tolerance_s", c.snap.tolerance_s},
                     {"downbeats_only", c.snap.downbeats_only},
                     {"prefer_downbeats", c.snap.prefer_downbeats},
                     {"extend_policy", std::string(to_string(c.extend_policy))},
                     {"max_stretch", c.max_stretch}};
  doc["max_group_members"] = c.max_group_members;
  doc["seed"] = c.seed;
  doc["noise_seed"] = c.noise_seed;
  doc["judge_noise"] = c.judge_noise;
  doc["bootstrap_iterations"] = c.bootstrap_iterations;
  doc["rho0"] = c.rho0;
  doc["min_raters"] = c.min_raters;
  if (!c.files.empty()) {
    json files = json::object();
    for (const auto& [name, path] : c.files) files[name] = path.string();
    doc["files"] = std::move(files);
  }
  return doc;
}

std::string config_hash(const PlannerConfig& config) {
  // File locations do not change the plan, so they stay out of the hash.
  json doc = planner_config_to_json(config);
  doc.erase("files");
  const std::string text = doc.dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(text.data(), text.size())));
  return buf;
}

json allocation_to_json(const std::string& song_id, const AllocationResult& r, const PlannerConfig& config) {
  json doc = json::object();
  doc["song_id"] = song_id;
  doc["budget_usd"] = r.budget_usd;
  doc["budget_cents"] = r.budget_cents;
  doc["b_star_cents"] = r.b_star;
  doc["total_cost_usd"] = r.total_cost_usd;
  doc["total_cost_cents"] = r.total_cost_cents;
  doc["total_utility"] = r.total_utility;
  json actions = json::object();
  for (const auto& m : r.segments()) actions[m.segment_id] = action_name(m.action);
  doc["actions"] = std::move(actions);
  json plans = json::array();
  for (std::size_t u = 0; u < r.selected.size(); ++u) {
    const GroupPlan& p = r.selected[u];
    json j = json::object();
    j["unit"] = p.group_id;
    j["solo"] = p.solo;
    j["plan_index"] = u < r.selected_index.size() ? r.selected_index[u] : 0;
    j["shared_action"] = action_name(p.shared_action);
    j["suffix_mask"] = p.suffix_mask;
    j["cost_usd"] = p.cost_usd;
    j["cost_cents"] = p.cost_cents;
    j["utility"] = p.utility;
    json members = json::array();
    for (const auto& m : p.members) members.push_back(member_to_json(m));
    j["members"] = std::move(members);
    plans.push_back(std::move(j));
  }
  doc["plans"] = std::move(plans);
  doc["provenance"] = {{"config_hash", config_hash(config)}, {"solver_version", kSolverVersion}};
  return doc;
}

AllocationResult allocation_from_json(const json& doc, const std::string& source) {
  AllocationResult r;
  r.budget_usd = number_field(doc, "budget_usd", source, "");
  r.budget_cents = cents_field(doc, "budget_cents", source, "");
  r.b_star = cents_field(doc, "b_star_cents", source, "");
  r.total_cost_usd = number_field(doc, "total_cost_usd", source, "");
  r.total_cost_cents = cents_field(doc, "total_cost_cents", source, "");
  r.total_utility = number_field(doc, "total_utility", source, "");
  const json& plans = io::require(doc, "plans", source, "");
  if (!plans.is_array()) io::schema_error(source, "/plans", "expected an array");
  for (std::size_t u = 0; u < plans.size(); ++u) {
    const std::string ptr = "/plans/" + std::to_string(u);
    const json& j = plans[u];
    GroupPlan p;
    p.group_id = string_field(j, "unit", source, ptr);
    p.solo = bool_field(j, "solo", source, ptr);
    p.shared_action = action_field(j, "shared_action", source, ptr);
    p.suffix_mask = static_cast<std::uint32_t>(uint_field(io::require(j, "suffix_mask", source, ptr), source,
                                                          ptr + "/suffix_mask"));
    p.cost_usd = number_field(j, "cost_usd", source, ptr);
    p.cost_cents = cents_field(j, "cost_cents", source, ptr);
    p.utility = number_field(j, "utility", source, ptr);
    const json& members = io::require(j, "members", source, ptr);
    if (!members.is_array()) io::schema_error(source, ptr + "/members", "expected an array");
    for (std::size_t k = 0; k < members.size(); ++k) {
      const std::string mp = ptr + "/members/" + std::to_string(k);
      const json& mj = members[k];
      MemberAssignment m;
      m.segment_id = string_field(mj, "segment_id", source, mp);
      m.role = role_from_string(string_field(mj, "role", source, mp), source, mp + "/role");
      m.saliency_raw = io::as_int(io::require(mj, "saliency", source, mp), source, mp + "/saliency");
      m.shared_s = number_field(mj, "shared_s", source, mp);
      m.unique_s = number_field(mj, "unique_s", source, mp);
      m.shared_action = action_field(mj, "shared_action", source, mp);
      m.suffix_action = action_field(mj, "suffix_action", source, mp);
      m.action = action_field(mj, "action", source, mp);
      m.cost_usd = number_field(mj, "cost_usd", source, mp);
      m.utility = number_field(mj, "utility", source, mp);
      p.members.push_back(std::move(m));
    }
    r.selected_index.push_back(
        static_cast<std::size_t>(uint_field(io::require(j, "plan_index", source, ptr), source, ptr + "/plan_index")));
    r.selected.push_back(std::move(p));
  }
  return r;
}

json state_to_json(const PersistentState& s) {
  json doc = json::object();
  doc["identity_lib"] = s.identity_lib;
  doc["environment_lib"] = s.environment_lib;
  json edges = json::array();
  for (const auto& e : s.sharing_graph) {
    edges.push_back({{"owner", e.owner}, {"consumer", e.consumer}, {"back_reference", e.back_reference}});
  }
  doc["sharing_graph"] = std::move(edges);
  doc["motif_index"] = s.motif_index;
  json actions = json::object();
  for (const auto& [id, a] : s.action_assignments) actions[id] = action_name(a);
  doc["action_assignments"] = std::move(actions);
  return doc;
}

PersistentState state_from_json(const json& doc, const std::string& source) {
  PersistentState s;
  s.identity_lib = io::string_map(io::require(doc, "identity_lib", source, ""), source, "/identity_lib");
  s.environment_lib =
      io::string_map(io::require(doc, "environment_lib", source, ""), source, "/environment_lib");
  const json& edges = io::require(doc, "sharing_graph", source, "");
  if (!edges.is_array()) io::schema_error(source, "/sharing_graph", "expected an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string ptr = "/sharing_graph/" + std::to_string(i);
    SharingEdge e;
    e.owner = string_field(edges[i], "owner", source, ptr);
    e.consumer = string_field(edges[i], "consumer", source, ptr);
    if (edges[i].contains("back_reference")) e.back_reference = bool_field(edges[i], "back_reference", source, ptr);
    s.sharing_graph.push_back(std::move(e));
  }
  const json& motifs = io::require(doc, "motif_index", source, "");
  if (!motifs.is_array()) io::schema_error(source, "/motif_index", "expected an array");
  for (std::size_t i = 0; i < motifs.size(); ++i) {
    s.motif_index.insert(io::as_id(motifs[i], source, "/motif_index/" + std::to_string(i)));
  }
  const json& actions = io::require(doc, "action_assignments", source, "");
  if (!actions.is_object()) io::schema_error(source, "/action_assignments", "expected an object");
  for (const auto& [id, v] : actions.items()) {
    const std::string ptr = "/action_assignments/" + id;
    if (!v.is_string()) io::schema_error(source, ptr, "expected an action label");
    auto a = io::parse_action_label(v.get<std::string>());
    if (!a) io::schema_error(source, ptr, "unknown action '" + v.get<std::string>() + "'");
    s.action_assignments.emplace(id, *a);
  }
  return s;
}

json timeline_to_json(const Timeline& t) {
  json doc = json::object();
  doc["song_duration_s"] = t.song_duration_s;
  doc["assembled_duration_s"] = t.assembled_duration_s();
  doc["total_abs_adjustment_s"] = t.total_abs_adjustment_s();
  json entries = json::array();
  for (const auto& e : t.entries) {
    json j = json::object();
    j["segment_id"] = e.segment_id;
    j["action"] = action_name(e.action);
    j["planned_in_s"] = e.planned_in_s;
    j["planned_out_s"] = e.planned_out_s;
    j["in_s"] = e.in_s;
    j["out_s"] = e.out_s;
    j["in_snapped"] = e.in_snapped;
    j["out_snapped"] = e.out_snapped;
    j["transition"] = e.transition;
    j["edit"] = {{"kind", std::string(to_string(e.edit.kind))},
                 {"amount_s", e.edit.amount_s},
                 {"policy", std::string(to_string(e.edit.policy))},
                 {"clip_len_s", e.edit.clip_len_s},
                 {"target_len_s", e.edit.target_len_s}};
    entries.push_back(std::move(j));
  }
  doc["entries"] = std::move(entries);
  json cuts = json::array();
  for (const auto& c : t.cuts) {
    json j = json::object();
    j["segment_id"] = c.segment_id;
    j["planned_s"] = c.planned_boundary_s;
    j["snapped_s"] = c.snapped_boundary_s;
    j["beat_index"] = c.snapped_to ? json(*c.snapped_to) : json(nullptr);
    j["on_downbeat"] = c.on_downbeat;
    j["adjustment_s"] = c.adjustment_s;
    cuts.push_back(std::move(j));
  }
  doc["cuts"] = std::move(cuts);
  return doc;
}

std::map<std::string, double> clips_from_json(const json& doc, const std::string& source) {
  const json& clips = io::require(doc, "clips", source, "");
  if (!clips.is_array()) io::schema_error(source, "/clips", "expected an array");
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const std::string ptr = "/clips/" + std::to_string(i);
    const std::string id = string_field(clips[i], "segment_id", source, ptr);
    const double len = number_field(clips[i], "length_s", source, ptr);
    if (!(len > 0.0)) io::schema_error(source, ptr + "/length_s", "clip length must be positive");
    if (!out.emplace(id, len).second) io::schema_error(source, ptr, "duplicate clip for '" + id + "'");
  }
  return out;
}

json clips_to_json(const std::map<std::string, double>& clips) {
  json arr = json::array();
  for (const auto& [id, len] : clips) arr.push_back({{"segment_id", id}, {"length_s", len}});
  return {{"clips", std::move(arr)}};
}

json metrics_to_json(const MetricsSummary& m, const std::vector<int>& saliencies_raw) {
  json doc = json::object();
  doc["cqr"] = m.cqr;
  doc["total_cost_usd"] = m.total_cost_usd;
  doc["total_utility"] = m.total_utility;
  json segs = json::array();
  for (std::size_t i = 0; i < m.ledger.entries.size(); ++i) {
    json j = json::object();
    j["segment_id"] = m.ledger.entries[i].segment_id;
    if (i < saliencies_raw.size()) j["saliency"] = saliencies_raw[i];
    if (i < m.qualities.size()) {
      j["quality"] = m.qualities[i].value;
      j["scale"] = std::string(to_string(m.qualities[i].scale));
    }
    j["cost_usd"] = m.ledger.entries[i].cost_usd;
    segs.push_back(std::move(j));
  }
  doc["segments"] = std::move(segs);
  return doc;
}

json consistency_to_json(const ConsistencyReport& r) {
  json doc = json::object();
  doc["n"] = r.n;
  doc["min_raters"] = r.min_raters;
  doc["llm"] = {{"mean", r.llm_mean}, {"sd", r.llm_sd}};
  doc["human"] = {{"mean", r.human_mean}, {"sd", r.human_sd}};
  doc["paired_t"] = t_test_to_json(r.t_test);
  doc["cohens_d"] = optional_number(r.cohens_d);
  doc["wilcoxon"] = {{"w", r.wilcoxon.w},
                     {"w_plus", r.wilcoxon.w_plus},
                     {"w_minus", r.wilcoxon.w_minus},
                     {"n_used", r.wilcoxon.n_used},
                     {"p_two_sided", r.wilcoxon.p_two_sided},
                     {"exact", r.wilcoxon.exact},
                     {"degenerate", r.wilcoxon.degenerate}};
  doc["pearson_r"] = optional_number(r.pearson_r);
  doc["spearman_rho"] = optional_number(r.spearman_rho);
  doc["mae"] = r.mae;
  doc["large_discrepancies"] = r.large_discrepancies;
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"section_id", p.section_id},
                     {"llm_score", p.llm_score},
                     {"human_mean", p.human_mean},
                     {"human_sd", p.human_sd},
                     {"n_ratings", p.n_ratings},
                     {"delta", p.delta}});
  }
  doc["pairs"] = std::move(pairs);
  doc["excluded"] = exclusions_to_json(r.excluded);
  doc["notes"] = r.notes;
  return doc;
}

json calibration_to_json(const CalibrationReport& r) {
  json doc = json::object();
  doc["n_high"] = r.n_high;
  doc["n_mid"] = r.n_mid;
  doc["q_high_mean"] = r.q_high_mean;
  doc["q_mid_mean"] = r.q_mid_mean;
  doc["rho"] = r.rho;
  doc["rho0"] = r.rho0;
  doc["relative_deviation"] = r.relative_deviation;
  doc["log_t"] = r.log_t ? t_test_to_json(*r.log_t) : json(nullptr);
  doc["log_t_dropped"] = r.log_t_dropped;
  if (!r.log_t_note.empty()) doc["log_t_note"] = r.log_t_note;
  doc["bootstrap"] = {{"ratio", r.bootstrap.ratio},
                      {"ci_low", r.bootstrap.ci_low},
                      {"ci_high", r.bootstrap.ci_high},
                      {"p_boot", r.bootstrap.p_boot},
                      {"replicates", r.bootstrap.replicates},
                      {"discarded", r.bootstrap.discarded}};
  doc["rho0_in_ci"] = r.bootstrap.ci_low <= r.rho0 && r.rho0 <= r.bootstrap.ci_high;
  doc["degenerate"] = r.degenerate;
  doc["metrics"] = r.metrics;
  doc["degenerate_metrics"] = r.degenerate_metrics;
  if (!r.normalization_scope.empty()) doc["normalization_scope"] = r.normalization_scope;
  json sections = json::array();
  for (const auto& s : r.sections) {
    sections.push_back({{"section_id", s.section_id},
                        {"type", s.type_label},
                        {"action", s.action},
                        {"action_raw", s.action_raw},
                        {"q", s.q}});
  }
  doc["sections"] = std::move(sections);
  doc["excluded"] = exclusions_to_json(r.excluded);
  return doc;
}

json end_to_end_to_json(const SongStructure& song, const EndToEndResult& r) {
  json doc = json::object();
  doc["song_id"] = song.song_id;
  doc["duration_s"] = song.total_duration_s();
  doc["segments"] = song.segments.size();
  doc["groups"] = song.groups.size();
  doc["budget_usd"] = r.allocation.budget_usd;
  doc["total_cost_usd"] = r.allocation.total_cost_usd;
  doc["total_utility"] = r.allocation.total_utility;
  std::map<std::string, int> tiers{{"high", 0}, {"mid", 0}, {"reuse", 0}};
  for (const auto& [id, a] : r.allocation.assignments()) ++tiers[action_name(a)];
  doc["tiers"] = tiers;
  doc["cqr"] = r.metrics.cqr;
  doc["uniform_high_cqr"] = r.uniform_high.cqr;
  doc["uniform_high_cost_usd"] = r.uniform_high.total_cost_usd;
  doc["uniform_mid_cqr"] = r.uniform_mid.cqr;
  doc["uniform_mid_cost_usd"] = r.uniform_mid.total_cost_usd;
  doc["timeline_abs_adjustment_s"] = r.timeline.total_abs_adjustment_s();
  return doc;
}

}  // namespace mvplan
