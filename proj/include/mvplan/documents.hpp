#pragma once

// JSON documents emitted and ingested by the command-line tool. Field
// names are listed in docs/formats.md.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "mvplan/assembly.hpp"
#include "mvplan/calibration.hpp"
#include "mvplan/core_model.hpp"
#include "mvplan/io.hpp"
#include "mvplan/mckp.hpp"
#include "mvplan/sim.hpp"

namespace mvplan {

struct PlannerConfig {
  double budget_usd = 0.6 * 2.85;
  CostModel cost_model;
  QualityFactors quality;
  SnapOptions snap;
  ExtendPolicy extend_policy = ExtendPolicy::kHold;
  double max_stretch = kDefaultMaxStretch;
  std::size_t max_group_members = 10;
  std::uint64_t seed = 0;        // bootstrap and synthetic songs
  std::uint64_t noise_seed = 0;  // mock judge
  double judge_noise = 0.0;
  std::size_t bootstrap_iterations = 10000;
  double rho0 = kTargetQualityRatio;
  std::size_t min_raters = 2;
  // Optional input paths, resolved against the config file's directory.
  std::map<std::string, std::filesystem::path> files;

  bool operator==(const PlannerConfig&) const = default;
};

// Missing keys keep their defaults; unknown keys are a ParseError.
// Throws ValidationError on out-of-range values and ParseError when a
// listed file does not exist.
PlannerConfig planner_config_from_json(const io::json& doc, const std::string& source,
                                       const std::filesystem::path& base_dir = {});
PlannerConfig read_planner_config(const std::filesystem::path& path);
io::json planner_config_to_json(const PlannerConfig& config);

// FNV-1a over the compact canonical config serialisation, as 16 hex digits.
std::string config_hash(const PlannerConfig& config);

io::json allocation_to_json(const std::string& song_id, const AllocationResult& result,
                            const PlannerConfig& config);
// Reconstructs the allocation written by allocation_to_json.
AllocationResult allocation_from_json(const io::json& doc, const std::string& source);

io::json state_to_json(const PersistentState& state);
PersistentState state_from_json(const io::json& doc, const std::string& source);

io::json timeline_to_json(const Timeline& timeline);

// clips.json: {"clips": [{"segment_id": ..., "length_s": ...}]}
std::map<std::string, double> clips_from_json(const io::json& doc, const std::string& source);
io::json clips_to_json(const std::map<std::string, double>& clips);

io::json metrics_to_json(const MetricsSummary& metrics, const std::vector<int>& saliencies_raw);

io::json consistency_to_json(const ConsistencyReport& report);
io::json calibration_to_json(const CalibrationReport& report);

io::json end_to_end_to_json(const SongStructure& song, const EndToEndResult& result);

}  // namespace mvplan
