#pragma once

// The two calibration pipelines:
//  * saliency consistency: LLM saliency scores against aggregated human
//    ratings (paired t, Wilcoxon, correlations, effect size, MAE);
//  * quality-ratio calibration: fused per-section quality grouped by
//    generation tier, the high/mid ratio and its tests against rho0.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvplan/core_model.hpp"
#include "mvplan/stats.hpp"

namespace mvplan {

inline constexpr double kTargetQualityRatio = 1.0 / 0.7;

struct RatingRow {
  std::string section_id;
  std::string annotator_id;
  int rating = 0;  // 1..5

  bool operator==(const RatingRow&) const = default;
};

struct HumanRatings {
  std::vector<RatingRow> rows;
  std::size_t invalid_rows = 0;  // blank or out-of-range ratings skipped on read
};

// human_ratings.csv: columns section_id, annotator_id, rating. Blank or
// out-of-range ratings are skipped and counted; a repeated
// (section, annotator) pair is a ParseError.
HumanRatings parse_human_ratings(std::string_view text, const std::string& source);
HumanRatings read_human_ratings(const std::filesystem::path& path);

struct Exclusion {
  std::string section_id;
  std::string reason;

  bool operator==(const Exclusion&) const = default;
};

struct ConsistencyPair {
  std::string section_id;
  double llm_score = 0.0;
  double human_mean = 0.0;
  double human_sd = 0.0;  // N-1 denominator; 0 with a single rating
  std::size_t n_ratings = 0;
  double delta = 0.0;  // llm - human mean
};

struct ConsistencyReport {
  std::size_t n = 0;
  std::size_t min_raters = 0;
  stats::TTestResult t_test;
  std::optional<double> cohens_d;
  stats::WilcoxonResult wilcoxon;
  std::optional<double> pearson_r;
  std::optional<double> spearman_rho;
  double mae = 0.0;
  double llm_mean = 0.0;
  double llm_sd = 0.0;
  double human_mean = 0.0;
  double human_sd = 0.0;
  std::size_t large_discrepancies = 0;  // |delta| > 1.0
  std::vector<ConsistencyPair> pairs;
  std::vector<Exclusion> excluded;
  std::vector<std::string> notes;  // statistics left undefined and why
};

inline constexpr double kLargeDiscrepancy = 1.0;

// llm_scores are (section id, score) in song order. Sections with fewer
// than min_raters valid ratings are excluded. Throws ValidationError when
// fewer than two sections remain or a retained section has no LLM score.
ConsistencyReport run_consistency(const std::vector<std::pair<std::string, double>>& llm_scores,
                                  const HumanRatings& ratings, std::size_t min_raters);

// Uses each section's saliency as its LLM score.
ConsistencyReport run_consistency(const SongStructure& song, const HumanRatings& ratings,
                                  std::size_t min_raters);

// eval_report.json: results[metric][section_id] -> score.
struct EvalReport {
  std::map<std::string, std::map<std::string, double>> results;
};

EvalReport eval_report_from_json_text(std::string_view text, const std::string& source);
EvalReport read_eval_report(const std::filesystem::path& path);

struct FusedRow {
  std::string section_id;
  std::string type_label;
  std::string action;      // "high", "mid" or "excluded"
  std::string action_raw;  // label as found in core.json
  double q = 0.0;

  bool operator==(const FusedRow&) const = default;
};

struct CalibrationReport {
  std::size_t n_high = 0;
  std::size_t n_mid = 0;
  double q_high_mean = 0.0;
  double q_mid_mean = 0.0;
  double rho = 0.0;
  double rho0 = kTargetQualityRatio;
  double relative_deviation = 0.0;  // rho / rho0 - 1
  std::optional<stats::TTestResult> log_t;
  std::size_t log_t_dropped = 0;  // non-positive q values left out of the log test
  std::string log_t_note;
  stats::BootstrapResult bootstrap;
  std::vector<FusedRow> sections;  // every section with a fused q, song order
  std::vector<Exclusion> excluded;
  std::vector<std::string> metrics;
  std::vector<std::string> degenerate_metrics;  // constant across sections
  bool degenerate = false;
  std::string normalization_scope;
};

// Normalises a raw action label: high/high_gen -> "high", mid/mid_gen ->
// "mid"; anything else yields nullopt and the section is excluded.
std::optional<std::string> normalize_action_label(std::string_view raw);

// Partition + ratio + tests on already-fused rows.
CalibrationReport calibrate_fused(const std::vector<FusedRow>& rows, double rho0,
                                  const stats::BootstrapConfig& bootstrap);

// Full pipeline: per-metric min-max normalisation over the song's
// sections, weighted mean fusion (uniform when weights is empty), then
// calibrate_fused. Throws ValidationError if a metric is missing from the
// report or either tier partition is empty.
CalibrationReport run_ratio_calibration(const SongStructure& song, const EvalReport& report,
                                        const std::vector<std::string>& metrics, double rho0,
                                        const stats::BootstrapConfig& bootstrap,
                                        const std::vector<double>& weights = {});

// q_calibration CSV: SecID,Type,Action,Action_raw,q_i
std::string format_q_calibration_csv(const std::vector<FusedRow>& rows);
std::vector<FusedRow> parse_q_calibration_csv(std::string_view text, const std::string& source);

// q_high anchored at 1.0 and q_mid = 1 / rho; q_reuse unchanged. Throws
// ValidationError on degenerate reports.
QualityFactors apply_calibration(const CalibrationReport& report, const QualityFactors& factors);

}  // namespace mvplan
