#include "mvplan/calibration.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mvplan/error.hpp"
#include "mvplan/io.hpp"

namespace mvplan {

namespace {

std::optional<int> parse_rating(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size() || std::floor(v) != v) return std::nullopt;
    if (v < kMinSaliency || v > kMaxSaliency) return std::nullopt;
    return static_cast<int>(v);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::size_t require_column(const io::CsvTable& table, std::string_view name, const std::string& source) {
  auto col = table.column(name);
  if (!col) throw ParseError(source, "missing column '" + std::string(name) + "'", 1);
  return *col;
}

}  // namespace

HumanRatings parse_human_ratings(std::string_view text, const std::string& source) {
  const io::CsvTable table = io::parse_csv(text, source);
  const std::size_t c_section = require_column(table, "section_id", source);
  const std::size_t c_annotator = require_column(table, "annotator_id", source);
  const std::size_t c_rating = require_column(table, "rating", source);

  HumanRatings out;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (!seen.emplace(row[c_section], row[c_annotator]).second) {
      throw ParseError(source,
                       "duplicate rating for section '" + row[c_section] + "' by annotator '" +
                           row[c_annotator] + "'",
                       table.row_lines[r]);
    }
    auto rating = parse_rating(row[c_rating]);
    if (!rating) {
      ++out.invalid_rows;
      continue;
    }
    out.rows.push_back({row[c_section], row[c_annotator], *rating});
  }
  return out;
}

HumanRatings read_human_ratings(const std::filesystem::path& path) {
  return parse_human_ratings(io::read_text_file(path), path.string());
}

ConsistencyReport run_consistency(const std::vector<std::pair<std::string, double>>& llm_scores,
                                  const HumanRatings& ratings, std::size_t min_raters) {
  if (min_raters < 1) throw std::invalid_argument("run_consistency: K must be >= 1");

  std::map<std::string, std::vector<double>> by_section;
  std::vector<std::string> rating_order;
  for (const auto& row : ratings.rows) {
    auto [it, fresh] = by_section.try_emplace(row.section_id);
    if (fresh) rating_order.push_back(row.section_id);
    it->second.push_back(row.rating);
  }
  std::map<std::string, double> llm;
  for (const auto& [id, score] : llm_scores) llm.emplace(id, score);

  ConsistencyReport report;
  report.min_raters = min_raters;

  auto consider = [&](const std::string& id) {
    auto it = by_section.find(id);
    const std::size_t count = it == by_section.end() ? 0 : it->second.size();
    if (count < min_raters) {
      report.excluded.push_back({id, std::to_string(count) + " valid ratings < K=" + std::to_string(min_raters)});
      return;
    }
    auto score = llm.find(id);
    if (score == llm.end()) {
      throw ValidationError("run_consistency: no LLM score for retained section '" + id + "'");
    }
    ConsistencyPair pair;
    pair.section_id = id;
    pair.llm_score = score->second;
    pair.n_ratings = count;
    pair.human_mean = stats::mean(it->second);
    pair.human_sd = count >= 2 ? stats::sample_sd(it->second) : 0.0;
    pair.delta = pair.llm_score - pair.human_mean;
    report.pairs.push_back(pair);
  };
  for (const auto& [id, score] : llm_scores) consider(id);
  for (const auto& id : rating_order) {
    if (!llm.contains(id)) consider(id);
  }

  report.n = report.pairs.size();
  if (report.n < 2) {
    throw ValidationError("run_consistency: " + std::to_string(report.n) +
                          " sections retained; at least 2 are required");
  }

  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : report.pairs) {
    x.push_back(p.llm_score);
    y.push_back(p.human_mean);
    if (std::abs(p.delta) > kLargeDiscrepancy) ++report.large_discrepancies;
  }
  report.llm_mean = stats::mean(x);
  report.llm_sd = stats::sample_sd(x);
  report.human_mean = stats::mean(y);
  report.human_sd = stats::sample_sd(y);

  const stats::PairedSample sample(x, y);
  report.t_test = stats::paired_t_test(sample);
  report.wilcoxon = stats::wilcoxon_signed_rank(sample);
  report.mae = stats::mae(sample);
  auto attempt = [&](const char* name, auto fn) -> std::optional<double> {
    try {
      return fn(sample);
    } catch (const DegenerateError& e) {
      report.notes.push_back(std::string(name) + " undefined: " + e.what());
      return std::nullopt;
    }
  };
  report.cohens_d = attempt("cohens_d", stats::cohens_d_paired);
  report.pearson_r = attempt("pearson_r", stats::pearson);
  report.spearman_rho = attempt("spearman_rho", stats::spearman);
  return report;
}

ConsistencyReport run_consistency(const SongStructure& song, const HumanRatings& ratings,
                                  std::size_t min_raters) {
  std::vector<std::pair<std::string, double>> scores;
  for (const auto& seg : song.segments) scores.emplace_back(seg.id, seg.saliency_raw);
  return run_consistency(scores, ratings, min_raters);
}

EvalReport eval_report_from_json_text(std::string_view text, const std::string& source) {
  const io::json doc = io::parse_json_text(text, source);
  if (!doc.is_object() || !doc.contains("results") || !doc["results"].is_object()) {
    throw ParseError(source, "/results: expected an object of metrics");
  }
  EvalReport report;
  for (const auto& [metric, per_section] : doc["results"].items()) {
    if (!per_section.is_object()) {
      throw ParseError(source, "/results/" + metric + ": expected an object keyed by section id");
    }
    auto& scores = report.results[metric];
    for (const auto& [section, value] : per_section.items()) {
      if (value.is_null()) continue;
      if (!value.is_number()) {
        throw ParseError(source, "/results/" + metric + "/" + section + ": expected a number");
      }
      scores.emplace(section, value.get<double>());
    }
  }
  return report;
}

EvalReport read_eval_report(const std::filesystem::path& path) {
  return eval_report_from_json_text(io::read_text_file(path), path.string());
}

std::optional<std::string> normalize_action_label(std::string_view raw) {
  if (raw == "high" || raw == "high_gen") return std::string("high");
  if (raw == "mid" || raw == "mid_gen") return std::string("mid");
  return std::nullopt;
}

CalibrationReport calibrate_fused(const std::vector<FusedRow>& rows, double rho0,
                                  const stats::BootstrapConfig& bootstrap) {
  if (!(rho0 > 0.0)) throw std::invalid_argument("calibration: rho0 must be positive");
  CalibrationReport report;
  report.rho0 = rho0;
  std::vector<double> high;
  std::vector<double> mid;
  for (const auto& row : rows) {
    FusedRow out = row;
    const std::string& label = row.action_raw.empty() ? row.action : row.action_raw;
    auto action = normalize_action_label(label);
    if (!action) {
      out.action = "excluded";
      report.excluded.push_back(
          {row.section_id, label.empty() ? "no assigned_action"
                                         : "action '" + label + "' is not high or mid"});
    } else {
      out.action = *action;
      (*action == "high" ? high : mid).push_back(row.q);
    }
    report.sections.push_back(std::move(out));
  }
  report.n_high = high.size();
  report.n_mid = mid.size();
  if (high.empty() || mid.empty()) {
    throw ValidationError("calibration: " + std::string(high.empty() ? "high" : "mid") +
                          " partition is empty");
  }
  report.q_high_mean = stats::mean(high);
  report.q_mid_mean = stats::mean(mid);
  if (report.q_mid_mean == 0.0) throw DegenerateError("calibration: mid group mean is zero");
  report.rho = report.q_high_mean / report.q_mid_mean;
  report.relative_deviation = report.rho / rho0 - 1.0;

  // The log test needs strictly positive values; min-max normalisation
  // maps the worst section to exactly 0, so such values are left out.
  std::vector<double> log_high;
  std::vector<double> log_mid;
  for (double q : high) (q > 0.0 ? log_high.push_back(q) : void(++report.log_t_dropped));
  for (double q : mid) (q > 0.0 ? log_mid.push_back(q) : void(++report.log_t_dropped));
  if (log_high.size() >= 2 && log_mid.size() >= 2) {
    report.log_t = stats::log_ratio_t_test(log_high, log_mid, rho0);
    if (report.log_t->degenerate) report.degenerate = true;
    if (report.log_t_dropped > 0) {
      report.log_t_note = std::to_string(report.log_t_dropped) + " non-positive q values left out";
    }
  } else {
    report.log_t_note = "fewer than 2 positive values in a group; log-ratio test skipped";
  }

  report.bootstrap = stats::bootstrap_ratio_ci(high, mid, rho0, bootstrap);
  return report;
}

CalibrationReport run_ratio_calibration(const SongStructure& song, const EvalReport& eval,
                                        const std::vector<std::string>& metrics, double rho0,
                                        const stats::BootstrapConfig& bootstrap,
                                        const std::vector<double>& weights) {
  if (metrics.empty()) throw std::invalid_argument("calibration: metric list is empty");
  if (!weights.empty() && weights.size() != metrics.size()) {
    throw std::invalid_argument("calibration: one weight per metric is required");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("calibration: metric weights must be positive");
  }
  for (const auto& m : metrics) {
    if (!eval.results.contains(m)) {
      throw ValidationError("calibration: metric '" + m + "' is not in the eval report");
    }
  }

  std::vector<const Segment*> scored;
  std::vector<Exclusion> missing;
  for (const auto& seg : song.segments) {
    std::string absent;
    for (const auto& m : metrics) {
      if (!eval.results.at(m).contains(seg.id)) {
        absent = m;
        break;
      }
    }
    if (absent.empty()) {
      scored.push_back(&seg);
    } else {
      missing.push_back({seg.id, "no '" + absent + "' score"});
    }
  }
  if (scored.empty()) throw ValidationError("calibration: no section has scores for every metric");

  std::vector<double> fused(scored.size(), 0.0);
  double weight_sum = 0.0;
  std::vector<std::string> degenerate;
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    std::vector<double> raw;
    raw.reserve(scored.size());
    for (const Segment* seg : scored) raw.push_back(eval.results.at(metrics[k]).at(seg->id));
    const stats::Normalized norm = stats::minmax_normalize(raw);
    if (norm.degenerate) degenerate.push_back(metrics[k]);
    const double w = weights.empty() ? 1.0 : weights[k];
    weight_sum += w;
    for (std::size_t i = 0; i < fused.size(); ++i) fused[i] += w * norm.values[i];
  }
  std::vector<FusedRow> rows;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    FusedRow row;
    row.section_id = scored[i]->id;
    row.type_label = scored[i]->type_label;
    row.action_raw = scored[i]->assigned_action.value_or("");
    row.q = fused[i] / weight_sum;
    rows.push_back(std::move(row));
  }

  CalibrationReport report = calibrate_fused(rows, rho0, bootstrap);
  report.metrics = metrics;
  report.degenerate_metrics = degenerate;
  if (!degenerate.empty()) report.degenerate = true;
  report.excluded.insert(report.excluded.begin(), missing.begin(), missing.end());
  report.normalization_scope =
      "per-metric min-max over the " + std::to_string(scored.size()) + " scored sections of one song";
  return report;
}

std::string format_q_calibration_csv(const std::vector<FusedRow>& rows) {
  std::ostringstream os;
  os << "SecID,Type,Action,Action_raw,q_i\n";
  for (const auto& r : rows) {
    os << r.section_id << ',' << r.type_label << ',' << r.action << ',' << r.action_raw << ','
       << io::format_double(r.q) << '\n';
  }
  return os.str();
}

std::vector<FusedRow> parse_q_calibration_csv(std::string_view text, const std::string& source) {
  const io::CsvTable table = io::parse_csv(text, source);
  const std::size_t c_id = require_column(table, "SecID", source);
  const std::size_t c_type = require_column(table, "Type", source);
  const std::size_t c_action = require_column(table, "Action", source);
  const std::size_t c_raw = require_column(table, "Action_raw", source);
  const std::size_t c_q = require_column(table, "q_i", source);
  std::vector<FusedRow> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    FusedRow row;
    row.section_id = cells[c_id];
    row.type_label = cells[c_type];
    row.action = cells[c_action];
    row.action_raw = cells[c_raw];
    try {
      std::size_t used = 0;
      row.q = std::stod(cells[c_q], &used);
      if (used != cells[c_q].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError(source, "q_i '" + cells[c_q] + "' is not a number", table.row_lines[r]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

QualityFactors apply_calibration(const CalibrationReport& report, const QualityFactors& factors) {
  if (report.degenerate) throw ValidationError("apply_calibration: report is degenerate");
  if (!(report.rho > 0.0) || !std::isfinite(report.rho)) {
    throw ValidationError("apply_calibration: observed ratio is not a positive number");
  }
  QualityFactors out = factors;
  out.q_high = 1.0;
  out.q_mid = 1.0 / report.rho;
  return out;
}

}  // namespace mvplan
