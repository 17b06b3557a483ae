#include "mvplan/cli.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mvplan/calibration.hpp"
#include "mvplan/documents.hpp"
#include "mvplan/error.hpp"
#include "mvplan/io.hpp"
#include "mvplan/metrics.hpp"
#include "mvplan/sim.hpp"

namespace mvplan {

namespace fs = std::filesystem;
using io::json;

namespace {

constexpr const char* kConfigEnv = "MVPLAN_CONFIG";

enum class Format { kJson, kCsv, kTable };

// Where a failure happened, for the diagnostic line.
struct Context {
  std::string stage;
  std::string file;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string opt_fixed(const std::optional<double>& v, int digits) { return v ? fixed(*v, digits) : "NA"; }

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = cell.find_last_not_of(" \t");
    cell = cell.substr(b, e - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != cell.size() || !std::isfinite(v)) {
      throw ValidationError(what + ": '" + cell + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

// Text table with left-aligned first column and right-aligned numbers.
std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) os << "  ";
      if (c == 0) {
        os << std::left << std::setw(static_cast<int>(width[c])) << cells[c];
      } else {
        os << std::right << std::setw(static_cast<int>(width[c])) << cells[c];
      }
    }
    os << '\n';
  };
  line(header);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  line(rule);
  for (const auto& r : rows) line(r);
  return os.str();
}

std::string render_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) os << (c ? "," : "") << cells[c];
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

// Flat key/value view used by the csv and table renderings of reports.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string render_key_values(const KeyValues& kv, Format format) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [k, v] : kv) rows.push_back({k, v});
  return format == Format::kCsv ? render_csv({"key", "value"}, rows) : render_table({"statistic", "value"}, rows);
}

struct Session {
  std::ostream& out;
  std::ostream& err;
  Context ctx;
  PlannerConfig config;
  Format format = Format::kJson;
  std::string out_path;

  void emit(const std::string& text) {
    if (out_path.empty()) {
      out << text;
    } else {
      ctx.file = out_path;
      io::write_text_file(out_path, text);
    }
  }
};

fs::path require_input(Session& s, const std::string& path) {
  s.ctx.file = path;
  if (path.empty()) throw ParseError("<none>", "input path is required");
  if (!fs::exists(path)) throw ParseError(path, "no such file");
  return path;
}

SongStructure load_song(Session& s, const std::string& path) {
  require_input(s, path);
  SongStructure song = io::read_song(path);
  ValidationReport report = validate_song(song);
  if (!report.ok()) {
    std::ostringstream os;
    os << report.violations.size() << " violation(s):";
    for (const auto& v : report.violations) os << "\n  " << v.code << " [" << v.subject << "] " << v.message;
    throw ValidationError(os.str());
  }
  return song;
}

std::map<std::string, int> tier_counts(const AllocationResult& r) {
  std::map<std::string, int> counts{{"high", 0}, {"mid", 0}, {"reuse", 0}};
  for (const auto& [id, a] : r.assignments()) ++counts[std::string(to_string(a))];
  return counts;
}

// ---- plan -------------------------------------------------------------

struct PlanArgs {
  std::string song;
  std::optional<double> budget;
  std::string out_dir;
};

std::string plan_audit_rows(const AllocationResult& r, Format format) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& m : r.segments()) {
    rows.push_back({m.segment_id, std::string(to_string(m.role)), std::to_string(m.saliency_raw),
                    fixed(m.shared_s, 3), std::string(to_string(m.shared_action)), fixed(m.unique_s, 3),
                    std::string(to_string(m.suffix_action)), std::string(to_string(m.action)),
                    fixed(m.cost_usd, 4), fixed(m.utility, 4)});
  }
  const std::vector<std::string> header{"segment", "role",   "saliency", "shared_s", "shared_tier",
                                        "unique_s", "suffix_tier", "action", "cost_usd", "utility"};
  return format == Format::kCsv ? render_csv(header, rows) : render_table(header, rows);
}

int cmd_plan(Session& s, const PlanArgs& a) {
  s.ctx.stage = "plan";
  const SongStructure song = load_song(s, a.song);
  PlannerConfig config = s.config;
  if (a.budget) config.budget_usd = *a.budget;
  EnumerationOptions options{config.max_group_members};
  const AllocationResult r = plan_song(song, config.cost_model, config.quality, config.budget_usd, options);
  const PersistentState state = build_persistent_state(song, r.assignments());
  const json alloc_doc = allocation_to_json(song.song_id, r, config);

  if (!a.out_dir.empty()) {
    s.ctx.file = a.out_dir;
    io::write_text_file(fs::path(a.out_dir) / "allocation.json", io::dump(alloc_doc));
    io::write_text_file(fs::path(a.out_dir) / "state.json", io::dump(state_to_json(state)));
  }
  if (s.format == Format::kJson) {
    s.emit(io::dump(alloc_doc));
    return kExitOk;
  }
  std::string text = plan_audit_rows(r, s.format);
  if (s.format == Format::kTable) {
    const auto counts = tier_counts(r);
    std::ostringstream os;
    os << "\nsong " << song.song_id << "  budget " << fixed(config.budget_usd, 2) << " USD"
       << "  cost " << fixed(r.total_cost_usd, 4) << " USD (" << r.total_cost_cents << " cents)"
       << "  utility " << fixed(r.total_utility, 4) << '\n'
       << "tiers high=" << counts.at("high") << " mid=" << counts.at("mid") << " reuse=" << counts.at("reuse")
       << "  config " << config_hash(config) << "  " << kSolverVersion << '\n';
    text += os.str();
  }
  s.emit(text);
  return kExitOk;
}

// ---- sweep ------------------------------------------------------------

struct SweepArgs {
  std::string song;
  std::string budgets;
};

int cmd_sweep(Session& s, const SweepArgs& a) {
  s.ctx.stage = "sweep";
  const SongStructure song = load_song(s, a.song);
  const std::vector<double> budgets = parse_number_list(a.budgets, "--budgets");
  const PlanTable table =
      build_plan_table(song, s.config.cost_model, s.config.quality, EnumerationOptions{s.config.max_group_members});
  std::vector<double> effective;
  for (double b : budgets) effective.push_back(b - s.config.cost_model.fixed_overhead_usd);
  const auto entries = budget_sweep(table, effective);

  const std::vector<std::string> header{"budget_usd", "feasible", "total_utility", "total_cost_usd",
                                        "n_high",     "n_mid",    "n_reuse"};
  std::vector<std::vector<std::string>> rows;
  json arr = json::array();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    json j = json::object();
    j["budget_usd"] = budgets[i];
    j["feasible"] = e.result.has_value();
    if (e.result) {
      const auto counts = tier_counts(*e.result);
      const double cost = e.result->total_cost_usd + s.config.cost_model.fixed_overhead_usd;
      rows.push_back({io::format_double(budgets[i]), "1", fixed(e.result->total_utility, 6), fixed(cost, 4),
                      std::to_string(counts.at("high")), std::to_string(counts.at("mid")),
                      std::to_string(counts.at("reuse"))});
      j["total_utility"] = e.result->total_utility;
      j["total_cost_usd"] = cost;
      j["tiers"] = counts;
    } else {
      rows.push_back({io::format_double(budgets[i]), "0", "", "", "", "", ""});
      j["error"] = e.error;
      if (!e.infeasible_unit.empty()) j["infeasible_unit"] = e.infeasible_unit;
    }
    arr.push_back(std::move(j));
  }
  if (s.format == Format::kJson) {
    s.emit(io::dump(json{{"song_id", song.song_id}, {"rows", arr}}));
  } else if (s.format == Format::kTable) {
    s.emit(render_table(header, rows));
  } else {
    s.emit(render_csv(header, rows));
  }
  return kExitOk;
}

// ---- cqr --------------------------------------------------------------

struct CqrArgs {
  std::string allocation;
  std::string eval;
  std::string metric = "judge";
};

int cmd_cqr(Session& s, const CqrArgs& a) {
  s.ctx.stage = "cqr";
  require_input(s, a.allocation);
  const AllocationResult r = allocation_from_json(io::read_json_file(a.allocation), a.allocation);
  require_input(s, a.eval);
  const EvalReport eval = read_eval_report(a.eval);
  auto metric = eval.results.find(a.metric);
  if (metric == eval.results.end()) throw ValidationError("metric '" + a.metric + "' not in the eval report");

  MetricsSummary m;
  m.ledger = ledger_from_allocation(r);
  std::vector<int> saliencies;
  for (const auto& seg : r.segments()) {
    auto q = metric->second.find(seg.segment_id);
    if (q == metric->second.end()) {
      throw ValidationError("no '" + a.metric + "' score for segment '" + seg.segment_id + "'");
    }
    saliencies.push_back(seg.saliency_raw);
    try {
      m.qualities.push_back(make_quality(seg.segment_id, q->second, QualityScale::kJudge1To5));
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
  }
  m.total_cost_usd = m.ledger.total();
  m.total_utility = r.total_utility;
  m.cqr = compute_cqr(saliencies, m.qualities, m.ledger);
  if (s.format == Format::kJson) {
    s.emit(io::dump(metrics_to_json(m, saliencies)));
    return kExitOk;
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < saliencies.size(); ++i) {
    rows.push_back({m.ledger.entries[i].segment_id, std::to_string(saliencies[i]), fixed(m.qualities[i].value, 4),
                    fixed(m.ledger.entries[i].cost_usd, 4)});
  }
  const std::vector<std::string> header{"segment", "saliency", "quality", "cost_usd"};
  if (s.format == Format::kCsv) {
    s.emit(render_csv(header, rows));
  } else {
    s.emit(render_table(header, rows) + "\nCQR " + fixed(m.cqr, 6) + "  total cost " + fixed(m.total_cost_usd, 4) +
           " USD\n");
  }
  return kExitOk;
}

// ---- assemble -----------------------------------------------------------

struct AssembleArgs {
  std::string song;
  std::string allocation;
  std::string clips;
  std::string beats;
};

int cmd_assemble(Session& s, const AssembleArgs& a) {
  s.ctx.stage = "assemble";
  const SongStructure song = load_song(s, a.song);
  require_input(s, a.allocation);
  const AllocationResult r = allocation_from_json(io::read_json_file(a.allocation), a.allocation);
  require_input(s, a.clips);
  const auto clips = clips_from_json(io::read_json_file(a.clips), a.clips);
  BeatGrid grid = song.beat_grid;
  if (!a.beats.empty()) {
    require_input(s, a.beats);
    grid = io::beat_grid_from_json(io::read_json_file(a.beats), a.beats);
  }
  s.ctx.file = a.song;
  AssemblyConfig config;
  config.snap = s.config.snap;
  config.extend_policy = s.config.extend_policy;
  config.max_stretch = s.config.max_stretch;
  Timeline t;
  try {
    t = assemble_timeline(song, r, clips, grid, config);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  if (s.format == Format::kJson) {
    s.emit(io::dump(timeline_to_json(t)));
    return kExitOk;
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : t.entries) {
    rows.push_back({e.segment_id, std::string(to_string(e.action)), fixed(e.in_s, 3), fixed(e.out_s, 3),
                    e.in_snapped ? "1" : "0", e.out_snapped ? "1" : "0", e.transition,
                    std::string(to_string(e.edit.kind)), fixed(e.edit.amount_s, 3)});
  }
  const std::vector<std::string> header{"segment", "action", "in_s",  "out_s",   "in_snap",
                                        "out_snap", "transition", "edit", "edit_s"};
  s.emit(s.format == Format::kCsv ? render_csv(header, rows) : render_table(header, rows));
  return kExitOk;
}

// ---- consistency --------------------------------------------------------

struct ConsistencyArgs {
  std::string song;
  std::string ratings;
  std::optional<std::size_t> min_raters;
};

int cmd_consistency(Session& s, const ConsistencyArgs& a) {
  s.ctx.stage = "consistency";
  const SongStructure song = load_song(s, a.song);
  require_input(s, a.ratings);
  const HumanRatings ratings = read_human_ratings(a.ratings);
  const ConsistencyReport r = run_consistency(song, ratings, a.min_raters.value_or(s.config.min_raters));
  if (s.format == Format::kJson) {
    json doc = consistency_to_json(r);
    doc["invalid_rating_rows"] = ratings.invalid_rows;
    s.emit(io::dump(doc));
    return kExitOk;
  }
  KeyValues kv{{"n", std::to_string(r.n)},
               {"llm_mean", fixed(r.llm_mean, 4)},
               {"llm_sd", fixed(r.llm_sd, 4)},
               {"human_mean", fixed(r.human_mean, 4)},
               {"human_sd", fixed(r.human_sd, 4)},
               {"paired_t", fixed(r.t_test.t, 4)},
               {"paired_t_df", fixed(r.t_test.df, 0)},
               {"paired_t_p", fixed(r.t_test.p_two_sided, 4)},
               {"cohens_d", opt_fixed(r.cohens_d, 4)},
               {"wilcoxon_w", fixed(r.wilcoxon.w, 1)},
               {"wilcoxon_p", fixed(r.wilcoxon.p_two_sided, 4)},
               {"wilcoxon_exact", r.wilcoxon.exact ? "1" : "0"},
               {"pearson_r", opt_fixed(r.pearson_r, 4)},
               {"spearman_rho", opt_fixed(r.spearman_rho, 4)},
               {"mae", fixed(r.mae, 4)},
               {"large_discrepancies", std::to_string(r.large_discrepancies)},
               {"excluded", std::to_string(r.excluded.size())}};
  s.emit(render_key_values(kv, s.format));
  return kExitOk;
}

// ---- calibrate ----------------------------------------------------------

struct CalibrateArgs {
  std::string song;
  std::string eval;
  std::string fused;
  std::string metrics;
  std::string weights;
  std::string q_csv;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
  std::optional<double> rho0;
};

int cmd_calibrate(Session& s, const CalibrateArgs& a) {
  s.ctx.stage = "calibrate";
  stats::BootstrapConfig boot;
  boot.seed = a.seed.value_or(s.config.seed);
  boot.iterations = a.iterations.value_or(s.config.bootstrap_iterations);
  const double rho0 = a.rho0.value_or(s.config.rho0);

  CalibrationReport r;
  if (!a.fused.empty()) {
    require_input(s, a.fused);
    const auto rows = parse_q_calibration_csv(io::read_text_file(a.fused), a.fused);
    r = calibrate_fused(rows, rho0, boot);
  } else {
    const SongStructure song = load_song(s, a.song);
    require_input(s, a.eval);
    const EvalReport eval = read_eval_report(a.eval);
    std::vector<std::string> metrics = parse_name_list(a.metrics);
    if (metrics.empty()) {
      for (const auto& [name, scores] : eval.results) metrics.push_back(name);
    }
    const std::vector<double> weights = parse_number_list(a.weights, "--weights");
    r = run_ratio_calibration(song, eval, metrics, rho0, boot, weights);
  }
  if (!a.q_csv.empty()) {
    s.ctx.file = a.q_csv;
    io::write_text_file(a.q_csv, format_q_calibration_csv(r.sections));
  }
  if (s.format == Format::kJson) {
    json doc = calibration_to_json(r);
    doc["bootstrap"]["iterations"] = boot.iterations;
    doc["bootstrap"]["seed"] = boot.seed;
    s.emit(io::dump(doc));
    return kExitOk;
  }
  KeyValues kv{{"n_high", std::to_string(r.n_high)},
               {"n_mid", std::to_string(r.n_mid)},
               {"q_high_mean", fixed(r.q_high_mean, 4)},
               {"q_mid_mean", fixed(r.q_mid_mean, 4)},
               {"rho", fixed(r.rho, 4)},
               {"rho0", fixed(r.rho0, 4)},
               {"relative_deviation", fixed(r.relative_deviation, 4)},
               {"log_t", r.log_t ? fixed(r.log_t->t, 4) : "NA"},
               {"log_t_p", r.log_t ? fixed(r.log_t->p_two_sided, 4) : "NA"},
               {"log_t_dropped", std::to_string(r.log_t_dropped)},
               {"ci_low", fixed(r.bootstrap.ci_low, 4)},
               {"ci_high", fixed(r.bootstrap.ci_high, 4)},
               {"p_boot", fixed(r.bootstrap.p_boot, 4)},
               {"excluded", std::to_string(r.excluded.size())}};
  s.emit(render_key_values(kv, s.format));
  return kExitOk;
}

// ---- simulate -----------------------------------------------------------

struct SimulateArgs {
  std::optional<std::uint64_t> seed;
  std::size_t songs = 1;
  std::size_t jobs = 1;
  double budget_fraction = 0.6;
  std::optional<double> noise;
  std::string song_dir;
};

struct SimRow {
  std::uint64_t seed = 0;
  SongStructure song;
  std::optional<EndToEndResult> result;
  std::string error;
};

SimRow simulate_one(std::uint64_t seed, const PlannerConfig& pc, double fraction, double noise) {
  SimRow row;
  row.seed = seed;
  row.song = generate_song(pilot_song_config(seed));
  EndToEndConfig cfg;
  cfg.cost_model = pc.cost_model;
  cfg.quality = pc.quality;
  cfg.judge.quality = pc.quality;
  cfg.judge.noise_amplitude = noise;
  cfg.noise_seed = pc.noise_seed;
  cfg.assembly.snap = pc.snap;
  cfg.assembly.extend_policy = pc.extend_policy;
  cfg.assembly.max_stretch = pc.max_stretch;
  cfg.enumeration.max_group_members = pc.max_group_members;
  cfg.budget_usd = fraction * max_song_cost(row.song, pc.cost_model) + pc.cost_model.fixed_overhead_usd;
  try {
    row.result = run_end_to_end(row.song, cfg);
  } catch (const InfeasibleError& e) {
    row.error = e.what();
  }
  return row;
}

int cmd_simulate(Session& s, const SimulateArgs& a) {
  s.ctx.stage = "simulate";
  s.ctx.file = "<synthetic>";
  const std::uint64_t base = a.seed.value_or(s.config.seed);
  if (a.songs == 0) throw ValidationError("--songs must be >= 1");
  if (!(a.budget_fraction > 0.0)) throw ValidationError("--budget-fraction must be positive");
  const double noise = a.noise.value_or(s.config.judge_noise);
  if (!(noise >= 0.0)) throw ValidationError("--noise must be >= 0");

  // Each song is independent; workers pull indices and results land in
  // their own slot, so output order does not depend on scheduling.
  std::vector<SimRow> rows(a.songs);
  std::vector<std::exception_ptr> failures(a.songs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < a.songs; i = next++) {
      try {
        rows[i] = simulate_one(base + i, s.config, a.budget_fraction, noise);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(a.jobs, a.songs));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  if (!a.song_dir.empty()) {
    for (const auto& r : rows) {
      const fs::path p = fs::path(a.song_dir) / (r.song.song_id + ".json");
      s.ctx.file = p.string();
      io::write_text_file(p, io::dump(io::song_to_json(r.song)));
    }
  }

  std::size_t feasible = 0;
  std::size_t beats_high = 0;
  json songs = json::array();
  std::vector<std::vector<std::string>> table;
  for (const auto& r : rows) {
    if (r.result) {
      json j = end_to_end_to_json(r.song, *r.result);
      j["seed"] = r.seed;
      songs.push_back(std::move(j));
      ++feasible;
      if (r.result->metrics.cqr > r.result->uniform_high.cqr) ++beats_high;
      table.push_back({std::to_string(r.seed), r.song.song_id, fixed(r.song.total_duration_s(), 2),
                       std::to_string(r.song.segments.size()), std::to_string(r.song.groups.size()),
                       fixed(r.result->allocation.budget_usd, 2), fixed(r.result->allocation.total_cost_usd, 4),
                       fixed(r.result->metrics.cqr, 4), fixed(r.result->uniform_high.cqr, 4),
                       fixed(r.result->uniform_mid.cqr, 4)});
    } else {
      songs.push_back({{"seed", r.seed}, {"song_id", r.song.song_id}, {"error", r.error}});
      table.push_back({std::to_string(r.seed), r.song.song_id, fixed(r.song.total_duration_s(), 2),
                       std::to_string(r.song.segments.size()), std::to_string(r.song.groups.size()), "", "",
                       "infeasible", "", ""});
    }
  }
  if (s.format == Format::kJson) {
    json doc = json::object();
    doc["seed"] = base;
    doc["budget_fraction"] = a.budget_fraction;
    doc["judge_noise"] = noise;
    doc["summary"] = {{"songs", rows.size()}, {"feasible", feasible}, {"cqr_above_uniform_high", beats_high}};
    doc["songs"] = std::move(songs);
    s.emit(io::dump(doc));
    return kExitOk;
  }
  const std::vector<std::string> header{"seed",     "song",     "duration_s", "segments",         "groups",
                                        "budget",   "cost_usd", "cqr",        "uniform_high_cqr", "uniform_mid_cqr"};
  s.emit(s.format == Format::kCsv ? render_csv(header, table) : render_table(header, table));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Budget-aware planning and calibration for music-video generation", "mvplan"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kSolverVersion);

  std::string config_path;
  std::string format;
  std::string out_path;
  app.add_option("-c,--config", config_path, "Planner config JSON (default: $MVPLAN_CONFIG)");
  app.add_option("-f,--format", format, "Report format (default: csv for sweep, json otherwise)")->check(CLI::IsMember({"json", "csv", "table"}));
  app.add_option("-o,--out", out_path, "Write the report to this file instead of stdout");

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Allocate tiers to every segment under the budget");
  plan_cmd->add_option("song", plan.song, "Song structure (core.json)")->required();
  plan_cmd->add_option("-b,--budget", plan.budget, "Budget in USD (overrides the config)");
  plan_cmd->add_option("--out-dir", plan.out_dir, "Also write allocation.json and state.json here");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Solve at several budgets and tabulate the results");
  sweep_cmd->add_option("song", sweep.song, "Song structure (core.json)")->required();
  sweep_cmd->add_option("--budgets", sweep.budgets, "Comma-separated budgets in USD")->required();

  CqrArgs cqr;
  auto* cqr_cmd = app.add_subcommand("cqr", "Cost-Quality Ratio of an allocation");
  cqr_cmd->add_option("allocation", cqr.allocation, "Allocation document")->required();
  cqr_cmd->add_option("--eval", cqr.eval, "Quality report (eval_report.json)")->required();
  cqr_cmd->add_option("--metric", cqr.metric, "Metric holding judge scores on 1..5")->capture_default_str();

  AssembleArgs assemble;
  auto* assemble_cmd = app.add_subcommand("assemble", "Beat-snapped timeline from an allocation");
  assemble_cmd->add_option("song", assemble.song, "Song structure (core.json)")->required();
  assemble_cmd->add_option("allocation", assemble.allocation, "Allocation document")->required();
  assemble_cmd->add_option("--clips", assemble.clips, "Clip metadata (clips.json)")->required();
  assemble_cmd->add_option("--beats", assemble.beats, "Beat grid JSON (default: the song's own)");

  ConsistencyArgs consistency;
  auto* consistency_cmd = app.add_subcommand("consistency", "LLM saliency against human ratings");
  consistency_cmd->add_option("song", consistency.song, "Song structure (core.json)")->required();
  consistency_cmd->add_option("--ratings", consistency.ratings, "human_ratings.csv")->required();
  consistency_cmd->add_option("-k,--min-raters", consistency.min_raters, "Minimum valid ratings per section");

  CalibrateArgs calibrate;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "High/Mid quality ratio calibration");
  calibrate_cmd->add_option("song", calibrate.song, "Song structure (core.json)");
  calibrate_cmd->add_option("--eval", calibrate.eval, "Quality report (eval_report.json)");
  calibrate_cmd->add_option("--fused", calibrate.fused, "Per-section q CSV instead of song + eval report");
  calibrate_cmd->add_option("--metrics", calibrate.metrics, "Comma-separated metrics to fuse (default: all)");
  calibrate_cmd->add_option("--weights", calibrate.weights, "Comma-separated fusion weights");
  calibrate_cmd->add_option("--q-csv", calibrate.q_csv, "Write the per-section q CSV here");
  calibrate_cmd->add_option("--seed", calibrate.seed, "Bootstrap seed");
  calibrate_cmd->add_option("--iterations", calibrate.iterations, "Bootstrap replicates");
  calibrate_cmd->add_option("--rho0", calibrate.rho0, "Target ratio (default 1/0.7)");

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "End-to-end runs on synthetic songs");
  simulate_cmd->add_option("--seed", simulate.seed, "First song seed");
  simulate_cmd->add_option("--songs", simulate.songs, "Number of songs")->capture_default_str();
  simulate_cmd->add_option("-j,--jobs", simulate.jobs, "Worker threads")->capture_default_str();
  simulate_cmd->add_option("--budget-fraction", simulate.budget_fraction,
                           "Budget as a fraction of each song's all-High cost")
      ->capture_default_str();
  simulate_cmd->add_option("--noise", simulate.noise, "Judge noise amplitude");
  simulate_cmd->add_option("--song-dir", simulate.song_dir, "Write generated songs here");

  // Global options may also follow the subcommand.
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  Session s{out, err, {"config", ""}, {}, Format::kJson, out_path};
  if (format.empty()) format = sweep_cmd->parsed() ? "csv" : "json";
  if (format == "csv") s.format = Format::kCsv;
  if (format == "table") s.format = Format::kTable;

  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') config_path = env;
    }
    if (!config_path.empty()) {
      require_input(s, config_path);
      s.config = read_planner_config(config_path);
    }
    if (*plan_cmd) return cmd_plan(s, plan);
    if (*sweep_cmd) return cmd_sweep(s, sweep);
    if (*cqr_cmd) return cmd_cqr(s, cqr);
    if (*assemble_cmd) return cmd_assemble(s, assemble);
    if (*consistency_cmd) return cmd_consistency(s, consistency);
    if (*calibrate_cmd) {
      if (calibrate.fused.empty() && (calibrate.song.empty() || calibrate.eval.empty())) {
        s.ctx.stage = "calibrate";
        throw ValidationError("either --fused or both a song and --eval are required");
      }
      return cmd_calibrate(s, calibrate);
    }
    if (*simulate_cmd) return cmd_simulate(s, simulate);
  } catch (const InfeasibleError& e) {
    err << "mvplan: " << s.ctx.stage << ": " << s.ctx.file << ": infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ParseError& e) {
    err << "mvplan: " << s.ctx.stage << ": " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "mvplan: " << s.ctx.stage << ": " << s.ctx.file << ": " << e.what() << '\n';
    return kExitValidation;
  } catch (const DegenerateError& e) {
    err << "mvplan: " << s.ctx.stage << ": " << s.ctx.file << ": " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "mvplan: " << s.ctx.stage << ": " << s.ctx.file << ": " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "mvplan: " << s.ctx.stage << ": " << s.ctx.file << ": " << e.what() << '\n';
    return kExitIo;
  }
  return kExitValidation;
}

}  // namespace mvplan
