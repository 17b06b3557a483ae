#include "mvplan/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mvplan/error.hpp"

namespace mvplan::io {

namespace {

int line_of_offset(std::string_view text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

[[noreturn]] void schema_error(const std::string& source, const std::string& pointer,
                               const std::string& reason) {
  throw ParseError(source, pointer + ": " + reason);
}

const json& require(const json& obj, const char* key, const std::string& source,
                    const std::string& pointer) {
  if (!obj.is_object()) schema_error(source, pointer, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(source, pointer, std::string("missing field '") + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& source, const std::string& pointer) {
  if (!v.is_number()) schema_error(source, pointer, "expected a number");
  return v.get<double>();
}

std::string as_id(const json& v, const std::string& source, const std::string& pointer) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  schema_error(source, pointer, "expected a string or integer id");
}

int as_int(const json& v, const std::string& source, const std::string& pointer) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 1e9) return static_cast<int>(d);
  }
  schema_error(source, pointer, "expected an integer");
}

std::map<std::string, std::string> string_map(const json& v, const std::string& source,
                                              const std::string& pointer) {
  if (!v.is_object()) schema_error(source, pointer, "expected an object of strings");
  std::map<std::string, std::string> out;
  for (const auto& [key, value] : v.items()) {
    if (!value.is_string()) schema_error(source, pointer + "/" + key, "expected a string");
    out.emplace(key, value.get<std::string>());
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(path.string(), "cannot open file for writing");
  out << text;
  out.flush();
  if (!out) throw ParseError(path.string(), "write failed");
}

json parse_json_text(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const int line = line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    // Strip the "[json.exception.parse_error.101] " prefix.
    if (auto pos = what.find("] "); pos != std::string::npos) what = what.substr(pos + 2);
    throw ParseError(source, what, line);
  }
}

json read_json_file(const std::filesystem::path& path) {
  return parse_json_text(read_text_file(path), path.string());
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

std::optional<Action> parse_action_label(std::string_view label) {
  if (label == "high" || label == "high_gen") return Action::kHigh;
  if (label == "mid" || label == "mid_gen") return Action::kMid;
  if (label == "reuse") return Action::kReuse;
  return std::nullopt;
}

BeatGrid beat_grid_from_json(const json& doc, const std::string& source) {
  BeatGrid grid;
  const json& times = require(doc, "times_s", source, "/beats");
  if (!times.is_array()) schema_error(source, "/beats/times_s", "expected an array");
  for (std::size_t i = 0; i < times.size(); ++i) {
    grid.beats_s.push_back(as_number(times[i], source, "/beats/times_s/" + std::to_string(i)));
  }
  auto it = doc.find("downbeats");
  if (it == doc.end()) {
    // No downbeat information: every beat counts as an anchor.
    grid.downbeat_flags.assign(grid.beats_s.size(), true);
    return grid;
  }
  if (!it->is_array() || it->size() != times.size()) {
    schema_error(source, "/beats/downbeats", "expected a boolean array matching times_s");
  }
  for (std::size_t i = 0; i < it->size(); ++i) {
    if (!(*it)[i].is_boolean()) {
      schema_error(source, "/beats/downbeats/" + std::to_string(i), "expected a boolean");
    }
    grid.downbeat_flags.push_back((*it)[i].get<bool>());
  }
  return grid;
}

json beat_grid_to_json(const BeatGrid& grid) {
  json doc = json::object();
  doc["times_s"] = grid.beats_s;
  json flags = json::array();
  for (bool b : grid.downbeat_flags) flags.push_back(b);
  doc["downbeats"] = std::move(flags);
  return doc;
}

SongStructure song_from_json(const json& doc, const std::string& source) {
  SongStructure song;
  if (!doc.is_object()) schema_error(source, "", "expected a JSON object");
  if (auto it = doc.find("song_id"); it != doc.end()) song.song_id = as_id(*it, source, "/song_id");

  const json& sections = require(doc, "sections", source, "");
  if (!sections.is_array()) schema_error(source, "/sections", "expected an array");
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const std::string ptr = "/sections/" + std::to_string(i);
    const json& s = sections[i];
    Segment seg;
    seg.id = as_id(require(s, "id", source, ptr), source, ptr + "/id");
    if (auto it = s.find("type"); it != s.end()) {
      if (!it->is_string()) schema_error(source, ptr + "/type", "expected a string");
      seg.type_label = it->get<std::string>();
    } else {
      seg.type_label = "other";
    }
    seg.section_type = section_type_from_label(seg.type_label);
    seg.start_s = as_number(require(s, "start_s", source, ptr), source, ptr + "/start_s");
    seg.end_s = as_number(require(s, "end_s", source, ptr), source, ptr + "/end_s");
    seg.duration_s = seg.end_s - seg.start_s;
    seg.saliency_raw = as_int(require(s, "saliency", source, ptr), source, ptr + "/saliency");
    if (auto it = s.find("group_id"); it != s.end() && !it->is_null()) {
      seg.group_id = as_id(*it, source, ptr + "/group_id");
    }
    if (auto it = s.find("lyrics"); it != s.end() && !it->is_null()) {
      if (!it->is_string()) schema_error(source, ptr + "/lyrics", "expected a string");
      seg.lyric_text = it->get<std::string>();
    }
    if (auto it = s.find("assigned_action"); it != s.end() && !it->is_null()) {
      if (!it->is_string()) schema_error(source, ptr + "/assigned_action", "expected a string");
      std::string label = it->get<std::string>();
      if (!parse_action_label(label)) {
        schema_error(source, ptr + "/assigned_action", "unknown action label '" + label + "'");
      }
      seg.assigned_action = std::move(label);
    }
    song.segments.push_back(std::move(seg));
  }

  if (auto git = doc.find("groups"); git != doc.end()) {
    if (!git->is_array()) schema_error(source, "/groups", "expected an array");
    for (std::size_t i = 0; i < git->size(); ++i) {
      const std::string ptr = "/groups/" + std::to_string(i);
      const json& g = (*git)[i];
      SharingGroup group;
      group.id = as_id(require(g, "id", source, ptr), source, ptr + "/id");
      group.owner_segment_id = as_id(require(g, "owner", source, ptr), source, ptr + "/owner");
      const json& members = require(g, "members", source, ptr);
      if (!members.is_array()) schema_error(source, ptr + "/members", "expected an array");
      for (std::size_t j = 0; j < members.size(); ++j) {
        group.member_segment_ids.push_back(
            as_id(members[j], source, ptr + "/members/" + std::to_string(j)));
      }
      group.shared_duration_s =
          as_number(require(g, "shared_s", source, ptr), source, ptr + "/shared_s");
      const json& unique = require(g, "unique_s", source, ptr);
      if (!unique.is_array()) schema_error(source, ptr + "/unique_s", "expected an array");
      for (std::size_t j = 0; j < unique.size(); ++j) {
        group.unique_durations_s.push_back(
            as_number(unique[j], source, ptr + "/unique_s/" + std::to_string(j)));
      }
      if (auto it = g.find("back_reference"); it != g.end()) {
        if (!it->is_boolean()) schema_error(source, ptr + "/back_reference", "expected a boolean");
        group.back_reference = it->get<bool>();
      }
      // Member saliencies are not duplicated in the file; they come from
      // the section rows. Unknown members are left for validate_song.
      for (const auto& member : group.member_segment_ids) {
        const Segment* seg = song.find_segment(member);
        group.member_saliencies.push_back(seg != nullptr ? seg->saliency_raw : 0);
      }
      song.groups.push_back(std::move(group));
    }
  }

  if (auto it = doc.find("beats"); it != doc.end() && !it->is_null()) {
    song.beat_grid = beat_grid_from_json(*it, source);
  }
  if (auto it = doc.find("characters"); it != doc.end()) {
    song.characters = string_map(*it, source, "/characters");
  }
  if (auto it = doc.find("scenes"); it != doc.end()) {
    song.scenes = string_map(*it, source, "/scenes");
  }
  return song;
}

json song_to_json(const SongStructure& song) {
  json doc = json::object();
  doc["song_id"] = song.song_id;
  json sections = json::array();
  for (const auto& seg : song.segments) {
    json s = json::object();
    s["id"] = seg.id;
    s["type"] = seg.type_label.empty() ? std::string(to_string(seg.section_type)) : seg.type_label;
    s["start_s"] = seg.start_s;
    s["end_s"] = seg.end_s;
    s["saliency"] = seg.saliency_raw;
    if (seg.group_id) s["group_id"] = *seg.group_id;
    if (seg.lyric_text) s["lyrics"] = *seg.lyric_text;
    if (seg.assigned_action) s["assigned_action"] = *seg.assigned_action;
    sections.push_back(std::move(s));
  }
  doc["sections"] = std::move(sections);
  json groups = json::array();
  for (const auto& g : song.groups) {
    json j = json::object();
    j["id"] = g.id;
    j["owner"] = g.owner_segment_id;
    j["members"] = g.member_segment_ids;
    j["shared_s"] = g.shared_duration_s;
    j["unique_s"] = g.unique_durations_s;
    if (g.back_reference) j["back_reference"] = true;
    groups.push_back(std::move(j));
  }
  doc["groups"] = std::move(groups);
  if (!song.beat_grid.empty()) doc["beats"] = beat_grid_to_json(song.beat_grid);
  if (!song.characters.empty()) doc["characters"] = song.characters;
  if (!song.scenes.empty()) doc["scenes"] = song.scenes;
  return doc;
}

SongStructure read_song(const std::filesystem::path& path) {
  return song_from_json(read_json_file(path), path.string());
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

CsvTable parse_csv(std::string_view text, const std::string& source) {
  CsvTable table;
  int line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    ++line_no;
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    if (trim(line).empty()) continue;
    auto cells = split_row(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError(source,
                       "expected " + std::to_string(table.header.size()) + " columns, found " +
                           std::to_string(cells.size()),
                       line_no);
    }
    table.rows.push_back(std::move(cells));
    table.row_lines.push_back(line_no);
  }
  if (!have_header) throw ParseError(source, "missing header row", 1);
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_text_file(path), path.string());
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return std::to_string(value);
  return std::string(buf, ptr);
}

}  // namespace mvplan::io
