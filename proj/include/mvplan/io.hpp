#pragma once

// Reading and writing the song-structure document (core.json) and the
// small helpers every other document reader builds on.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mvplan/core_model.hpp"

namespace mvplan::io {

using json = nlohmann::ordered_json;

// Parses a JSON file. Syntax errors become ParseError carrying the line.
json read_json_file(const std::filesystem::path& path);
json parse_json_text(std::string_view text, const std::string& source);

std::string read_text_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes: truncate + write + flush.
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Stable serialisation used for every emitted document (2-space indent,
// trailing newline).
std::string dump(const json& doc);

// Schema helpers shared by the document readers. Failures throw
// ParseError("source", "pointer: reason").
[[noreturn]] void schema_error(const std::string& source, const std::string& pointer,
                               const std::string& reason);
const json& require(const json& obj, const char* key, const std::string& source,
                    const std::string& pointer);
double as_number(const json& v, const std::string& source, const std::string& pointer);
std::string as_id(const json& v, const std::string& source, const std::string& pointer);
int as_int(const json& v, const std::string& source, const std::string& pointer);
std::map<std::string, std::string> string_map(const json& v, const std::string& source,
                                              const std::string& pointer);

// Accepted assigned_action labels: high, high_gen, mid, mid_gen, reuse.
// Anything else is rejected by the song parser.
std::optional<Action> parse_action_label(std::string_view label);

SongStructure song_from_json(const json& doc, const std::string& source);
json song_to_json(const SongStructure& song);
SongStructure read_song(const std::filesystem::path& path);

BeatGrid beat_grid_from_json(const json& doc, const std::string& source);
json beat_grid_to_json(const BeatGrid& grid);

// Minimal CSV support: comma separated, no quoting, header row required.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;  // 1-based source line of each row

  std::optional<std::size_t> column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, const std::string& source);
CsvTable read_csv(const std::filesystem::path& path);

// Formats a double with the shortest representation that round-trips.
std::string format_double(double value);

}  // namespace mvplan::io
