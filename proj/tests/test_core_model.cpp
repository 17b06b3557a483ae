#include <cmath>

#include "doctest.h"
#include "mvplan/documents.hpp"
#include "mvplan/error.hpp"
#include "mvplan/io.hpp"
#include "support.hpp"

using namespace mvplan;

namespace {

SongStructure two_chorus_song() {
  SongStructure song;
  song.song_id = "mini";
  const double edges[] = {0.0, 6.0, 14.0, 20.0};
  const int sal[] = {2, 5, 5};
  for (int i = 0; i < 3; ++i) {
    Segment s;
    s.id = "s" + std::to_string(i + 1);
    s.type_label = i == 0 ? "verse" : "chorus";
    s.section_type = section_type_from_label(s.type_label);
    s.start_s = edges[i];
    s.end_s = edges[i + 1];
    s.duration_s = s.end_s - s.start_s;
    s.saliency_raw = sal[i];
    song.segments.push_back(s);
  }
  song.segments[1].group_id = "g1";
  song.segments[2].group_id = "g1";
  SharingGroup g;
  g.id = "g1";
  g.owner_segment_id = "s2";
  g.member_segment_ids = {"s2", "s3"};
  g.shared_duration_s = 4.0;
  g.unique_durations_s = {4.0, 2.0};
  g.member_saliencies = {5, 5};
  song.groups.push_back(g);
  song.characters["lead"] = "asset://lead";
  song.scenes["stage"] = "asset://stage";
  return song;
}

}  // namespace

TEST_CASE("cost is linear in duration and free for reuse") {
  const CostModel cm;
  CHECK(cost(Action::kHigh, 94.0, cm) == doctest::Approx(2.85));
  CHECK(cost(Action::kMid, 94.0, cm) == doctest::Approx(0.7 * 2.85));
  CHECK(cost(Action::kReuse, 94.0, cm) == 0.0);
  CHECK(cost(Action::kHigh, 0.0, cm) == 0.0);
  SplitMix64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform(0.0, 30.0);
    const double b = rng.uniform(0.0, 30.0);
    CHECK(cost(Action::kHigh, a + b, cm) ==
          doctest::Approx(cost(Action::kHigh, a, cm) + cost(Action::kHigh, b, cm)));
  }
  CHECK_THROWS_AS(cost(Action::kMid, -1.0, cm), std::invalid_argument);
}

TEST_CASE("labels map onto the closed enums") {
  CHECK(section_type_from_label("Chorus") == SectionType::kChorus);
  CHECK(section_type_from_label("pre-chorus") == SectionType::kOther);
  CHECK(to_string(Action::kReuse) == "reuse");
  CHECK(io::parse_action_label("high_gen") == Action::kHigh);
  CHECK(io::parse_action_label("mid") == Action::kMid);
  CHECK_FALSE(io::parse_action_label("low").has_value());
}

TEST_CASE("a well-formed song validates") {
  CHECK(validate_song(two_chorus_song()).ok());
  CHECK(validate_song(io::read_song(mvtest::fixture("song.json"))).ok());
}

TEST_CASE("validation reports each broken invariant by code") {
  {
    auto s = two_chorus_song();
    s.segments[0].saliency_raw = 6;
    CHECK(validate_song(s).count("segment.saliency") == 1);
  }
  {
    auto s = two_chorus_song();
    s.segments[0].duration_s = 5.0;
    CHECK(validate_song(s).count("segment.span") == 1);
  }
  {
    auto s = two_chorus_song();
    s.segments[1].start_s = 5.0;
    s.segments[1].duration_s = 9.0;
    CHECK(validate_song(s).count("segment.overlap") == 1);
  }
  {
    auto s = two_chorus_song();
    s.segments[2].id = "s2";
    CHECK(validate_song(s).count("segment.duplicate_id") == 1);
  }
  {
    auto s = two_chorus_song();
    s.groups[0].unique_durations_s[1] = 3.0;  // 4 + 3 > 6
    const auto r = validate_song(s);
    CHECK(r.count("group.duration_budget") == 1);
    CHECK(r.violations.front().subject == "s3");
  }
  {
    auto s = two_chorus_song();
    s.groups[0].owner_segment_id = "s3";
    CHECK(validate_song(s).count("group.owner") == 1);
  }
  {
    auto s = two_chorus_song();
    s.groups[0].member_saliencies[0] = 4;
    CHECK(validate_song(s).count("group.saliency_mismatch") == 1);
  }
  {
    auto s = two_chorus_song();
    s.groups[0].member_segment_ids = {"s3", "s2"};
    s.groups[0].unique_durations_s = {2.0, 4.0};
    s.groups[0].owner_segment_id = "s3";
    CHECK(validate_song(s).count("group.order") == 1);
    s.groups[0].back_reference = true;
    CHECK(validate_song(s).ok());
  }
  {
    auto s = two_chorus_song();
    s.segments[0].group_id = "g9";
    CHECK(validate_song(s).count("segment.unknown_group") == 1);
  }
  {
    auto s = two_chorus_song();
    s.groups.push_back(s.groups[0]);
    s.groups[1].id = "g2";
    CHECK(validate_song(s).count("group.multiple_membership") == 2);
  }
  {
    auto s = two_chorus_song();
    s.beat_grid.beats_s = {0.0, 1.0};
    s.beat_grid.downbeat_flags = {false, false};
    CHECK(validate_song(s).count("beats.no_downbeat") == 1);
  }
}

TEST_CASE("validation does not modify its input") {
  const auto s = two_chorus_song();
  auto copy = s;
  (void)validate_song(copy);
  CHECK(copy == s);
}

TEST_CASE("persistent state from an allocation") {
  const auto song = two_chorus_song();
  const std::map<std::string, Action> assign{{"s1", Action::kMid}, {"s2", Action::kHigh}, {"s3", Action::kReuse}};
  const auto state = build_persistent_state(song, assign);
  REQUIRE(state.sharing_graph.size() == 1);
  CHECK(state.sharing_graph[0].owner == "s2");
  CHECK(state.sharing_graph[0].consumer == "s3");
  CHECK(state.identity_lib.at("lead") == "asset://lead");
  CHECK(state.environment_lib.at("stage") == "asset://stage");
  CHECK(state.motif_index.contains("motif/g1"));
  CHECK(check_state(state, song).ok());

  auto bad = assign;
  bad["s1"] = Action::kReuse;
  CHECK_THROWS_AS(build_persistent_state(song, bad), ValidationError);
  bad.erase("s1");
  CHECK_THROWS_AS(build_persistent_state(song, bad), ValidationError);

  auto edited = state;
  edited.action_assignments["s1"] = Action::kReuse;
  CHECK(check_state(edited, song).count("state.reuse_without_edge") == 1);
  edited = state;
  edited.sharing_graph.push_back({"s3", "s2", false});
  CHECK(check_state(edited, song).count("state.cycle") == 1);
}

TEST_CASE("song and state documents round-trip") {
  const auto song = io::read_song(mvtest::fixture("song.json"));
  const auto again = io::song_from_json(io::song_to_json(song), "memory");
  CHECK(again == song);

  const auto alloc = plan_song(song, CostModel{}, QualityFactors{}, 1.71);
  const auto state = build_persistent_state(song, alloc.assignments());
  CHECK(state_from_json(state_to_json(state), "memory") == state);

  SplitMix64 rng(12);
  for (int i = 0; i < 50; ++i) {
    const auto s = mvtest::random_song(rng);
    CHECK(io::song_from_json(io::song_to_json(s), "memory") == s);
  }
}

TEST_CASE("parse errors carry the file and line") {
  const std::string text = "{\n  \"song_id\": \"x\",\n  \"sections\": [\n    {\"id\": \"a\",, }\n  ]\n}\n";
  try {
    (void)io::parse_json_text(text, "broken.json");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.file() == "broken.json");
    CHECK(e.line() == 4);
    CHECK(std::string(e.what()).rfind("broken.json:4: ", 0) == 0);
  }
  CHECK_THROWS_AS(io::read_song("/nonexistent/song.json"), ParseError);

  auto doc = io::read_json_file(mvtest::fixture("song.json"));
  doc["sections"][0]["saliency"] = "high";
  CHECK_THROWS_AS(io::song_from_json(doc, "song.json"), ParseError);
  doc = io::read_json_file(mvtest::fixture("song.json"));
  doc["sections"][0]["assigned_action"] = "ultra";
  CHECK_THROWS_AS(io::song_from_json(doc, "song.json"), ParseError);
}

TEST_CASE("csv reader tracks source lines") {
  const auto t = io::parse_csv("a,b\n1,2\n\n3,4\n", "x.csv");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.row_lines == std::vector<int>{2, 4});
  CHECK(t.column("b") == 1u);
  CHECK_FALSE(t.column("c").has_value());
}
