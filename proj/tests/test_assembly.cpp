#include <cmath>

#include "doctest.h"
#include "mvplan/assembly.hpp"
#include "mvplan/error.hpp"
#include "mvplan/io.hpp"
#include "support.hpp"

using namespace mvplan;

namespace {

BeatGrid grid_of(std::vector<double> beats, std::vector<bool> down) {
  BeatGrid g;
  g.beats_s = std::move(beats);
  g.downbeat_flags = std::move(down);
  return g;
}

std::vector<double> snapped(const std::vector<TimelineCut>& cuts) {
  std::vector<double> out;
  for (const auto& c : cuts) out.push_back(c.snapped_boundary_s);
  return out;
}

std::map<std::string, double> exact_clips(const SongStructure& song) {
  std::map<std::string, double> clips;
  for (const auto& s : song.segments) clips[s.id] = s.duration_s;
  return clips;
}

}  // namespace

TEST_CASE("snap examples") {
  const auto g = grid_of({10.0, 10.5}, {true, true});
  SnapOptions opt;
  const std::vector<double> exact{10.0};
  auto cuts = snap_boundaries(exact, g, opt);
  CHECK(cuts[0].snapped_boundary_s == 10.0);
  CHECK(cuts[0].snapped_to == 0u);

  const std::vector<double> off{10.3};
  cuts = snap_boundaries(off, g, opt);
  CHECK(cuts[0].snapped_boundary_s == 10.5);
  CHECK(cuts[0].adjustment_s == doctest::Approx(0.2));

  opt.tolerance_s = 0.1;
  cuts = snap_boundaries(off, g, opt);
  CHECK(cuts[0].snapped_boundary_s == 10.3);
  CHECK_FALSE(cuts[0].snapped_to.has_value());
}

TEST_CASE("downbeat preference and collisions") {
  const auto g = grid_of({10.0, 10.5}, {false, true});
  SnapOptions opt;
  const std::vector<double> b{10.1};
  CHECK(snap_boundaries(b, g, opt)[0].snapped_boundary_s == 10.0);  // 10.5 is 0.4 away
  const std::vector<double> b2{10.3};
  CHECK(snap_boundaries(b2, g, opt)[0].snapped_boundary_s == 10.5);

  const auto g2 = grid_of({10.0, 10.4}, {false, true});
  const std::vector<double> b3{10.18};
  CHECK(snap_boundaries(b3, g2, opt)[0].snapped_boundary_s == 10.4);
  opt.prefer_downbeats = false;
  CHECK(snap_boundaries(b3, g2, opt)[0].snapped_boundary_s == 10.0);
  opt.downbeats_only = true;
  CHECK(snap_boundaries(b3, g2, opt)[0].snapped_boundary_s == 10.4);

  // Both cuts want 10.0; the nearer keeps it, the other stays put.
  const auto one = grid_of({10.0}, {true});
  const std::vector<double> pair{9.9, 10.15};
  const auto cuts = snap_boundaries(pair, one, SnapOptions{});
  CHECK(cuts[0].snapped_boundary_s == 10.0);
  CHECK(cuts[1].snapped_boundary_s == 10.15);
  CHECK_FALSE(cuts[1].snapped_to.has_value());

  const std::vector<double> unordered{2.0, 1.0};
  CHECK_THROWS_AS(snap_boundaries(unordered, one, SnapOptions{}), std::invalid_argument);
  SnapOptions neg;
  neg.tolerance_s = -0.1;
  CHECK_THROWS_AS(snap_boundaries(pair, one, neg), std::invalid_argument);
}

TEST_CASE("snap properties on 500 random timelines") {
  SplitMix64 rng(2024);
  for (int i = 0; i < 500; ++i) {
    CAPTURE(i);
    const auto bounds = mvtest::random_boundaries(rng, 2 + rng.below(20), 0.05, 3.0);
    const double period = rng.uniform(0.2, 0.8);
    const auto grid = mvtest::regular_grid(period, bounds.back() + 2.0, 4, rng.uniform(0.0, period));
    SnapOptions opt;
    opt.tolerance_s = rng.uniform(0.0, 0.4);
    opt.prefer_downbeats = rng.below(2) == 1;
    opt.downbeats_only = rng.below(4) == 0;

    const auto first = snap_boundaries(bounds, grid, opt);
    const auto s1 = snapped(first);
    for (std::size_t k = 0; k < first.size(); ++k) {
      CHECK(std::abs(first[k].adjustment_s) <= opt.tolerance_s + 1e-12);
      if (k > 0) CHECK(s1[k] > s1[k - 1]);
    }
    const auto second = snap_boundaries(s1, grid, opt);
    CHECK(snapped(second) == s1);
  }
}

TEST_CASE("trim and extend examples") {
  auto e = trim_extend(5.0, 4.6, ExtendPolicy::kHold);
  CHECK(e.kind == EditPlan::Kind::kTrim);
  CHECK(e.amount_s == doctest::Approx(0.4));
  CHECK(e.result_len_s() == 4.6);

  e = trim_extend(4.0, 4.6, ExtendPolicy::kHold);
  CHECK(e.kind == EditPlan::Kind::kExtend);
  CHECK(e.amount_s == doctest::Approx(0.6));
  CHECK(e.policy == ExtendPolicy::kHold);

  CHECK(trim_extend(4.0, 4.0, ExtendPolicy::kLoop).kind == EditPlan::Kind::kNone);
  CHECK_THROWS_AS(trim_extend(3.0, 5.0, ExtendPolicy::kHold, 1.5), ValidationError);
  CHECK_NOTHROW(trim_extend(3.0, 4.5, ExtendPolicy::kHold, 1.5));
}

TEST_CASE("120 BPM fixture snaps near-downbeat cuts onto downbeats") {
  const auto song = io::read_song(mvtest::fixture("song_120bpm.json"));
  const auto alloc = plan_song(song, CostModel{}, QualityFactors{}, 10.0);
  const auto t = assemble_timeline(song, alloc, exact_clips(song), song.beat_grid, AssemblyConfig{});
  REQUIRE(t.cuts.size() == 4);
  for (const auto& c : t.cuts) {
    REQUIRE(c.snapped_to.has_value());
    CHECK(song.beat_grid.downbeat_flags[*c.snapped_to]);
    CHECK(std::fmod(c.snapped_boundary_s, 2.0) == doctest::Approx(0.0));
  }
  CHECK(t.assembled_duration_s() == doctest::Approx(song.total_duration_s()));
}

TEST_CASE("timeline invariants") {
  const auto song = io::read_song(mvtest::fixture("song.json"));
  const auto alloc = plan_song(song, CostModel{}, QualityFactors{}, 1.71);
  const auto clips = exact_clips(song);
  const AssemblyConfig cfg;
  const auto t = assemble_timeline(song, alloc, clips, song.beat_grid, cfg);
  REQUIRE(t.entries.size() == song.segments.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    const auto& e = t.entries[i];
    sum += e.out_s - e.in_s;
    CHECK(e.edit.result_len_s() == doctest::Approx(e.out_s - e.in_s));
    if (i > 0) CHECK(e.in_s == t.entries[i - 1].out_s);
  }
  CHECK(std::abs(sum - song.total_duration_s()) <= cfg.snap.tolerance_s * song.segments.size());

  // No grid: nothing snaps, nothing moves.
  const auto bare = assemble_timeline(song, alloc, clips, BeatGrid{}, cfg);
  CHECK(bare.total_abs_adjustment_s() == 0.0);
  for (const auto& c : bare.cuts) CHECK_FALSE(c.snapped_to.has_value());

  // Boundaries already on downbeats do not move.
  const std::vector<double> on_grid{2.0, 6.0, 8.0, 14.0};
  const auto cuts = snap_boundaries(on_grid, mvtest::regular_grid(0.5, 20.0, 4), SnapOptions{});
  for (const auto& c : cuts) CHECK(c.adjustment_s == 0.0);

  auto missing = clips;
  missing.erase("s07");
  try {
    (void)assemble_timeline(song, alloc, missing, song.beat_grid, cfg);
    FAIL("expected missing clip error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("s07") != std::string::npos);
  }
}
