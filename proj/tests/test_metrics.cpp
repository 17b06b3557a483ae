#include <cmath>

#include "doctest.h"
#include "mvplan/error.hpp"
#include "mvplan/io.hpp"
#include "mvplan/metrics.hpp"
#include "support.hpp"

using namespace mvplan;

namespace {

std::vector<SegmentQuality> judge_scores(std::initializer_list<double> v) {
  std::vector<SegmentQuality> out;
  int i = 0;
  for (double x : v) out.push_back(make_quality("s" + std::to_string(++i), x, QualityScale::kJudge1To5));
  return out;
}

CostLedger ledger(std::initializer_list<double> v) {
  CostLedger l;
  int i = 0;
  for (double x : v) l.entries.push_back({"s" + std::to_string(++i), x});
  return l;
}

}  // namespace

TEST_CASE("CQR hand example") {
  // (5/5 * 4 + 3/5 * 3 + 1/5 * 2) / (0.5 + 0.3 + 0.2) = 6.2
  const std::vector<int> m{5, 3, 1};
  const auto q = judge_scores({4.0, 3.0, 2.0});
  CHECK(compute_cqr(m, q, ledger({0.5, 0.3, 0.2})) == doctest::Approx(6.2));
}

TEST_CASE("CQR scales inversely with cost") {
  SplitMix64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.below(10);
    std::vector<int> m;
    std::vector<SegmentQuality> q;
    CostLedger l;
    for (std::size_t j = 0; j < n; ++j) {
      m.push_back(1 + static_cast<int>(rng.below(5)));
      q.push_back(make_quality("x", rng.uniform(1.0, 5.0), QualityScale::kJudge1To5));
      l.entries.push_back({"x", rng.uniform(0.0, 1.0)});
    }
    const double base = compute_cqr(m, q, l);
    CHECK(compute_cqr(m, q, l.scaled(2.0)) == doctest::Approx(base / 2.0));
    CHECK(l.scaled(3.0).total() == doctest::Approx(3.0 * l.total()));
  }
}

TEST_CASE("CQR rejects degenerate and mismatched inputs") {
  const std::vector<int> m{3, 3};
  CHECK_THROWS_AS(compute_cqr(m, judge_scores({3, 3}), ledger({0.0, 0.0})), DegenerateError);
  CHECK_THROWS_AS(compute_cqr(m, judge_scores({3}), ledger({0.1, 0.1})), std::invalid_argument);
  std::vector<SegmentQuality> mixed = judge_scores({3, 3});
  mixed[1] = make_quality("s2", 0.5, QualityScale::kNormalized01);
  CHECK_THROWS_AS(compute_cqr(m, mixed, ledger({0.1, 0.1})), std::invalid_argument);
  CHECK_THROWS_AS(make_quality("s", 5.5, QualityScale::kJudge1To5), std::invalid_argument);
  CHECK_THROWS_AS(make_quality("s", 0.5, QualityScale::kJudge1To5), std::invalid_argument);
  CHECK_THROWS_AS(make_quality("s", 1.5, QualityScale::kNormalized01), std::invalid_argument);
}

TEST_CASE("ledger charges shared prefixes to owners only") {
  const auto song = io::read_song(mvtest::fixture("song.json"));
  const CostModel cm;
  const auto alloc = plan_song(song, cm, QualityFactors{}, 1.71);
  const auto l = ledger_from_allocation(alloc);
  CHECK(l.entries.size() == song.segments.size());
  CHECK(l.total() == doctest::Approx(alloc.total_cost_usd));
  for (const auto& m : alloc.segments()) {
    if (m.role != MemberRole::kConsumer) continue;
    const double suffix = cost(m.suffix_action, m.unique_s, cm);
    const auto it = std::find_if(l.entries.begin(), l.entries.end(),
                                 [&](const LedgerEntry& e) { return e.segment_id == m.segment_id; });
    REQUIRE(it != l.entries.end());
    CHECK(it->cost_usd == doctest::Approx(suffix));
  }
}

TEST_CASE("utility report reproduces solver utility") {
  SplitMix64 rng(31);
  const CostModel cm;
  const QualityFactors q;
  for (int i = 0; i < 200; ++i) {
    const auto song = mvtest::random_song(rng);
    const auto alloc = plan_song(song, cm, q, 1.05 * mvtest::all_high_cost(song, cm));
    const auto report = utility_report(alloc, q);
    CHECK(report.entries.size() == song.segments.size());
    CHECK(report.total == doctest::Approx(alloc.total_utility));
  }
}
