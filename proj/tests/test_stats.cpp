#include <cmath>
#include <vector>

#include "doctest.h"
#include "mvplan/error.hpp"
#include "mvplan/rng.hpp"
#include "mvplan/stats.hpp"
#include "stats_oracle.hpp"
#include "support.hpp"

using namespace mvplan;
namespace st = mvplan::stats;

namespace {

constexpr double kTol = 1e-9;

struct Dataset {
  std::vector<double> x;
  std::vector<double> y;
};

// Every third dataset lives on the 1..5 rating grid so ties and zero
// differences show up; the rest are continuous.
Dataset random_dataset(std::uint64_t seed, std::size_t min_n, std::size_t max_n) {
  SplitMix64 rng(seed);
  Dataset d;
  const std::size_t n = min_n + rng.below(max_n - min_n + 1);
  const bool grid = seed % 3 == 0;
  const double shift = rng.uniform(-0.8, 0.8);
  for (std::size_t i = 0; i < n; ++i) {
    if (grid) {
      d.x.push_back(1.0 + static_cast<double>(rng.below(5)));
      d.y.push_back(std::clamp(d.x.back() + static_cast<double>(rng.below(3)) - 1.0, 1.0, 5.0));
    } else {
      d.x.push_back(rng.uniform(0.0, 5.0));
      d.y.push_back(d.x.back() * rng.uniform(0.6, 1.2) + shift + rng.uniform(-1.0, 1.0));
    }
  }
  return d;
}

bool has_spread(const std::vector<double>& v) {
  return std::any_of(v.begin(), v.end(), [&](double a) { return a != v.front(); });
}

}  // namespace

TEST_CASE("distribution functions hit reference grid points") {
  CHECK(st::normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(st::normal_cdf(2.575829303548901) == doctest::Approx(0.995).epsilon(1e-12));
  CHECK(st::normal_cdf(1.6448536269514722) == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(st::normal_cdf(0.0) == 0.5);
  CHECK(st::student_t_cdf(2.228138851986, 10) == doctest::Approx(0.975).epsilon(1e-9));
  CHECK(st::student_t_cdf(12.706204736, 1) == doctest::Approx(0.975).epsilon(1e-9));
  CHECK(st::student_t_cdf(2.015048373, 5) == doctest::Approx(0.95).epsilon(1e-9));
  CHECK(st::student_t_two_sided_p(2.228138851986, 10) == doctest::Approx(0.05).epsilon(1e-8));
  CHECK(oracle::t_cdf(2.228138851986, 10) == doctest::Approx(0.975).epsilon(1e-9));
  CHECK(oracle::normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
}

TEST_CASE("distribution functions match the oracle on random arguments") {
  SplitMix64 rng(20240611);
  for (int i = 0; i < 200; ++i) {
    const double z = rng.uniform(-6.0, 6.0);
    CHECK(std::abs(st::normal_cdf(z) - oracle::normal_cdf(z)) <= kTol);
    const double t = rng.uniform(-8.0, 8.0);
    const double df = 1.0 + rng.uniform(0.0, 60.0);
    CHECK(std::abs(st::student_t_cdf(t, df) - oracle::t_cdf(t, df)) <= kTol);
    CHECK(std::abs(st::student_t_two_sided_p(t, df) - oracle::t_two_sided(t, df)) <= kTol);
  }
}

TEST_CASE("every primitive matches its oracle on 100 random datasets") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    CAPTURE(seed);
    const auto d = random_dataset(seed, 5, 40);
    const st::PairedSample s(d.x, d.y);

    CHECK(std::abs(st::mean(d.x) - oracle::mean(d.x)) <= kTol);
    CHECK(std::abs(st::sample_sd(d.x) - oracle::sd(d.x)) <= kTol);
    CHECK(std::abs(st::mae(s) - oracle::mae(d.x, d.y)) <= kTol);

    const auto r = st::average_ranks(d.x);
    const auto ro = oracle::ranks(d.x);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == ro[i]);

    const auto mm = st::minmax_normalize(d.y);
    const auto mmo = oracle::minmax(d.y);
    for (std::size_t i = 0; i < mm.values.size(); ++i) CHECK(std::abs(mm.values[i] - mmo[i]) <= kTol);

    const auto diff = oracle::diffs(d.x, d.y);
    if (oracle::sd(diff) > 1e-6) {
      const auto t = st::paired_t_test(s);
      const auto to = oracle::paired_t(d.x, d.y);
      CHECK(std::abs(t.t - to.t) <= kTol * std::max(1.0, std::abs(to.t)));
      CHECK(t.df == to.df);
      CHECK(std::abs(t.p_two_sided - to.p) <= kTol);
      CHECK(std::abs(st::cohens_d_paired(s) - oracle::cohens_d(d.x, d.y)) <= kTol);
    }
    if (has_spread(d.x) && has_spread(d.y)) {
      CHECK(std::abs(st::pearson(s) - oracle::pearson(d.x, d.y)) <= kTol);
      CHECK(std::abs(st::spearman(s) - oracle::spearman(d.x, d.y)) <= kTol);
    }

    const auto w = st::wilcoxon_signed_rank(s);
    if (w.n_used > 0 && w.n_used <= 16) {
      const auto wo = oracle::wilcoxon_enumerated(d.x, d.y);
      CHECK(w.exact);
      CHECK(std::abs(w.w_plus - wo.w_plus) <= kTol);
      CHECK(std::abs(w.w_minus - wo.w_minus) <= kTol);
      CHECK(std::abs(w.p_two_sided - wo.p) <= kTol);
    } else if (w.n_used > st::kWilcoxonExactLimit) {
      CHECK_FALSE(w.exact);
      CHECK(std::abs(w.p_two_sided - oracle::wilcoxon_normal_p(d.x, d.y)) <= kTol);
    }

    std::vector<double> hi, mid;
    for (double v : d.x) hi.push_back(v + 0.5);
    for (double v : d.y) mid.push_back(std::abs(v) + 0.25);
    const auto lt = st::log_ratio_t_test(hi, mid, 1.4286);
    const auto lto = oracle::welch_log(hi, mid, 1.4286);
    CHECK(std::abs(lt.t - lto.t) <= kTol * std::max(1.0, std::abs(lto.t)));
    CHECK(std::abs(lt.df - lto.df) <= kTol * lto.df);
    CHECK(std::abs(lt.p_two_sided - lto.p) <= kTol);

    auto sorted = d.y;
    std::sort(sorted.begin(), sorted.end());
    for (double q : {0.0, 0.025, 0.5, 0.975, 1.0}) {
      CHECK(std::abs(st::percentile_sorted(sorted, q) - oracle::percentile(d.y, q)) <= kTol);
    }
  }
}

TEST_CASE("exact Wilcoxon equals sign-pattern enumeration for every n up to 10") {
  for (std::size_t n = 1; n <= 10; ++n) {
    for (std::uint64_t rep = 0; rep < 30; ++rep) {
      SplitMix64 rng(n * 1000 + rep);
      std::vector<double> x, y;
      for (std::size_t i = 0; i < std::max<std::size_t>(n, 2); ++i) {
        x.push_back(static_cast<double>(rng.below(6)));
        y.push_back(static_cast<double>(rng.below(6)));
      }
      const auto w = st::wilcoxon_signed_rank(st::PairedSample(x, y));
      if (w.n_used == 0) {
        CHECK(w.degenerate);
        continue;
      }
      const auto wo = oracle::wilcoxon_enumerated(x, y);
      CHECK(w.w_plus == wo.w_plus);
      CHECK(std::abs(w.p_two_sided - wo.p) <= kTol);
    }
  }
}

TEST_CASE("Wilcoxon textbook value") {
  // Differences 1..8 all positive: W- = 0, p = 2 / 2^8.
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> y(8, 0.0);
  const auto w = st::wilcoxon_signed_rank(st::PairedSample(x, y));
  CHECK(w.w_plus == 36.0);
  CHECK(w.w == 0.0);
  CHECK(w.p_two_sided == doctest::Approx(2.0 / 256.0));
}

TEST_CASE("degenerate inputs are reported") {
  const st::PairedSample same({1, 2, 3}, {1, 2, 3});
  const auto t = st::paired_t_test(same);
  CHECK(t.degenerate);
  CHECK(t.t == 0.0);
  CHECK(t.p_two_sided == 1.0);
  CHECK(st::wilcoxon_signed_rank(same).degenerate);
  CHECK_THROWS_AS(st::cohens_d_paired(same), DegenerateError);

  const st::PairedSample shifted({2, 3, 4}, {1, 2, 3});
  const auto ts = st::paired_t_test(shifted);
  CHECK(ts.degenerate);
  CHECK(std::isinf(ts.t));
  CHECK(ts.p_two_sided == 0.0);

  CHECK_THROWS_AS(st::pearson(st::PairedSample({1, 1, 1}, {1, 2, 3})), DegenerateError);
  CHECK_THROWS_AS(st::spearman(st::PairedSample({1, 2, 3}, {4, 4, 4})), DegenerateError);
  const auto flat = st::minmax_normalize(std::vector<double>{0.3, 0.3});
  CHECK(flat.degenerate);
  CHECK(flat.values == std::vector<double>{0.5, 0.5});

  CHECK_THROWS_AS(st::PairedSample({1, 2}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(st::PairedSample({1}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(st::PairedSample({1, NAN}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(st::log_ratio_t_test(std::vector<double>{1, 0}, std::vector<double>{1, 2}, 1.4),
                  std::invalid_argument);
}

TEST_CASE("log-ratio test is exactly null when the ratio equals rho0") {
  std::vector<double> hi{2.0, 4.0, 8.0};
  std::vector<double> mid{1.0, 2.0, 4.0};
  const auto t = st::log_ratio_t_test(hi, mid, 2.0);
  CHECK(t.t == 0.0);
  CHECK(t.p_two_sided == 1.0);
}

TEST_CASE("bootstrap is fixed by its seed") {
  const std::vector<double> hi{1.0, 0.62, 0.81, 0.55, 0.74, 0.69, 0.728};
  const std::vector<double> mid{0.0, 0.45, 0.61, 0.38, 0.52, 0.66, 0.41, 0.57, 0.49, 0.612, 0.49};
  st::BootstrapConfig cfg{10000, 7, 0.95};
  const auto a = st::bootstrap_ratio_ci(hi, mid, 1.4286, cfg);
  const auto b = st::bootstrap_ratio_ci(hi, mid, 1.4286, cfg);
  CHECK(a.ci_low == b.ci_low);
  CHECK(a.ci_high == b.ci_high);
  CHECK(a.p_boot == b.p_boot);
  CHECK(a.replicates + a.discarded == 10000);
  CHECK(a.ci_low < a.ratio);
  CHECK(a.ratio < a.ci_high);

  cfg.seed = 8;
  const auto c = st::bootstrap_ratio_ci(hi, mid, 1.4286, cfg);
  CHECK(c.ci_low != a.ci_low);

  cfg.iterations = 999;
  CHECK_THROWS_AS(st::bootstrap_ratio_ci(hi, mid, 1.4286, cfg), std::invalid_argument);
}

TEST_CASE("bootstrap endpoints are stable across seeds at 1e5 iterations") {
  const std::vector<double> hi{1.0, 0.62, 0.81, 0.55, 0.74, 0.69, 0.728};
  const std::vector<double> mid{0.0, 0.45, 0.61, 0.38, 0.52, 0.66, 0.41, 0.57, 0.49, 0.612, 0.49};
  const auto base = st::bootstrap_ratio_ci(hi, mid, 1.4286, {100000, 1, 0.95});
  for (std::uint64_t seed : {2, 3, 4}) {
    const auto other = st::bootstrap_ratio_ci(hi, mid, 1.4286, {100000, seed, 0.95});
    CHECK(std::abs(other.ci_low - base.ci_low) <= 0.01);
    CHECK(std::abs(other.ci_high - base.ci_high) <= 0.01);
  }
}

TEST_CASE("bootstrap percentiles follow the oracle on the retained replicates") {
  const std::vector<double> hi{0.8, 0.9, 0.7, 0.85};
  const std::vector<double> mid{0.5, 0.6, 0.55, 0.52, 0.58};
  const st::BootstrapConfig cfg{2000, 99, 0.9};
  std::vector<double> ratios;
  for (std::size_t r = 0; r < cfg.iterations; ++r) {
    SplitMix64 rng(derive_seed(cfg.seed, r));
    double sh = 0.0, sm = 0.0;
    for (std::size_t i = 0; i < hi.size(); ++i) sh += hi[rng.below(hi.size())];
    for (std::size_t i = 0; i < mid.size(); ++i) sm += mid[rng.below(mid.size())];
    ratios.push_back((sh / 4.0) / (sm / 5.0));
  }
  const auto b = st::bootstrap_ratio_ci(hi, mid, 1.4286, cfg);
  CHECK(std::abs(b.ci_low - oracle::percentile(ratios, 0.05)) <= kTol);
  CHECK(std::abs(b.ci_high - oracle::percentile(ratios, 0.95)) <= kTol);
}
