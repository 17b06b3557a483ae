#pragma once

// Statistical primitives used by the consistency and ratio-calibration
// pipelines. p-values are two-sided throughout. Standard deviations use
// the N-1 denominator.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mvplan::stats {

// Paired observations x[i], y[i]. Construction checks equal lengths,
// N >= 2 and finite values.
class PairedSample {
 public:
  PairedSample(std::vector<double> x, std::vector<double> y);

  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  std::size_t size() const { return x_.size(); }
  std::vector<double> differences() const;  // x - y

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

double mean(std::span<const double> v);
double sample_sd(std::span<const double> v);

double normal_cdf(double z);
double student_t_cdf(double t, double df);
// Two-sided tail probability P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
  bool degenerate = false;  // zero variance; t is 0 or +-inf
};

TTestResult paired_t_test(const PairedSample& sample);

struct WilcoxonResult {
  double w = 0.0;        // min(W+, W-)
  double w_plus = 0.0;   // sum of ranks of positive differences
  double w_minus = 0.0;  // sum of ranks of negative differences
  std::size_t n_used = 0;  // non-zero differences
  double p_two_sided = 1.0;
  bool exact = true;
  bool degenerate = false;  // every difference was zero
};

inline constexpr std::size_t kWilcoxonExactLimit = 25;

// Zero differences are dropped, ties get average ranks. Up to 25
// non-zero differences the p-value comes from the exact permutation
// distribution of W+ given the observed ranks; above that a normal
// approximation with continuity and tie correction is used.
WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample);

// 1-based average ranks.
std::vector<double> average_ranks(std::span<const double> v);

double pearson(const PairedSample& sample);
double spearman(const PairedSample& sample);
double cohens_d_paired(const PairedSample& sample);
double mae(const PairedSample& sample);

struct Normalized {
  std::vector<double> values;
  bool degenerate = false;  // constant input, all values set to 0.5
};

Normalized minmax_normalize(std::span<const double> scores);

// Welch two-sample t-test on log values of
// H0: mean(log high) - mean(log mid) = log(rho0).
TTestResult log_ratio_t_test(std::span<const double> q_high, std::span<const double> q_mid,
                             double rho0);

struct BootstrapConfig {
  std::size_t iterations = 10000;
  std::uint64_t seed = 0;
  double confidence = 0.95;
};

struct BootstrapResult {
  double ratio = 0.0;  // point estimate mean(high) / mean(mid)
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_boot = 1.0;
  std::size_t replicates = 0;  // retained
  std::size_t discarded = 0;   // resampled mid mean was zero
};

// Percentile bootstrap of mean(high) / mean(mid), resampling each group
// with replacement. Replicate r draws from its own stream seeded by
// derive_seed(seed, r), so the result is fixed by the seed.
BootstrapResult bootstrap_ratio_ci(std::span<const double> q_high, std::span<const double> q_mid,
                                   double rho0, const BootstrapConfig& config);

// Linear-interpolation percentile of sorted data, q in [0, 1].
double percentile_sorted(std::span<const double> sorted, double q);

}  // namespace mvplan::stats
