#include "mvplan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "mvplan/error.hpp"
#include "mvplan/rng.hpp"

namespace mvplan::stats {

PairedSample::PairedSample(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size()) {
    throw std::invalid_argument("paired sample: lengths differ (" + std::to_string(x_.size()) +
                                " vs " + std::to_string(y_.size()) + ")");
  }
  if (x_.size() < 2) throw std::invalid_argument("paired sample: need at least 2 pairs");
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) {
      throw std::invalid_argument("paired sample: non-finite value at index " + std::to_string(i));
    }
  }
}

std::vector<double> PairedSample::differences() const {
  std::vector<double> d(x_.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = x_[i] - y_[i];
  return d;
}

double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of empty vector");
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) throw std::invalid_argument("sample sd needs at least 2 values");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double normal_cdf(double z) {
  if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::normal_distribution<double>(), z);
}

double student_t_cdf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::students_t_distribution<double>(df), t);
}

double student_t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double tail =
      boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<double>(df), std::abs(t)));
  return std::min(1.0, 2.0 * tail);
}

namespace {

// t statistic for (numerator / standard error), with the zero-variance
// cases resolved the same way everywhere.
TTestResult finish_t(double numerator, double se, double df) {
  TTestResult r;
  r.df = df;
  if (se == 0.0) {
    r.degenerate = true;
    if (numerator == 0.0) {
      r.t = 0.0;
      r.p_two_sided = 1.0;
    } else {
      r.t = numerator > 0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
      r.p_two_sided = 0.0;
    }
    return r;
  }
  r.t = numerator / se;
  r.p_two_sided = student_t_two_sided_p(r.t, df);
  return r;
}

}  // namespace

TTestResult paired_t_test(const PairedSample& sample) {
  const auto d = sample.differences();
  const double n = static_cast<double>(d.size());
  return finish_t(mean(d), sample_sd(d) / std::sqrt(n), n - 1.0);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample) {
  std::vector<double> nonzero;
  for (double d : sample.differences()) {
    if (d != 0.0) nonzero.push_back(d);
  }
  WilcoxonResult r;
  r.n_used = nonzero.size();
  if (nonzero.empty()) {
    r.degenerate = true;
    return r;
  }

  std::vector<double> magnitudes(nonzero.size());
  for (std::size_t i = 0; i < nonzero.size(); ++i) magnitudes[i] = std::abs(nonzero[i]);
  const auto ranks = average_ranks(magnitudes);
  for (std::size_t i = 0; i < nonzero.size(); ++i) {
    (nonzero[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];
  }
  r.w = std::min(r.w_plus, r.w_minus);

  const std::size_t n = nonzero.size();
  if (n <= kWilcoxonExactLimit) {
    // Average ranks are multiples of 1/2, so doubled ranks are integers and
    // the null distribution of 2*W+ is a subset-sum count.
    std::vector<std::size_t> doubled(n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      doubled[i] = static_cast<std::size_t>(std::lround(2.0 * ranks[i]));
      total += doubled[i];
    }
    std::vector<double> count(total + 1, 0.0);
    count[0] = 1.0;
    std::size_t reach = 0;
    for (std::size_t k : doubled) {
      for (std::size_t s = reach + 1; s-- > 0;) {
        if (count[s] != 0.0) count[s + k] += count[s];
      }
      reach += k;
    }
    const std::size_t observed = static_cast<std::size_t>(std::lround(2.0 * r.w_plus));
    const double patterns = std::ldexp(1.0, static_cast<int>(n));
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t s = 0; s <= total; ++s) {
      if (s <= observed) lower += count[s];
      if (s >= observed) upper += count[s];
    }
    r.exact = true;
    r.p_two_sided = std::min(1.0, 2.0 * std::min(lower, upper) / patterns);
    return r;
  }

  r.exact = false;
  const double nn = static_cast<double>(n);
  const double mu = nn * (nn + 1.0) / 4.0;
  double tie_term = 0.0;
  {
    auto sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }
  }
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  const double z = std::max(0.0, std::abs(r.w_plus - mu) - 0.5) / std::sqrt(var);
  r.p_two_sided = std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
  return r;
}

double pearson(const PairedSample& sample) {
  const double mx = mean(sample.x());
  const double my = mean(sample.y());
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double dx = sample.x()[i] - mx;
    const double dy = sample.y()[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateError("pearson: constant vector");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double spearman(const PairedSample& sample) {
  auto rx = average_ranks(sample.x());
  auto ry = average_ranks(sample.y());
  auto all_tied = [](const std::vector<double>& r) {
    return std::all_of(r.begin(), r.end(), [&](double v) { return v == r.front(); });
  };
  if (all_tied(rx) || all_tied(ry)) throw DegenerateError("spearman: all values tied");
  return pearson(PairedSample(std::move(rx), std::move(ry)));
}

double cohens_d_paired(const PairedSample& sample) {
  const auto d = sample.differences();
  const double sd = sample_sd(d);
  if (sd == 0.0) throw DegenerateError("cohen's d: differences have zero variance");
  return mean(d) / sd;
}

double mae(const PairedSample& sample) {
  double sum = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) sum += std::abs(sample.x()[i] - sample.y()[i]);
  return sum / static_cast<double>(sample.size());
}

Normalized minmax_normalize(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("minmax_normalize: empty input");
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Normalized out;
  out.values.resize(scores.size());
  if (hi == lo) {
    out.degenerate = true;
    std::fill(out.values.begin(), out.values.end(), 0.5);
    return out;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) out.values[i] = (scores[i] - lo) / (hi - lo);
  return out;
}

TTestResult log_ratio_t_test(std::span<const double> q_high, std::span<const double> q_mid,
                             double rho0) {
  if (q_high.size() < 2 || q_mid.size() < 2) {
    throw std::invalid_argument("log-ratio t-test: each group needs at least 2 values");
  }
  if (!(rho0 > 0.0)) throw std::invalid_argument("log-ratio t-test: rho0 must be positive");
  auto logs = [](std::span<const double> v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0.0)) {
        throw std::invalid_argument("log-ratio t-test: non-positive value at index " + std::to_string(i));
      }
      out[i] = std::log(v[i]);
    }
    return out;
  };
  const auto lh = logs(q_high);
  const auto lm = logs(q_mid);
  const double nh = static_cast<double>(lh.size());
  const double nm = static_cast<double>(lm.size());
  const double vh = std::pow(sample_sd(lh), 2) / nh;
  const double vm = std::pow(sample_sd(lm), 2) / nm;
  const double se = std::sqrt(vh + vm);
  double df = nh + nm - 2.0;
  if (se > 0.0) {
    df = (vh + vm) * (vh + vm) / (vh * vh / (nh - 1.0) + vm * vm / (nm - 1.0));
  }
  double diff = mean(lh) - mean(lm) - std::log(rho0);
  // Differences at rounding level of an exact null are treated as zero.
  if (std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(std::log(rho0)))) diff = 0.0;
  return finish_t(diff, se, df);
}

double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

BootstrapResult bootstrap_ratio_ci(std::span<const double> q_high, std::span<const double> q_mid,
                                   double rho0, const BootstrapConfig& config) {
  if (q_high.empty() || q_mid.empty()) throw std::invalid_argument("bootstrap: empty group");
  if (config.iterations < 1000) throw std::invalid_argument("bootstrap: need at least 1000 iterations");
  if (!(config.confidence > 0.0 && config.confidence < 1.0)) {
    throw std::invalid_argument("bootstrap: confidence must lie in (0, 1)");
  }
  BootstrapResult out;
  const double mid_mean = mean(q_mid);
  if (mid_mean == 0.0) throw DegenerateError("bootstrap: mid group mean is zero");
  out.ratio = mean(q_high) / mid_mean;

  std::vector<double> ratios;
  ratios.reserve(config.iterations);
  for (std::size_t r = 0; r < config.iterations; ++r) {
    SplitMix64 rng(derive_seed(config.seed, r));
    double sh = 0.0;
    for (std::size_t i = 0; i < q_high.size(); ++i) sh += q_high[rng.below(q_high.size())];
    double sm = 0.0;
    for (std::size_t i = 0; i < q_mid.size(); ++i) sm += q_mid[rng.below(q_mid.size())];
    if (sm == 0.0) {
      ++out.discarded;
      continue;
    }
    ratios.push_back((sh / static_cast<double>(q_high.size())) / (sm / static_cast<double>(q_mid.size())));
  }
  out.replicates = ratios.size();
  if (ratios.empty()) throw DegenerateError("bootstrap: every replicate was discarded");
  std::sort(ratios.begin(), ratios.end());
  const double alpha = 1.0 - config.confidence;
  out.ci_low = percentile_sorted(ratios, alpha / 2.0);
  out.ci_high = percentile_sorted(ratios, 1.0 - alpha / 2.0);

  // Ratios that equal rho0 up to rounding count on both sides.
  const double slack = 1e-12 * std::abs(rho0);
  std::size_t at_or_below = 0;
  std::size_t at_or_above = 0;
  for (double v : ratios) {
    if (v <= rho0 + slack) ++at_or_below;
    if (v >= rho0 - slack) ++at_or_above;
  }
  const double n = static_cast<double>(ratios.size());
  out.p_boot = std::min(1.0, 2.0 * std::min(at_or_below / n, at_or_above / n));
  return out;
}

}  // namespace mvplan::stats
