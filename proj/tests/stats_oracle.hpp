#pragma once

// Textbook reference implementations used to check the stats kernel.
// They share no code with src/stats.cpp: distribution functions come from
// the incomplete beta continued fraction and std::erfc, ranks are counted
// pairwise and the exact Wilcoxon law is enumerated sign by sign.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

inline double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

inline double mean(const std::vector<double>& v) { return sum(v) / static_cast<double>(v.size()); }

// Computational formula: (sum x^2 - n * mean^2) / (n - 1).
inline double sd(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = mean(v);
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(std::max(0.0, (sq - n * m * m) / (n - 1.0)));
}

// Continued fraction for the regularised incomplete beta (modified Lentz).
inline double betacf(double a, double b, double x) {
  const double tiny = 1e-300;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 1000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((a - 1.0 + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + 1.0 + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return h;
  }
  throw std::runtime_error("betacf did not converge");
}

inline double inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                                b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

// P(|T| >= |t|) for Student t with df degrees of freedom.
inline double t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return std::min(1.0, inc_beta(df / 2.0, 0.5, df / (df + t * t)));
}

inline double t_cdf(double t, double df) {
  const double half = 0.5 * t_two_sided(t, df);
  return t >= 0.0 ? 1.0 - half : half;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline std::vector<double> diffs(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  return d;
}

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

inline TTest paired_t(const std::vector<double>& x, const std::vector<double>& y) {
  const auto d = diffs(x, y);
  const double n = static_cast<double>(d.size());
  TTest r;
  r.t = mean(d) / (sd(d) / std::sqrt(n));
  r.df = n - 1.0;
  r.p = t_two_sided(r.t, r.df);
  return r;
}

// rank_i = 1 + #{j : v_j < v_i} + (#{j : v_j == v_i} - 1) / 2
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0;
    double equal = 0.0;
    for (double w : v) {
      if (w < v[i]) less += 1.0;
      if (w == v[i]) equal += 1.0;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

inline double cohens_d(const std::vector<double>& x, const std::vector<double>& y) {
  const auto d = diffs(x, y);
  return mean(d) / sd(d);
}

inline double mae(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
  return s / static_cast<double>(x.size());
}

struct Wilcoxon {
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

// Signed-rank test by brute force over all 2^n sign patterns of the
// observed absolute ranks.
inline Wilcoxon wilcoxon_enumerated(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> d;
  for (double v : diffs(x, y)) {
    if (v != 0.0) d.push_back(v);
  }
  Wilcoxon r;
  r.n = d.size();
  std::vector<double> mags(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mags[i] = std::abs(d[i]);
  const auto rk = ranks(mags);
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? r.w_plus : r.w_minus) += rk[i];
  const std::uint64_t patterns = std::uint64_t{1} << d.size();
  double le = 0.0, ge = 0.0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (mask >> i & 1U) w += rk[i];
    }
    if (w <= r.w_plus + 1e-9) le += 1.0;
    if (w >= r.w_plus - 1e-9) ge += 1.0;
  }
  r.p = std::min(1.0, 2.0 * std::min(le, ge) / static_cast<double>(patterns));
  return r;
}

// Large-sample form with tie and continuity correction.
inline double wilcoxon_normal_p(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> d;
  for (double v : diffs(x, y)) {
    if (v != 0.0) d.push_back(v);
  }
  const double n = static_cast<double>(d.size());
  std::vector<double> mags(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mags[i] = std::abs(d[i]);
  const auto rk = ranks(mags);
  double w_plus = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > 0) w_plus += rk[i];
  }
  double ties = 0.0;
  for (std::size_t i = 0; i < mags.size(); ++i) {
    double t = 0.0;
    for (double m : mags) {
      if (m == mags[i]) t += 1.0;
    }
    ties += (t * t * t - t) / t;  // per member, so a block of t adds t^3 - t
  }
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ties / 48.0;
  const double z = std::max(0.0, std::abs(w_plus - n * (n + 1.0) / 4.0) - 0.5) / std::sqrt(var);
  return std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
}

inline std::vector<double> minmax(const std::vector<double>& v) {
  const double lo = *std::min_element(v.begin(), v.end());
  const double hi = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size(), 0.5);
  if (hi == lo) return out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - lo) / (hi - lo);
  return out;
}

// Welch t on logs against log(rho0).
inline TTest welch_log(const std::vector<double>& hi, const std::vector<double>& mid, double rho0) {
  std::vector<double> lh, lm;
  for (double v : hi) lh.push_back(std::log(v));
  for (double v : mid) lm.push_back(std::log(v));
  const double nh = static_cast<double>(lh.size());
  const double nm = static_cast<double>(lm.size());
  const double a = sd(lh) * sd(lh) / nh;
  const double b = sd(lm) * sd(lm) / nm;
  TTest r;
  r.t = (mean(lh) - mean(lm) - std::log(rho0)) / std::sqrt(a + b);
  r.df = (a + b) * (a + b) / (a * a / (nh - 1.0) + b * b / (nm - 1.0));
  r.p = t_two_sided(r.t, r.df);
  return r;
}

// Hyndman-Fan type 7.
inline double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

}  // namespace oracle
