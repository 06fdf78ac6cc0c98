#include "fedforest/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fedforest/error.hpp"
#include "fedforest/random.hpp"

namespace fedforest::stats {

// --- distributions ---------------------------------------------------------

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

/// P(T > t) for Student's t, computed from the tail directly.
double student_t_sf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0 ? tail : 1.0 - tail;
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

void check_paired(const PairedSample& p) {
  if (p.a.size() != p.b.size()) throw StatsError("paired samples differ in length");
  if (p.a.size() < 2) throw StatsError("paired test needs at least 2 pairs");
  for (std::size_t i = 0; i < p.a.size(); ++i)
    if (!std::isfinite(p.a[i]) || !std::isfinite(p.b[i])) throw StatsError("non-finite value");
}

std::vector<double> differences(const PairedSample& p) {
  std::vector<double> d(p.a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = p.a[i] - p.b[i];
  return d;
}

/// Sum over tie groups of t^3 - t.
double tie_term(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const auto t = static_cast<double>(j - i);
    sum += t * t * t - t;
    i = j;
  }
  return sum;
}

/// Two-sided p from one-tailed exact probabilities.
double two_sided(double p_greater, double p_less) {
  return clamp01(2.0 * std::min(p_greater, p_less));
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw StatsError("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) { return 1.0 - student_t_sf(t, df); }

// --- descriptive -----------------------------------------------------------

double mean(std::span<const double> xs) {
  if (xs.empty()) throw StatsError("mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
  if (xs.size() < 2) throw StatsError("standard deviation needs at least 2 values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw StatsError("percentile of empty sample");
  // numpy's "linear" method, including its two-sided lerp for t >= 0.5.
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double t = pos - static_cast<double>(lo);
  const double a = sorted[lo], b = sorted[lo + 1], diff = b - a;
  return t >= 0.5 ? b - diff * (1.0 - t) : a + diff * t;
}

double percentile(std::span<const double> xs, double q) {
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  return percentile_sorted(v, q);
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);  // mean of positions i+1..j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

// --- paired t --------------------------------------------------------------

TestResult paired_t(const PairedSample& p) {
  check_paired(p);
  const auto d = differences(p);
  const double n = static_cast<double>(d.size());
  const double m = mean(d);

  TestResult r;
  if (std::all_of(d.begin(), d.end(), [&](double x) { return x == d.front(); })) {
    r.degenerate = true;
    if (m == 0.0) {
      r.statistic = 0.0;
      r.p_two_sided = 1.0;
      r.p_one_tailed_greater = r.p_one_tailed_less = 0.5;
    } else {
      r.statistic = m > 0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
      r.p_two_sided = 0.0;
      r.p_one_tailed_greater = m > 0 ? 0.0 : 1.0;
      r.p_one_tailed_less = m > 0 ? 1.0 : 0.0;
    }
    return r;
  }
  const double t = m / (stddev(d) / std::sqrt(n));
  const double df = n - 1.0;
  r.statistic = t;
  r.p_one_tailed_greater = student_t_sf(t, df);
  r.p_one_tailed_less = student_t_sf(-t, df);
  r.p_two_sided = clamp01(2.0 * student_t_sf(std::fabs(t), df));
  return r;
}

// --- Wilcoxon signed-rank --------------------------------------------------

TestResult wilcoxon_signed_rank(const PairedSample& p) {
  check_paired(p);
  std::vector<double> d;
  for (double x : differences(p))
    if (x != 0.0) d.push_back(x);
  if (d.empty()) throw StatsError("Wilcoxon test undefined: every difference is zero");

  std::vector<double> magnitudes(d.size());
  std::transform(d.begin(), d.end(), magnitudes.begin(), [](double x) { return std::fabs(x); });
  const auto ranks = average_ranks(magnitudes);
  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? w_plus : w_minus) += ranks[i];

  const std::size_t n = d.size();
  TestResult r;
  r.statistic = std::min(w_plus, w_minus);

  if (n <= kWilcoxonExactMaxN) {
    // Null distribution of 2*W+ over all 2^n sign assignments; doubled ranks
    // are integers even with ties.
    std::vector<std::size_t> doubled(n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      doubled[i] = static_cast<std::size_t>(std::lround(2.0 * ranks[i]));
      total += doubled[i];
    }
    std::vector<double> ways(total + 1, 0.0);
    ways[0] = 1.0;
    for (std::size_t w : doubled)
      for (std::size_t s = total; s >= w; --s) {
        ways[s] += ways[s - w];
        if (s == w) break;
      }
    const auto observed = static_cast<std::size_t>(std::lround(2.0 * w_plus));
    const double all = std::ldexp(1.0, static_cast<int>(n));
    double ge = 0.0, le = 0.0;
    for (std::size_t s = 0; s <= total; ++s) {
      if (s >= observed) ge += ways[s];
      if (s <= observed) le += ways[s];
    }
    r.exact = true;
    r.p_one_tailed_greater = ge / all;
    r.p_one_tailed_less = le / all;
    r.p_two_sided = two_sided(r.p_one_tailed_greater, r.p_one_tailed_less);
    return r;
  }

  const double nn = static_cast<double>(n);
  const double mu = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term(magnitudes) / 48.0;
  const double se = std::sqrt(var);
  r.p_one_tailed_greater = normal_sf((w_plus - mu - 0.5) / se);
  r.p_one_tailed_less = normal_cdf((w_plus - mu + 0.5) / se);
  const double dev = r.statistic - mu;
  const double correction = dev > 0 ? 0.5 : (dev < 0 ? -0.5 : 0.0);
  r.p_two_sided = clamp01(2.0 * normal_sf(std::fabs((dev - correction) / se)));
  return r;
}

// --- Mann-Whitney U --------------------------------------------------------

TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw StatsError("Mann-Whitney U needs two non-empty samples");
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  for (double v : pooled)
    if (!std::isfinite(v)) throw StatsError("non-finite value");

  const std::size_t n = x.size(), m = y.size(), total_n = n + m;
  const auto ranks = average_ranks(pooled);
  const double rank_sum_x = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  const double u = rank_sum_x - nd * (nd + 1.0) / 2.0;

  TestResult r;
  r.statistic = u;

  if (std::min(n, m) <= 8 && total_n <= 20) {
    // ways[k][s]: subsets of k pooled observations with doubled rank sum s.
    std::vector<std::size_t> doubled(total_n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < total_n; ++i) {
      doubled[i] = static_cast<std::size_t>(std::lround(2.0 * ranks[i]));
      total += doubled[i];
    }
    std::vector<std::vector<double>> ways(n + 1, std::vector<double>(total + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t w : doubled)
      for (std::size_t k = n; k >= 1; --k)
        for (std::size_t s = total; s >= w; --s) {
          ways[k][s] += ways[k - 1][s - w];
          if (s == w) break;
        }
    const auto observed = static_cast<std::size_t>(std::lround(2.0 * rank_sum_x));
    double ge = 0.0, le = 0.0, all = 0.0;
    for (std::size_t s = 0; s <= total; ++s) {
      all += ways[n][s];
      if (s >= observed) ge += ways[n][s];
      if (s <= observed) le += ways[n][s];
    }
    r.exact = true;
    r.p_one_tailed_greater = ge / all;
    r.p_one_tailed_less = le / all;
    r.p_two_sided = two_sided(r.p_one_tailed_greater, r.p_one_tailed_less);
    return r;
  }

  const double nt = static_cast<double>(total_n);
  const double mu = nd * md / 2.0;
  const double var = nd * md / 12.0 * ((nt + 1.0) - tie_term(pooled) / (nt * (nt - 1.0)));
  if (var <= 0.0) {
    r.degenerate = true;
    r.p_two_sided = r.p_one_tailed_greater = r.p_one_tailed_less = 1.0;
    return r;
  }
  const double sd = std::sqrt(var);
  r.p_one_tailed_greater = normal_sf((u - mu - 0.5) / sd);
  r.p_one_tailed_less = normal_cdf((u - mu + 0.5) / sd);
  const double u_max = std::max(u, nd * md - u);
  r.p_two_sided = clamp01(2.0 * normal_sf((u_max - mu - 0.5) / sd));
  return r;
}

// --- bootstrap ---------------------------------------------------------------

MeanDifference mean_difference_ci(const PairedSample& p, std::size_t resamples,
                                  std::uint64_t seed) {
  check_paired(p);
  if (resamples == 0) throw StatsError("bootstrap needs at least one resample");
  const auto d = differences(p);
  const std::size_t n = d.size();

  Rng rng(seed);
  std::vector<double> means(resamples);
  for (auto& mu : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += d[rng.uniform_index(n)];
    mu = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  return {mean(d), percentile_sorted(means, 2.5), percentile_sorted(means, 97.5)};
}

}  // namespace fedforest::stats
