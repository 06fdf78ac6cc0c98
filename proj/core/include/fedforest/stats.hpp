#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fedforest::stats {

/// Per-unit metric pairs. Differences are taken as a - b.
struct PairedSample {
  std::vector<double> a;
  std::vector<double> b;
};

struct TestResult {
  double statistic = 0.0;
  double p_two_sided = 1.0;
  /// Alternative: a tends to exceed b (first sample greater).
  double p_one_tailed_greater = 0.5;
  double p_one_tailed_less = 0.5;
  /// p-values come from an exact null distribution rather than an approximation.
  bool exact = false;
  /// The statistic was undefined (zero variance); p-values follow the limit
  /// convention documented on the test.
  bool degenerate = false;
};

/// Student's paired t-test, df = n - 1.
///
/// When all differences are equal the statistic is undefined: a zero mean
/// reports t = 0 with p_two_sided = 1 and one-tailed 0.5; a nonzero mean
/// reports t = +-inf with the matching limits. Both are flagged degenerate.
/// Throws StatsError for n < 2, unequal lengths or non-finite values.
TestResult paired_t(const PairedSample& p);

/// Wilcoxon signed-rank test on a - b.
///
/// Zero differences are dropped; |d| ranked with average ranks. statistic is
/// min(W+, W-). p-values are exact (full null distribution over sign
/// assignments, conditional on ties) for n <= 20, else normal approximation
/// with tie and continuity correction. Throws StatsError if every difference
/// is zero.
TestResult wilcoxon_signed_rank(const PairedSample& p);

inline constexpr std::size_t kWilcoxonExactMaxN = 20;

/// Mann-Whitney U test. statistic is U of `x` (pairs x > y, ties 1/2).
/// Exact permutation distribution when min(n, m) <= 8 and n + m <= 20,
/// otherwise normal approximation with tie and continuity correction.
/// "greater" means x tends to exceed y. Throws StatsError on an empty sample.
TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y);

struct MeanDifference {
  double mean_diff = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

inline constexpr std::size_t kDefaultResamples = 5000;

/// Mean of a - b with a plain percentile bootstrap 95% interval. Resample r
/// draws n indices from Rng(seed) in sequence; the interval ends are the 2.5
/// and 97.5 percentiles (linear interpolation) of the sorted resample means.
MeanDifference mean_difference_ci(const PairedSample& p,
                                  std::size_t resamples = kDefaultResamples,
                                  std::uint64_t seed = 0);

// --- distributions and descriptive helpers --------------------------------

double normal_cdf(double z);

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction,
/// relative accuracy about 1e-14.
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator).
double stddev(std::span<const double> xs);

/// Percentile q in [0, 100] with linear interpolation between order
/// statistics (numpy's default). Throws StatsError on empty input.
double percentile(std::span<const double> xs, double q);
double percentile_sorted(std::span<const double> sorted, double q);

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

}  // namespace fedforest::stats
