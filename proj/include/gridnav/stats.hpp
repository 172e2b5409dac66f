#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridnav/errors.hpp"
#include "gridnav/metrics.hpp"

namespace gridnav::stats {

/// Trailing mean with expanding warm-up: element i averages the last
/// min(i+1, window) values.
std::vector<double> moving_average(std::span<const double> series, int window);

/// Quantile of a sorted sample by linear interpolation at rank (n-1)*p.
double quantile_sorted(std::span<const double> sorted, double p);

struct Summary {
    double mean = 0.0;
    double median = 0.0;
    double min = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double iqr = 0.0;
    std::vector<double> outliers;  // beyond 1.5*IQR fences
    std::size_t count = 0;
    std::optional<double> success_rate;  // set by callers summarizing episodes
};

/// Five-number summary with Tukey outliers. Throws on empty input.
Summary boxplot_summary(std::span<const double> values);

struct StepsToGoal {
    std::optional<double> mean_steps;
    std::optional<double> median_steps;
    double success_rate = 0.0;
};

/// Steps statistics restricted to goal-reaching episodes; absent when no
/// episode succeeded.
StepsToGoal steps_to_goal_aggregate(std::span<const harness::EpisodeRecord> records);

struct TestResult {
    std::string name;
    double statistic = 0.0;
    std::optional<double> degrees_of_freedom;
    double p_value = 1.0;
};

/// Welch's unequal-variance t-test, two-sided p via the t-distribution CDF.
/// Throws StatsError when either sample has fewer than two values or both
/// variances are zero.
TestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Mann-Whitney U with midrank ties; p by normal approximation with
/// tie-corrected variance and continuity correction. The statistic is U for
/// sample a. Throws StatsError when every pooled value is identical.
TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);

struct Histogram {
    std::vector<double> edges;        // bin_count + 1 edges over [min, max]
    std::vector<std::size_t> counts;  // right-open bins, last bin closed
};

Histogram histogram(std::span<const double> values, int bin_count);

/// Regularized incomplete beta I_x(a, b); the t and related CDFs reduce to it.
double incomplete_beta(double a, double b, double x);

/// Two-sided p for a t statistic with df degrees of freedom.
double t_two_sided_p(double t, double df);

/// Standard normal CDF.
double normal_cdf(double z);

}  // namespace gridnav::stats
