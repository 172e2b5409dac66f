#include "gridnav/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridnav::stats {

std::vector<double> moving_average(std::span<const double> series, int window) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    std::vector<double> out;
    out.reserve(series.size());
    double running = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        running += series[i];
        if (i >= static_cast<std::size_t>(window)) running -= series[i - window];
        std::size_t n = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
        out.push_back(running / static_cast<double>(n));
    }
    return out;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    if (sorted.size() == 1) return sorted[0];
    double rank = (static_cast<double>(sorted.size()) - 1.0) * p;
    std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Summary boxplot_summary(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("boxplot_summary of empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    Summary s;
    s.count = sorted.size();
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(s.count);
    s.min = sorted.front();
    s.max = sorted.back();
    s.q1 = quantile_sorted(sorted, 0.25);
    s.median = quantile_sorted(sorted, 0.5);
    s.q3 = quantile_sorted(sorted, 0.75);
    s.iqr = s.q3 - s.q1;
    double lo_fence = s.q1 - 1.5 * s.iqr;
    double hi_fence = s.q3 + 1.5 * s.iqr;
    for (double v : sorted)
        if (v < lo_fence || v > hi_fence) s.outliers.push_back(v);
    return s;
}

StepsToGoal steps_to_goal_aggregate(std::span<const harness::EpisodeRecord> records) {
    StepsToGoal out;
    std::vector<double> goal_steps;
    for (const auto& r : records)
        if (r.reached_goal) goal_steps.push_back(static_cast<double>(r.steps));
    if (!records.empty())
        out.success_rate = static_cast<double>(goal_steps.size()) / static_cast<double>(records.size());
    if (!goal_steps.empty()) {
        std::sort(goal_steps.begin(), goal_steps.end());
        out.mean_steps = std::accumulate(goal_steps.begin(), goal_steps.end(), 0.0) /
                         static_cast<double>(goal_steps.size());
        out.median_steps = quantile_sorted(goal_steps, 0.5);
    }
    return out;
}

namespace {

// Continued fraction for the regularized incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double sample_variance(std::span<const double> x, double mean) {
    double s = 0.0;
    for (double v : x) s += (v - mean) * (v - mean);
    return s / (static_cast<double>(x.size()) - 1.0);
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                      b * std::log1p(-x);
    double front = std::exp(ln_front);
    // Symmetry keeps the continued fraction in its fast-converging region.
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double t_two_sided_p(double t, double df) {
    if (df <= 0.0) throw StatsError("degrees of freedom must be positive");
    double x = df / (df + t * t);
    double p = incomplete_beta(df / 2.0, 0.5, x);
    return std::clamp(p, 0.0, 1.0);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw StatsError("welch_t_test needs at least two values per sample");
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / na;
    double mb = std::accumulate(b.begin(), b.end(), 0.0) / nb;
    double va = sample_variance(a, ma);
    double vb = sample_variance(b, mb);
    double sa = va / na;
    double sb = vb / nb;
    if (sa + sb <= 0.0)
        throw StatsError("welch_t_test: both samples have zero variance");

    TestResult r;
    r.name = "welch_t";
    r.statistic = (ma - mb) / std::sqrt(sa + sb);
    double df = (sa + sb) * (sa + sb) /
                (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    r.degrees_of_freedom = df;
    r.p_value = t_two_sided_p(r.statistic, df);
    return r;
}

TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty())
        throw StatsError("wilcoxon_rank_sum needs non-empty samples");

    struct Tagged {
        double value;
        bool from_a;
    };
    std::vector<Tagged> pooled;
    pooled.reserve(a.size() + b.size());
    for (double v : a) pooled.push_back({v, true});
    for (double v : b) pooled.push_back({v, false});
    std::sort(pooled.begin(), pooled.end(),
              [](const Tagged& x, const Tagged& y) { return x.value < y.value; });

    double n = static_cast<double>(pooled.size());
    double rank_sum_a = 0.0;
    double tie_term = 0.0;  // sum of t^3 - t over tie groups
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].value == pooled[i].value) ++j;
        double t = static_cast<double>(j - i);
        double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (pooled[k].from_a) rank_sum_a += midrank;
        if (t > 1.0) tie_term += t * t * t - t;
        i = j;
    }

    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    double u_a = rank_sum_a - na * (na + 1.0) / 2.0;

    TestResult r;
    r.name = "wilcoxon_rank_sum";
    r.statistic = u_a;

    double mean_u = na * nb / 2.0;
    double var_u = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var_u <= 0.0)
        throw StatsError("wilcoxon_rank_sum: all pooled values identical");
    double diff = u_a - mean_u;
    double cc = diff > 0.0 ? -0.5 : (diff < 0.0 ? 0.5 : 0.0);  // continuity toward the mean
    double z = (diff + cc) / std::sqrt(var_u);
    r.p_value = std::clamp(2.0 * normal_cdf(-std::abs(z)), 0.0, 1.0);
    return r;
}

Histogram histogram(std::span<const double> values, int bin_count) {
    if (bin_count < 1) throw std::invalid_argument("bin_count must be >= 1");
    if (values.empty()) throw std::invalid_argument("histogram of empty sample");

    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it;
    double hi = *hi_it;

    Histogram h;
    h.edges.resize(static_cast<std::size_t>(bin_count) + 1);
    for (int i = 0; i <= bin_count; ++i)
        h.edges[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bin_count);
    h.edges.back() = hi;
    h.counts.assign(static_cast<std::size_t>(bin_count), 0);

    double width = (hi - lo) / static_cast<double>(bin_count);
    for (double v : values) {
        int bin;
        if (width == 0.0 || v >= hi) {
            bin = bin_count - 1;  // degenerate range or the closed last edge
        } else {
            bin = static_cast<int>((v - lo) / width);
            bin = std::clamp(bin, 0, bin_count - 1);
        }
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    return h;
}

}  // namespace gridnav::stats
