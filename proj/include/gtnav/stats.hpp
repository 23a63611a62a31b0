#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>

#include "gtnav/errors.hpp"

namespace gtnav {

enum class StatMethod { KruskalWallis, Levene, MannWhitney, BonferroniPosthoc };

inline const char* stat_method_name(StatMethod m) {
    switch (m) {
        case StatMethod::KruskalWallis: return "kruskal_wallis";
        case StatMethod::Levene: return "levene";
        case StatMethod::MannWhitney: return "mann_whitney";
        case StatMethod::BonferroniPosthoc: return "bonferroni_posthoc";
    }
    return "unknown";
}

struct StatResult {
    StatMethod method = StatMethod::KruskalWallis;
    double statistic = 0.0;
    double p_value = 1.0;
    std::vector<std::string> groups;
    double df1 = 0.0;
    double df2 = 0.0;
    bool significant = false;
};

/// 1-based ranks with ties sharing their average rank.
inline std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

namespace detail {

/// Sum of t^3 - t over tie groups of a sorted-by-value rank base.
inline double tie_term(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        sum += t * t * t - t;
        i = j + 1;
    }
    return sum;
}

inline double median_of(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

inline std::vector<std::string> default_labels(std::size_t k) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < k; ++i) labels.push_back("group" + std::to_string(i));
    return labels;
}

} // namespace detail

/**
 * @brief Kruskal-Wallis rank test across two or more groups.
 *
 * H is the rank-variance statistic with the standard tie correction; the
 * p-value comes from the chi-square approximation with k-1 degrees of
 * freedom. All-identical data leaves the tie correction at zero and throws
 * DegenerateDataError.
 */
inline StatResult kruskal_wallis(const std::vector<std::vector<double>>& groups,
                                 std::vector<std::string> labels = {}) {
    if (groups.size() < 2) throw DomainError("kruskal_wallis: need at least 2 groups");
    for (const auto& g : groups)
        if (g.empty()) throw DomainError("kruskal_wallis: empty group");
    if (labels.empty()) labels = detail::default_labels(groups.size());

    std::vector<double> pooled;
    for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
    const double n = static_cast<double>(pooled.size());
    const std::vector<double> ranks = average_ranks(pooled);

    double h = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) rank_sum += ranks[offset + i];
        h += rank_sum * rank_sum / static_cast<double>(g.size());
        offset += g.size();
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);

    const double correction = 1.0 - detail::tie_term(pooled) / (n * n * n - n);
    if (correction <= 0.0)
        throw DegenerateDataError("kruskal_wallis: all values identical");
    h /= correction;

    StatResult out;
    out.method = StatMethod::KruskalWallis;
    out.statistic = h;
    out.df1 = static_cast<double>(groups.size() - 1);
    out.groups = std::move(labels);
    const boost::math::chi_squared dist(out.df1);
    out.p_value = boost::math::cdf(boost::math::complement(dist, std::max(h, 0.0)));
    return out;
}

/**
 * @brief Spread comparison via the Brown-Forsythe variant of Levene's test.
 *
 * Scores are absolute deviations from each group's median; the statistic is
 * the one-way F over those scores with (k-1, N-k) degrees of freedom. Zero
 * within-group deviation spread throws DegenerateDataError.
 */
inline StatResult levene(const std::vector<std::vector<double>>& groups,
                         std::vector<std::string> labels = {}) {
    if (groups.size() < 2) throw DomainError("levene: need at least 2 groups");
    for (const auto& g : groups)
        if (g.size() < 2) throw DomainError("levene: each group needs at least 2 samples");
    if (labels.empty()) labels = detail::default_labels(groups.size());

    const std::size_t k = groups.size();
    std::size_t total = 0;
    std::vector<std::vector<double>> dev(k);
    std::vector<double> dev_mean(k, 0.0);
    double grand_sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double med = detail::median_of(groups[j]);
        dev[j].reserve(groups[j].size());
        for (double x : groups[j]) {
            const double z = std::abs(x - med);
            dev[j].push_back(z);
            dev_mean[j] += z;
            grand_sum += z;
        }
        dev_mean[j] /= static_cast<double>(groups[j].size());
        total += groups[j].size();
    }
    const double n = static_cast<double>(total);
    const double grand_mean = grand_sum / n;

    double between = 0.0;
    double within = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        between += static_cast<double>(dev[j].size()) * (dev_mean[j] - grand_mean) *
                   (dev_mean[j] - grand_mean);
        for (double z : dev[j]) within += (z - dev_mean[j]) * (z - dev_mean[j]);
    }
    if (within <= 0.0)
        throw DegenerateDataError("levene: no within-group deviation spread");

    StatResult out;
    out.method = StatMethod::Levene;
    out.df1 = static_cast<double>(k - 1);
    out.df2 = n - static_cast<double>(k);
    out.statistic = (out.df2 / out.df1) * (between / within);
    out.groups = std::move(labels);
    const boost::math::fisher_f dist(out.df1, out.df2);
    out.p_value = boost::math::cdf(boost::math::complement(dist, std::max(out.statistic, 0.0)));
    return out;
}

/**
 * @brief Two-sided Mann-Whitney U test, tie-corrected normal approximation
 * with continuity correction.
 *
 * The reported statistic is U of the first sample; the p-value uses
 * z = (max(U1, U2) - mu - 0.5) / sigma with the tie-corrected sigma, doubled
 * and clipped to 1. All-identical pooled data leaves sigma at zero and
 * throws DegenerateDataError.
 */
inline StatResult mann_whitney(std::span<const double> a, std::span<const double> b,
                               std::vector<std::string> labels = {}) {
    if (a.empty() || b.empty()) throw DomainError("mann_whitney: empty sample");
    if (labels.empty()) labels = {"a", "b"};

    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::vector<double> ranks = average_ranks(pooled);

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranks[i];
    const double u1 = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    const double u2 = n1 * n2 - u1;

    const double n = n1 + n2;
    const double tie = detail::tie_term(pooled);
    const double sigma_sq = n1 * n2 / 12.0 * ((n + 1.0) - tie / (n * (n - 1.0)));
    if (sigma_sq <= 0.0)
        throw DegenerateDataError("mann_whitney: all pooled values identical");

    const double mu = n1 * n2 / 2.0;
    const double z = (std::max(u1, u2) - mu - 0.5) / std::sqrt(sigma_sq);
    const boost::math::normal dist;
    const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, z));

    StatResult out;
    out.method = StatMethod::MannWhitney;
    out.statistic = u1;
    out.p_value = std::min(p, 1.0);
    out.groups = std::move(labels);
    return out;
}

namespace detail {

/// Uniform draw from [0, m) by rejection, identical on every platform.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t m) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t rem = (max % m + 1) % m; // 2^64 mod m
    std::uint64_t x = rng();
    if (rem != 0) {
        const std::uint64_t bound = max - rem + 1; // accept x < bound
        while (x >= bound) x = rng();
    }
    return x % m;
}

} // namespace detail

/**
 * @brief Seeded subsampling bootstrap: draw subset_size values without
 * replacement, apply the statistic, repeat.
 *
 * Iteration i uses its own generator seeded with seed + i and a fixed
 * rejection-sampled shuffle, so results are identical across platforms and
 * iterations may be computed in any order. Selected indices are passed to
 * the statistic in ascending order.
 */
inline std::vector<double> bootstrap(std::span<const double> samples, std::size_t subset_size,
                                     int iterations, std::uint64_t seed,
                                     const std::function<double(std::span<const double>)>& statistic) {
    if (subset_size == 0) throw DomainError("bootstrap: subset_size must be positive");
    if (subset_size > samples.size())
        throw DomainError("bootstrap: subset_size exceeds population size");
    if (iterations < 1) throw DomainError("bootstrap: iterations must be >= 1");

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(iterations));
    for (int it = 0; it < iterations; ++it) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(it));
        std::vector<std::size_t> indices(samples.size());
        std::iota(indices.begin(), indices.end(), 0);
        for (std::size_t k = 0; k < subset_size; ++k) {
            const std::uint64_t j =
                k + detail::bounded_draw(rng, static_cast<std::uint64_t>(samples.size() - k));
            std::swap(indices[k], indices[static_cast<std::size_t>(j)]);
        }
        std::vector<std::size_t> chosen(indices.begin(),
                                        indices.begin() + static_cast<std::ptrdiff_t>(subset_size));
        std::sort(chosen.begin(), chosen.end());
        std::vector<double> subset;
        subset.reserve(subset_size);
        for (std::size_t idx : chosen) subset.push_back(samples[idx]);
        out.push_back(statistic(subset));
    }
    return out;
}

/**
 * @brief Pairwise Mann-Whitney comparisons with Bonferroni adjustment.
 *
 * Every unordered pair of groups is tested; each p-value is multiplied by
 * the number of pairs and clamped to 1. A result is flagged significant when
 * its adjusted p falls below alpha.
 */
inline std::vector<StatResult> bonferroni_posthoc(const std::vector<std::vector<double>>& groups,
                                                  double alpha = 0.05,
                                                  std::vector<std::string> labels = {}) {
    if (groups.size() < 2) throw DomainError("bonferroni_posthoc: need at least 2 groups");
    if (labels.empty()) labels = detail::default_labels(groups.size());
    const std::size_t k = groups.size();
    const double pairs = static_cast<double>(k * (k - 1) / 2);

    std::vector<StatResult> out;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            StatResult r = mann_whitney(groups[i], groups[j], {labels[i], labels[j]});
            r.method = StatMethod::BonferroniPosthoc;
            r.p_value = std::min(1.0, r.p_value * pairs);
            r.significant = r.p_value < alpha;
            out.push_back(std::move(r));
        }
    }
    return out;
}

} // namespace gtnav
