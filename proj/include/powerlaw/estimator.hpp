#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "powerlaw/matrix.hpp"
#include "powerlaw/ranking.hpp"

namespace powerlaw {

/// Per adjacent-period pair (t, t+1) contributions to the rank-based
/// estimators. Row t holds the pair (t, t+1); column k-1 holds rank gap k.
/// Every estimate is a sum over rows, which is what the pair bootstrap
/// resamples.
struct PairIncrements {
    Matrix squared_gap_change; ///< (T-1) x (N-1): squared change of the entity-frozen log gap
    Matrix local_time;         ///< (T-1) x (N-1): local-time increment of rank gap k
    int frequency = 12;

    std::size_t num_pairs() const noexcept { return local_time.rows(); }
    std::size_t num_gaps() const noexcept { return local_time.cols(); }
};

/// Cumulative local time of each rank gap; row 0 is zero.
struct LocalTimeSeries {
    Matrix lambda; ///< T x (N-1)
};

struct LocalTimeEstimate {
    LocalTimeSeries series;
    std::vector<double> kappa; ///< per period, length N-1
};

/// Bounds for one parameter vector.
struct Band {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct ConfidenceBands {
    Band alpha;
    Band sigma2;
    Band kappa;
    std::optional<Band> smoothed_alpha;
    std::optional<Band> smoothed_sigma2;
    double level = 0.95;
    std::size_t resamples = 0;
    std::uint64_t seed = 0;
};

struct SmoothedParameters {
    std::vector<double> alpha;  ///< length N, sums to zero
    std::vector<double> sigma2; ///< length N-1
    std::vector<double> kappa;  ///< -2 * partial sums of alpha
    double fit_deviation = 0.0; ///< squared deviation of the selected fit
};

/// Rank-based parameter estimates. Units follow `per_year`: per period of the
/// panel when false, annualized with `frequency` when true.
struct EstimateSet {
    std::vector<double> alpha;  ///< length N
    std::vector<double> sigma2; ///< length N-1
    std::vector<double> kappa;  ///< length N-1
    std::optional<SmoothedParameters> smoothed;
    int smoothing_passes = 0; ///< 0 when no smoothing was applied
    int frequency = 12;
    bool per_year = false;
    std::optional<ConfidenceBands> ci;

    std::size_t num_ranks() const noexcept { return alpha.size(); }
};

namespace detail {

/// Local-time increments of all rank gaps for the pair (t, t+1).
///
/// The k-th increment compares the top-k share sum at t+1 with the t+1
/// shares of the entities that formed the top k at t. Both sums run over
/// entities in their t+1 rank order, so the comparison is elementwise
/// dominated and the floating-point result is never negative; when the
/// top-k set is unchanged the two sums are bit-identical.
inline void local_time_increments(std::span<const double> shares_t, std::span<const double> shares_t1,
                                  const Permutation& perm_t, const Permutation& perm_t1,
                                  std::span<double> out) {
    const std::size_t n = shares_t.size();
    const auto& order_t = perm_t.order();
    const auto& order_t1 = perm_t1.order();
    std::vector<std::size_t> rank_t(n);
    for (std::size_t k = 0; k < n; ++k) rank_t[order_t[k]] = k;

    double top_at_t = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        top_at_t += shares_t[order_t[k]];
        double true_top = 0.0;
        double frozen_top = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            const std::size_t entity = order_t1[l];
            if (l <= k) true_top += shares_t1[entity];
            if (rank_t[entity] <= k) frozen_top += shares_t1[entity];
        }
        const double log_ratio = std::log(true_top) - std::log(frozen_top);
        out[k] = log_ratio == 0.0 ? 0.0 : log_ratio * 2.0 * top_at_t / shares_t[order_t[k]];
    }
}

} // namespace detail

inline PairIncrements pair_increments(const RankSharePanel& r) {
    const std::size_t T = r.num_periods();
    const std::size_t N = r.num_entities();
    PairIncrements inc{Matrix(T - 1, N - 1), Matrix(T - 1, N - 1), r.frequency()};
    for (std::size_t t = 0; t + 1 < T; ++t) {
        const auto& order = r.perms[t].order();
        for (std::size_t k = 0; k + 1 < N; ++k) {
            const double frozen_next = std::log(r.shares(t + 1, order[k])) - std::log(r.shares(t + 1, order[k + 1]));
            const double d = frozen_next - r.gaps(t, k);
            inc.squared_gap_change(t, k) = d * d;
        }
        detail::local_time_increments(r.shares.row(t), r.shares.row(t + 1), r.perms[t], r.perms[t + 1],
                                      inc.local_time.row(t));
    }
    return inc;
}

/// Per-period variance of each rank gap, with entity identities frozen at t.
/// Divides by the number of adjacent pairs (T-1).
inline std::vector<double> estimate_sigma2(const RankSharePanel& r) {
    const auto inc = pair_increments(r);
    std::vector<double> out(inc.num_gaps(), 0.0);
    for (std::size_t t = 0; t < inc.num_pairs(); ++t)
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += inc.squared_gap_change(t, k);
    for (double& v : out) v /= static_cast<double>(inc.num_pairs());
    return out;
}

inline LocalTimeEstimate estimate_local_times(const RankSharePanel& r) {
    const auto inc = pair_increments(r);
    const std::size_t T = r.num_periods();
    LocalTimeEstimate est{{Matrix(T, inc.num_gaps())}, std::vector<double>(inc.num_gaps())};
    for (std::size_t t = 0; t < inc.num_pairs(); ++t)
        for (std::size_t k = 0; k < inc.num_gaps(); ++k)
            est.series.lambda(t + 1, k) = est.series.lambda(t, k) + inc.local_time(t, k);
    for (std::size_t k = 0; k < inc.num_gaps(); ++k)
        est.kappa[k] = est.series.lambda(T - 1, k) / static_cast<double>(T - 1);
    return est;
}

/// alpha_k = (kappa_{k-1} - kappa_k) / 2 with kappa_0 = 0, closed by
/// alpha_N = -(alpha_1 + ... + alpha_{N-1}).
inline std::vector<double> alpha_from_kappa(std::span<const double> kappa) {
    const std::size_t n = kappa.size() + 1;
    std::vector<double> alpha(n);
    double previous = 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        alpha[k] = 0.5 * previous - 0.5 * kappa[k];
        previous = kappa[k];
        sum += alpha[k];
    }
    alpha[n - 1] = -sum;
    return alpha;
}

/// kappa_k = -2 (alpha_1 + ... + alpha_k), k = 1..N-1.
inline std::vector<double> kappa_from_alpha(std::span<const double> alpha) {
    std::vector<double> kappa(alpha.size() - 1);
    double partial = 0.0;
    for (std::size_t k = 0; k < kappa.size(); ++k) {
        partial += alpha[k];
        kappa[k] = -2.0 * partial;
    }
    return kappa;
}

/// Estimates from a multiset of pair rows, each row index counted once per
/// occurrence. The full-sample estimate uses every row exactly once.
inline EstimateSet estimate_from_pairs(const PairIncrements& inc, std::span<const std::size_t> rows) {
    const std::size_t gaps = inc.num_gaps();
    EstimateSet e;
    e.frequency = inc.frequency;
    e.sigma2.assign(gaps, 0.0);
    e.kappa.assign(gaps, 0.0);
    for (std::size_t t : rows) {
        auto sq = inc.squared_gap_change.row(t);
        auto lt = inc.local_time.row(t);
        for (std::size_t k = 0; k < gaps; ++k) {
            e.sigma2[k] += sq[k];
            e.kappa[k] += lt[k];
        }
    }
    const double count = static_cast<double>(rows.size());
    for (std::size_t k = 0; k < gaps; ++k) {
        e.sigma2[k] /= count;
        e.kappa[k] /= count;
    }
    e.alpha = alpha_from_kappa(e.kappa);
    return e;
}

/// Per-period estimates of alpha, sigma^2 and kappa for every rank.
inline EstimateSet estimate(const RankSharePanel& r) {
    const auto inc = pair_increments(r);
    std::vector<std::size_t> rows(inc.num_pairs());
    for (std::size_t t = 0; t < rows.size(); ++t) rows[t] = t;
    return estimate_from_pairs(inc, rows);
}

namespace detail {
inline void scale(std::vector<double>& v, double f) {
    for (double& x : v) x *= f;
}
inline void scale(Band& b, double f) {
    scale(b.lower, f);
    scale(b.upper, f);
}
} // namespace detail

/// Per-period to per-year: drifts, local-time rates and variances all scale
/// linearly with `frequency`.
inline EstimateSet annualize(EstimateSet e, int frequency) {
    const double f = static_cast<double>(frequency);
    detail::scale(e.alpha, f);
    detail::scale(e.sigma2, f);
    detail::scale(e.kappa, f);
    if (e.smoothed) {
        detail::scale(e.smoothed->alpha, f);
        detail::scale(e.smoothed->sigma2, f);
        detail::scale(e.smoothed->kappa, f);
    }
    if (e.ci) {
        detail::scale(e.ci->alpha, f);
        detail::scale(e.ci->sigma2, f);
        detail::scale(e.ci->kappa, f);
        if (e.ci->smoothed_alpha) detail::scale(*e.ci->smoothed_alpha, f);
        if (e.ci->smoothed_sigma2) detail::scale(*e.ci->smoothed_sigma2, f);
    }
    e.frequency = frequency;
    e.per_year = true;
    return e;
}

} // namespace powerlaw
