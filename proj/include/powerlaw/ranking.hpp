#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "powerlaw/matrix.hpp"
#include "powerlaw/panel.hpp"

namespace powerlaw {

/// Occupation permutation p_t: rank -> entity. Ranks are 1-based at the
/// interface; `order()` exposes the 0-based storage (order()[k-1] is the
/// 0-based index of the entity holding rank k).
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<std::size_t> order) : order_(std::move(order)) {}

    std::size_t size() const noexcept { return order_.size(); }

    /// 0-based entity index at 1-based rank k.
    std::size_t entity_at(std::size_t rank) const { return order_.at(rank - 1); }

    const std::vector<std::size_t>& order() const noexcept { return order_; }

    /// Entity ids as 1-based integers, p(1), ..., p(N).
    std::vector<std::size_t> one_based() const {
        std::vector<std::size_t> out(order_.size());
        std::transform(order_.begin(), order_.end(), out.begin(), [](std::size_t i) { return i + 1; });
        return out;
    }

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::vector<std::size_t> order_;
};

/// Descending sort of a positive vector. Exact ties go to the larger entity
/// index first, so the result is fully deterministic.
inline Permutation rank_permutation(std::span<const double> row) {
    std::vector<std::size_t> order(row.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (row[a] != row[b]) return row[a] > row[b];
        return a > b;
    });
    return Permutation(std::move(order));
}

/// Rank-sorted share trajectories with the permutations that produced them.
struct RankSharePanel {
    PanelLabels labels;
    Matrix shares;                   ///< T x N, original entity order (theta_i(t))
    Matrix theta_ranked;             ///< T x N, theta_(k)(t)
    std::vector<Permutation> perms;  ///< one per period
    Matrix gaps;                     ///< T x (N-1), log theta_(k) - log theta_(k+1)

    std::size_t num_entities() const noexcept { return shares.cols(); }
    std::size_t num_periods() const noexcept { return shares.rows(); }
    int frequency() const noexcept { return labels.frequency; }
};

inline RankSharePanel ranked_view(const SharePanel& s) {
    const std::size_t T = s.num_periods();
    const std::size_t N = s.num_entities();
    RankSharePanel r{s.labels, s.values, Matrix(T, N), {}, Matrix(T, N - 1)};
    r.perms.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        auto row = s.values.row(t);
        r.perms.push_back(rank_permutation(row));
        const auto& order = r.perms.back().order();
        for (std::size_t k = 0; k < N; ++k) r.theta_ranked(t, k) = row[order[k]];
        for (std::size_t k = 0; k + 1 < N; ++k)
            r.gaps(t, k) = std::log(r.theta_ranked(t, k)) - std::log(r.theta_ranked(t, k + 1));
    }
    return r;
}

/// log(N * theta_(k)(t)), the ranked log relative price trajectories.
inline Matrix ranked_log_relative_prices(const RankSharePanel& r) {
    Matrix out(r.num_periods(), r.num_entities());
    const double log_n = std::log(static_cast<double>(r.num_entities()));
    for (std::size_t t = 0; t < out.rows(); ++t)
        for (std::size_t k = 0; k < out.cols(); ++k) out(t, k) = log_n + std::log(r.theta_ranked(t, k));
    return out;
}

} // namespace powerlaw
