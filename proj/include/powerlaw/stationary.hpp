#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "powerlaw/error.hpp"
#include "powerlaw/estimator.hpp"
#include "powerlaw/ranking.hpp"

namespace powerlaw {

/// Expected (predicted) or time-averaged (observed) adjacent log gaps by rank.
struct DistributionCurve {
    enum class Source { Predicted, Observed };

    std::vector<double> gaps;       ///< length N-1
    std::vector<double> log_shares; ///< length N, log theta_(k)
    Source source = Source::Predicted;

    std::size_t num_ranks() const noexcept { return log_shares.size(); }

    /// log(N * theta_(k)), the log relative price by rank.
    std::vector<double> log_relative_prices() const {
        const double log_n = std::log(static_cast<double>(log_shares.size()));
        std::vector<double> out(log_shares);
        for (double& v : out) v += log_n;
        return out;
    }
};

namespace detail {

/// Levels from gaps, shifted so the implied shares sum to one.
inline std::vector<double> levels_from_gaps(std::span<const double> gaps) {
    std::vector<double> levels(gaps.size() + 1, 0.0);
    for (std::size_t k = 0; k < gaps.size(); ++k) levels[k + 1] = levels[k] - gaps[k];
    const double top = *std::max_element(levels.begin(), levels.end());
    double sum = 0.0;
    for (double l : levels) sum += std::exp(l - top);
    const double shift = -(top + std::log(sum));
    for (double& l : levels) l += shift;
    return levels;
}

} // namespace detail

/// Stationary expected gaps sigma2_k / (-4 (alpha_1 + ... + alpha_k)).
/// Throws StationarityViolation at the first rank whose partial sum is >= 0.
inline DistributionCurve predict_stationary_gaps(std::span<const double> alpha, std::span<const double> sigma2) {
    if (alpha.size() != sigma2.size() + 1)
        throw InputError(InputError::Kind::InvalidArgument, "alpha must have exactly one more entry than sigma2");
    DistributionCurve curve;
    curve.gaps.resize(sigma2.size());
    double partial = 0.0;
    for (std::size_t k = 0; k < sigma2.size(); ++k) {
        partial += alpha[k];
        if (!(partial < 0.0))
            throw StationarityViolation(k + 1, "no stationary distribution: alpha_1 + ... + alpha_" +
                                                   std::to_string(k + 1) + " = " + std::to_string(partial) +
                                                   " is not negative");
        curve.gaps[k] = sigma2[k] / (-4.0 * partial);
    }
    curve.log_shares = detail::levels_from_gaps(curve.gaps);
    return curve;
}

/// Uses the smoothed parameters when present, the raw estimates otherwise.
inline DistributionCurve predict_stationary_gaps(const EstimateSet& e) {
    if (e.smoothed) return predict_stationary_gaps(e.smoothed->alpha, e.smoothed->sigma2);
    return predict_stationary_gaps(e.alpha, e.sigma2);
}

/// Time averages of the observed gaps and log shares over t >= drop_first.
inline DistributionCurve observed_average_gaps(const RankSharePanel& r, std::size_t drop_first = 0) {
    const std::size_t T = r.num_periods();
    const std::size_t N = r.num_entities();
    if (drop_first >= T)
        throw InputError(InputError::Kind::InvalidArgument,
                         "drop_first (" + std::to_string(drop_first) + ") must be smaller than the number of periods");
    DistributionCurve curve{std::vector<double>(N - 1, 0.0), std::vector<double>(N, 0.0),
                            DistributionCurve::Source::Observed};
    for (std::size_t t = drop_first; t < T; ++t) {
        for (std::size_t k = 0; k + 1 < N; ++k) curve.gaps[k] += r.gaps(t, k);
        for (std::size_t k = 0; k < N; ++k) curve.log_shares[k] += std::log(r.theta_ranked(t, k));
    }
    const double count = static_cast<double>(T - drop_first);
    for (double& g : curve.gaps) g /= count;
    for (double& l : curve.log_shares) l /= count;
    return curve;
}

/// Local log-log slopes -k * gap_k, the rank-k slope of log share against
/// log rank under the first-order approximation log(k+1) - log k ~ 1/k.
inline std::vector<double> local_pareto_slopes(const DistributionCurve& curve) {
    std::vector<double> out(curve.gaps.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = -static_cast<double>(k + 1) * curve.gaps[k];
    return out;
}

struct GibratDistribution {
    DistributionCurve curve;
    double pareto_slope = 0.0;    ///< sigma2 / (4 alpha), negative
    double pareto_exponent = 0.0; ///< -sigma2 / (4 alpha), positive
};

/// Closed form under rank-independent alpha < 0 and sigma2 > 0:
/// gap_k = sigma2 / (-4 k alpha).
inline GibratDistribution gibrat_closed_form(double alpha, double sigma2, std::size_t n) {
    if (!(alpha < 0.0))
        throw StationarityViolation(1, "Gibrat distribution requires alpha < 0, got " + std::to_string(alpha));
    if (!(sigma2 > 0.0))
        throw InputError(InputError::Kind::InvalidArgument, "Gibrat distribution requires sigma2 > 0");
    if (n < 2) throw InputError(InputError::Kind::TooFewEntities, "Gibrat distribution requires N >= 2");
    GibratDistribution g;
    g.curve.gaps.resize(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) g.curve.gaps[k] = sigma2 / (-4.0 * static_cast<double>(k + 1) * alpha);
    g.curve.log_shares = detail::levels_from_gaps(g.curve.gaps);
    g.pareto_slope = sigma2 / (4.0 * alpha);
    g.pareto_exponent = -sigma2 / (4.0 * alpha);
    return g;
}

/// Cumulative Tanaka local time at zero of a discretely observed path:
/// out[t] = (|z(t)| - |z(0)| - sum_{s<t} sgn(z(s)) (z(s+1) - z(s))) / 2,
/// with sgn(0) = +1.
inline std::vector<double> tanaka_local_time_path(std::span<const double> z) {
    // Summed step by step so that steps without a sign change contribute
    // exactly zero.
    std::vector<double> out(z.size(), 0.0);
    for (std::size_t t = 1; t < z.size(); ++t) {
        const double sgn = z[t - 1] >= 0.0 ? 1.0 : -1.0;
        const double step = 0.5 * ((std::abs(z[t]) - std::abs(z[t - 1])) - sgn * (z[t] - z[t - 1]));
        out[t] = out[t - 1] + step;
    }
    return out;
}

inline double tanaka_local_time(std::span<const double> z) {
    if (z.size() < 2) return 0.0;
    return tanaka_local_time_path(z).back();
}

} // namespace powerlaw
