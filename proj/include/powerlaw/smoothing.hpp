#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "powerlaw/error.hpp"
#include "powerlaw/estimator.hpp"
#include "powerlaw/stationary.hpp"

namespace powerlaw {

inline constexpr int kMaxSmoothingPasses = 100;

/// Discrete Gaussian kernel over rank index: bandwidth one rank, truncated at
/// +/-3 ranks, weights renormalized where the window runs past either end.
inline std::vector<double> gaussian_kernel_pass(std::span<const double> v) {
    static const std::array<double, 4> weight = {1.0, std::exp(-0.5), std::exp(-2.0), std::exp(-4.5)};
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
    std::vector<double> out(v.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double num = 0.0;
        double den = 0.0;
        for (std::ptrdiff_t d = -3; d <= 3; ++d) {
            const std::ptrdiff_t j = i + d;
            if (j < 0 || j >= n) continue;
            const double w = weight[static_cast<std::size_t>(d < 0 ? -d : d)];
            num += w * v[j];
            den += w;
        }
        out[i] = num / den;
    }
    return out;
}

inline std::vector<double> gaussian_smooth(std::span<const double> v, int passes) {
    std::vector<double> out(v.begin(), v.end());
    for (int p = 0; p < passes; ++p) out = gaussian_kernel_pass(out);
    return out;
}

/// What the pass-count search compares between predicted and observed curves.
enum class FitMetric {
    LogRelativePrice, ///< sum over ranks of squared log relative price differences
    Gap,              ///< sum over ranks of squared gap differences
};

inline double fit_deviation(const DistributionCurve& predicted, const DistributionCurve& observed, FitMetric metric) {
    double sum = 0.0;
    if (metric == FitMetric::Gap) {
        for (std::size_t k = 0; k < predicted.gaps.size(); ++k) {
            const double d = predicted.gaps[k] - observed.gaps[k];
            sum += d * d;
        }
    } else {
        for (std::size_t k = 0; k < predicted.log_shares.size(); ++k) {
            const double d = predicted.log_shares[k] - observed.log_shares[k];
            sum += d * d;
        }
    }
    return sum;
}

/// Smooth alpha and sigma (standard-deviation scale) `passes` times; alpha is
/// then re-closed by resetting alpha_N = -(alpha_1 + ... + alpha_{N-1}).
inline SmoothedParameters smooth_parameters(std::span<const double> alpha, std::span<const double> sigma2, int passes) {
    SmoothedParameters s;
    s.alpha = gaussian_smooth(alpha, passes);
    double head = 0.0;
    for (std::size_t k = 0; k + 1 < s.alpha.size(); ++k) head += s.alpha[k];
    s.alpha.back() = -head;

    std::vector<double> sigma(sigma2.size());
    for (std::size_t k = 0; k < sigma.size(); ++k) sigma[k] = std::sqrt(sigma2[k]);
    sigma = gaussian_smooth(sigma, passes);
    s.sigma2.resize(sigma.size());
    for (std::size_t k = 0; k < sigma.size(); ++k) s.sigma2[k] = sigma[k] * sigma[k];

    s.kappa = kappa_from_alpha(s.alpha);
    return s;
}

/// Smooth the estimates and choose the pass count.
///
/// With `passes` unset every m in [1, 100] is tried and the one whose
/// predicted curve is closest to `observed` under `metric` is kept; pass
/// counts whose smoothed alpha violates stationarity are skipped. With
/// `passes` set only that count is evaluated.
inline EstimateSet smooth_and_select(EstimateSet e, const DistributionCurve& observed, std::optional<int> passes = {},
                                     FitMetric metric = FitMetric::LogRelativePrice) {
    if (passes && (*passes < 1 || *passes > kMaxSmoothingPasses))
        throw InputError(InputError::Kind::InvalidArgument, "smoothing passes must lie in [1, 100]");
    const int first = passes ? *passes : 1;
    const int last = passes ? *passes : kMaxSmoothingPasses;

    std::optional<SmoothedParameters> best;
    int best_passes = 0;
    double best_deviation = std::numeric_limits<double>::infinity();
    for (int m = first; m <= last; ++m) {
        auto candidate = smooth_parameters(e.alpha, e.sigma2, m);
        DistributionCurve predicted;
        try {
            predicted = predict_stationary_gaps(candidate.alpha, candidate.sigma2);
        } catch (const StationarityViolation&) {
            continue;
        }
        const double deviation = fit_deviation(predicted, observed, metric);
        if (deviation < best_deviation) {
            best_deviation = deviation;
            candidate.fit_deviation = deviation;
            best = std::move(candidate);
            best_passes = m;
        }
    }
    if (!best)
        throw NoStationaryPrediction(passes ? "smoothing with " + std::to_string(*passes) +
                                                  " passes violates the stationarity condition"
                                            : "every smoothing pass count in [1, 100] violates the stationarity condition");
    e.smoothed = std::move(best);
    e.smoothing_passes = best_passes;
    return e;
}

} // namespace powerlaw
