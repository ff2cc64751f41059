#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "powerlaw/error.hpp"
#include "powerlaw/estimator.hpp"
#include "powerlaw/panel.hpp"
#include "powerlaw/ranking.hpp"
#include "powerlaw/smoothing.hpp"

namespace powerlaw {

struct BootstrapOptions {
    std::size_t resamples = 1000;
    double level = 0.95;
    std::uint64_t seed = 0;
    int smoothing_passes = 0; ///< > 0 also bands the smoothed alpha and sigma2
    bool annualize = true;    ///< report bands in per-year units
    unsigned threads = 1;
};

/// The RNG stream of resample `index`; depends only on (seed, index).
inline std::mt19937_64 resample_stream(std::uint64_t seed, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(std::uint64_t(index) >> 32)};
    return std::mt19937_64(seq);
}

/// Draw T-1 adjacent-period pairs with replacement.
inline std::vector<std::size_t> draw_pairs(std::size_t num_pairs, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, num_pairs - 1);
    std::vector<std::size_t> rows(num_pairs);
    for (auto& r : rows) r = pick(rng);
    return rows;
}

namespace detail {

/// Nearest-rank order statistics at (1 - level)/2 and (1 + level)/2.
inline Band percentile_band(const std::vector<std::vector<double>>& draws, double level) {
    const std::size_t B = draws.size();
    const std::size_t width = draws.front().size();
    const auto order_index = [B](double q) {
        auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(B) - 1e-9));
        return std::clamp<std::size_t>(rank, 1, B) - 1;
    };
    const std::size_t lo = order_index((1.0 - level) / 2.0);
    const std::size_t hi = order_index((1.0 + level) / 2.0);
    Band band{std::vector<double>(width), std::vector<double>(width)};
    std::vector<double> column(B);
    for (std::size_t k = 0; k < width; ++k) {
        for (std::size_t b = 0; b < B; ++b) column[b] = draws[b][k];
        std::sort(column.begin(), column.end());
        band.lower[k] = column[lo];
        band.upper[k] = column[hi];
    }
    return band;
}

struct ResampleDraw {
    std::vector<double> alpha, sigma2, kappa, smoothed_alpha, smoothed_sigma2;
};

} // namespace detail

/// Percentile bootstrap over adjacent-period pairs. Precomputed per-pair
/// increments are resummed for each resample, so a resample costs O(T N).
inline ConfidenceBands bootstrap_ci(const PairIncrements& inc, const BootstrapOptions& opt) {
    if (opt.resamples < 1) throw InputError(InputError::Kind::InvalidArgument, "bootstrap needs at least one resample");
    if (!(opt.level > 0.0 && opt.level < 1.0))
        throw InputError(InputError::Kind::InvalidArgument, "confidence level must lie strictly between 0 and 1");
    if (opt.smoothing_passes < 0 || opt.smoothing_passes > kMaxSmoothingPasses)
        throw InputError(InputError::Kind::InvalidArgument, "smoothing passes must lie in [0, 100]");

    std::vector<detail::ResampleDraw> draws(opt.resamples);
    const double scale = opt.annualize ? static_cast<double>(inc.frequency) : 1.0;
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t b = begin; b < end; ++b) {
            auto rng = resample_stream(opt.seed, b);
            const auto rows = draw_pairs(inc.num_pairs(), rng);
            auto e = estimate_from_pairs(inc, rows);
            for (double& v : e.alpha) v *= scale;
            for (double& v : e.sigma2) v *= scale;
            for (double& v : e.kappa) v *= scale;
            auto& d = draws[b];
            if (opt.smoothing_passes > 0) {
                auto s = smooth_parameters(e.alpha, e.sigma2, opt.smoothing_passes);
                d.smoothed_alpha = std::move(s.alpha);
                d.smoothed_sigma2 = std::move(s.sigma2);
            }
            d.alpha = std::move(e.alpha);
            d.sigma2 = std::move(e.sigma2);
            d.kappa = std::move(e.kappa);
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(opt.resamples)));
    if (threads == 1) {
        work(0, opt.resamples);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (opt.resamples + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(opt.resamples, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
    }

    const auto collect = [&](auto member) {
        std::vector<std::vector<double>> cols(draws.size());
        for (std::size_t b = 0; b < draws.size(); ++b) cols[b] = draws[b].*member;
        return detail::percentile_band(cols, opt.level);
    };
    ConfidenceBands bands;
    bands.alpha = collect(&detail::ResampleDraw::alpha);
    bands.sigma2 = collect(&detail::ResampleDraw::sigma2);
    bands.kappa = collect(&detail::ResampleDraw::kappa);
    if (opt.smoothing_passes > 0) {
        bands.smoothed_alpha = collect(&detail::ResampleDraw::smoothed_alpha);
        bands.smoothed_sigma2 = collect(&detail::ResampleDraw::smoothed_sigma2);
    }
    bands.level = opt.level;
    bands.resamples = opt.resamples;
    bands.seed = opt.seed;
    return bands;
}

inline ConfidenceBands bootstrap_ci(const SharePanel& s, const BootstrapOptions& opt) {
    return bootstrap_ci(pair_increments(ranked_view(s)), opt);
}

} // namespace powerlaw
