// Invariants over many random panels.

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "powerlaw/estimator.hpp"
#include "support.hpp"

using namespace powerlaw;

namespace {

struct Case {
    std::size_t n, t;
    double vol;
};

std::vector<RankSharePanel> random_ranked(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> n(2, 20), t(2, 200);
    std::uniform_real_distribution<double> vol(0.001, 0.5);
    std::vector<RankSharePanel> out;
    for (std::size_t i = 0; i < count; ++i) {
        const Case c{n(rng), t(rng), vol(rng)};
        out.push_back(ranked_view(to_shares(testing_support::random_panel(rng, c.n, c.t, c.vol))));
    }
    return out;
}

} // namespace

TEST(Properties, AlphaSumsToZeroAndKappaMatchesPartialSums) {
    for (const auto& r : random_ranked(200, 1)) {
        const auto e = estimate(r);
        EXPECT_NEAR(std::accumulate(e.alpha.begin(), e.alpha.end(), 0.0), 0.0, 1e-10);
        const auto k = kappa_from_alpha(e.alpha);
        for (std::size_t i = 0; i < k.size(); ++i) EXPECT_NEAR(k[i], e.kappa[i], 1e-12 * std::max(1.0, e.kappa[i]));
    }
}

TEST(Properties, LocalTimeIsNonNegativeAndCumulative) {
    for (const auto& r : random_ranked(200, 2)) {
        const auto inc = pair_increments(r);
        for (std::size_t t = 0; t < inc.num_pairs(); ++t)
            for (std::size_t k = 0; k < inc.num_gaps(); ++k) ASSERT_GE(inc.local_time(t, k), 0.0);
        const auto lt = estimate_local_times(r);
        for (std::size_t t = 1; t < lt.series.lambda.rows(); ++t)
            for (std::size_t k = 0; k < lt.series.lambda.cols(); ++k)
                ASSERT_GE(lt.series.lambda(t, k), lt.series.lambda(t - 1, k));
    }
}

TEST(Properties, SharesSumToOne) {
    std::mt19937_64 rng(3);
    const auto s = to_shares(testing_support::random_panel(rng, 15, 100, 0.3));
    for (std::size_t t = 0; t < s.num_periods(); ++t) {
        auto row = s.values.row(t);
        EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
    }
}

TEST(Properties, EstimatesIgnoreCommonScaling) {
    std::mt19937_64 rng(4);
    const auto p = testing_support::random_panel(rng, 8, 60, 0.2);
    Matrix scaled = p.values();
    for (std::size_t t = 0; t < scaled.rows(); ++t)
        for (double& v : scaled.row(t)) v *= std::exp(static_cast<double>(t) * 0.3);
    const auto a = estimate(ranked_view(to_shares(p)));
    const auto b = estimate(ranked_view(to_shares(Panel(p.labels(), scaled))));
    for (std::size_t k = 0; k < a.alpha.size(); ++k) EXPECT_NEAR(a.alpha[k], b.alpha[k], 1e-10);
    for (std::size_t k = 0; k < a.sigma2.size(); ++k) EXPECT_NEAR(a.sigma2[k], b.sigma2[k], 1e-10);
}
