#pragma once

#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "powerlaw/error.hpp"
#include "powerlaw/panel.hpp"
#include "powerlaw/ranking.hpp"

namespace powerlaw {

struct PortfolioSeries {
    std::vector<double> log_value;      ///< length T, starts at 0
    std::vector<double> period_returns; ///< length T-1, simple returns
    double avg_period_return = 0.0;
    double avg_annual_return = 0.0;
};

namespace detail {

/// Mean simple return over consecutive non-overlapping years of `frequency`
/// periods. Falls back to compounding the mean period return when the
/// sample is shorter than one year.
inline double average_annual_return(const std::vector<double>& log_value, double avg_period_return, int frequency) {
    const std::size_t f = static_cast<std::size_t>(frequency);
    const std::size_t years = (log_value.size() - 1) / f;
    if (years == 0) return std::pow(1.0 + avg_period_return, frequency) - 1.0;
    double sum = 0.0;
    for (std::size_t y = 0; y < years; ++y) sum += std::expm1(log_value[(y + 1) * f] - log_value[y * f]);
    return sum / static_cast<double>(years);
}

} // namespace detail

/// Equal-weight portfolio rebalanced every period into the entities holding
/// `ranks` (1-based) at t, held over t -> t+1. Selection uses the panel's own
/// rank permutation; returns are the held entities' price relatives.
inline PortfolioSeries backtest_rank_portfolio(const Panel& p, const std::set<std::size_t>& ranks) {
    const std::size_t N = p.num_entities();
    const std::size_t T = p.num_periods();
    if (ranks.empty()) throw InputError(InputError::Kind::EmptyRankSet, "rank set is empty");
    if (*ranks.begin() < 1 || *ranks.rbegin() > N)
        throw InputError(InputError::Kind::InvalidArgument, "ranks must lie in [1, " + std::to_string(N) + "]");

    const auto& x = p.values();
    PortfolioSeries s;
    s.log_value.assign(T, 0.0);
    s.period_returns.resize(T - 1);
    for (std::size_t t = 0; t + 1 < T; ++t) {
        const auto perm = rank_permutation(x.row(t));
        double sum = 0.0;
        for (std::size_t k : ranks) {
            const std::size_t i = perm.entity_at(k);
            sum += x(t + 1, i) / x(t, i) - 1.0;
        }
        const double r = sum / static_cast<double>(ranks.size());
        s.period_returns[t] = r;
        s.log_value[t + 1] = s.log_value[t] + std::log1p(r);
    }
    double total = 0.0;
    for (double r : s.period_returns) total += r;
    s.avg_period_return = total / static_cast<double>(s.period_returns.size());
    s.avg_annual_return = detail::average_annual_return(s.log_value, s.avg_period_return, p.frequency());
    return s;
}

inline std::set<std::size_t> rank_range(std::size_t first, std::size_t last) {
    std::set<std::size_t> out;
    for (std::size_t k = first; k <= last; ++k) out.insert(k);
    return out;
}

struct SizeEffectReport {
    std::size_t split_rank = 0;
    PortfolioSeries expensive;         ///< ranks 1..split
    PortfolioSeries cheap;             ///< ranks split+1..N
    std::vector<double> relative_log;  ///< cheap minus expensive log value
};

inline std::size_t default_split(std::size_t n) { return (n + 1) / 2; }

/// Top-ranked versus bottom-ranked portfolios split after `split_rank`.
inline SizeEffectReport size_effect_summary(const Panel& p, std::size_t split_rank) {
    const std::size_t N = p.num_entities();
    if (split_rank < 1 || split_rank >= N)
        throw InputError(InputError::Kind::InvalidArgument, "split rank must lie in [1, " + std::to_string(N - 1) + "]");
    SizeEffectReport rep;
    rep.split_rank = split_rank;
    rep.expensive = backtest_rank_portfolio(p, rank_range(1, split_rank));
    rep.cheap = backtest_rank_portfolio(p, rank_range(split_rank + 1, N));
    rep.relative_log.resize(p.num_periods());
    for (std::size_t t = 0; t < rep.relative_log.size(); ++t)
        rep.relative_log[t] = rep.cheap.log_value[t] - rep.expensive.log_value[t];
    return rep;
}

} // namespace powerlaw
