#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "powerlaw/error.hpp"
#include "powerlaw/estimator.hpp"
#include "powerlaw/matrix.hpp"
#include "powerlaw/panel.hpp"
#include "powerlaw/ranking.hpp"

namespace powerlaw::sim {

/// Reflected-Brownian approximation of each rank gap:
/// dg_k = -kappa_k dt + dLambda_k + sigma_k dB_k, independent across k.
struct StableGapSpec {
    std::vector<double> kappa;    ///< per year, > 0
    std::vector<double> sigma;    ///< per sqrt(year), > 0
    std::vector<double> gap_init; ///< >= 0; empty means all zero
    double dt = 1.0 / 1200.0;     ///< years per step
    std::size_t steps = 12000;    ///< fine steps after the initial state
    std::size_t sample_every = 10;
    std::uint64_t seed = 1;
};

/// Name-based log-level dynamics d log x_i = mu_i dt + sum_s delta_is dB_s,
/// with mu_i depending on the rank entity i currently holds.
struct NameModelSpec {
    Matrix drift;           ///< N x N, drift(i, k-1) = mu of entity i at rank k, per year
    Matrix loadings;        ///< N x M volatility loadings delta_is, per sqrt(year), M >= N
    std::vector<double> x0; ///< initial levels, > 0
    double dt = 1.0 / 1200.0;
    std::size_t steps = 12000;
    std::size_t sample_every = 10;
    std::size_t burn_in = 0; ///< fine steps discarded before sampling starts
    std::uint64_t seed = 1;
};

/// Known parameters behind a simulated panel, per year.
struct GroundTruth {
    std::vector<double> alpha;  ///< nominal when the model defines it, else empirical
    std::vector<double> sigma2;
    std::vector<double> kappa;
    std::vector<double> alpha_empirical;  ///< time average of mu_{p_t(k)} - mu(t) along the path
    std::vector<double> sigma2_empirical; ///< time average of sum_s (delta_{p_t(k)s} - delta_{p_t(k+1)s})^2
};

struct SimOutput {
    PanelLabels labels;
    Matrix levels;        ///< T x N sampled levels
    Matrix gaps;          ///< T x (N-1) sampled rank gaps
    Matrix local_time;    ///< T x (N-1) cumulative local time of each rank gap
    Matrix signed_gaps;   ///< stable model only: unfolded gap paths whose absolute value is `gaps`
    GroundTruth truth;

    Panel panel() const { return Panel(labels, levels); }
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw InputError(InputError::Kind::InvalidSpec, what);
}

inline int sampled_frequency(double dt, std::size_t sample_every) {
    const double per_year = 1.0 / (dt * static_cast<double>(sample_every));
    return std::max(1, static_cast<int>(std::lround(per_year)));
}

inline PanelLabels synthetic_labels(std::size_t n, std::size_t periods, int frequency, const std::string& prefix) {
    PanelLabels labels;
    labels.frequency = frequency;
    for (std::size_t i = 0; i < n; ++i) labels.entities.push_back(prefix + std::to_string(i + 1));
    for (std::size_t t = 0; t < periods; ++t) labels.times.push_back(std::to_string(t));
    return labels;
}

} // namespace detail

/// Ranked shares from rank gaps: ratios exp(gap) between neighbours, rows
/// normalized to sum one. Entity k is identified with rank k.
inline SharePanel gaps_to_shares(const Matrix& gaps, int frequency = 12) {
    const std::size_t T = gaps.rows();
    const std::size_t N = gaps.cols() + 1;
    Matrix shares(T, N);
    std::vector<double> log_level(N);
    for (std::size_t t = 0; t < T; ++t) {
        log_level[0] = 0.0;
        for (std::size_t k = 0; k + 1 < N; ++k) {
            const double g = gaps(t, k);
            if (!(g >= 0.0))
                throw InputError(InputError::Kind::NegativeGap,
                                 "negative gap at row " + std::to_string(t + 1) + ", rank " + std::to_string(k + 1));
            log_level[k + 1] = log_level[k] - g;
        }
        double total = 0.0;
        for (std::size_t k = 0; k < N; ++k) total += std::exp(log_level[k]);
        for (std::size_t k = 0; k < N; ++k) shares(t, k) = std::exp(log_level[k]) / total;
    }
    return {detail::synthetic_labels(N, T, frequency, "rank"), std::move(shares)};
}

/// Euler scheme with reflection at zero. A proposal g' < 0 is folded to -g'
/// and contributes -2 g' to the local time. The sign of the unfolded path
/// flips on every fold, so for two entities it is the log ratio of entity 1
/// to entity 2.
inline SimOutput simulate_stable_gaps(const StableGapSpec& spec) {
    const std::size_t gaps = spec.kappa.size();
    detail::require(gaps >= 1, "stable spec needs at least one gap");
    detail::require(spec.sigma.size() == gaps, "kappa and sigma must have the same length");
    detail::require(spec.gap_init.empty() || spec.gap_init.size() == gaps, "gap_init must match kappa in length");
    detail::require(spec.dt > 0.0 && std::isfinite(spec.dt), "dt must be positive");
    detail::require(spec.sample_every >= 1, "sample_every must be at least 1");
    for (std::size_t k = 0; k < gaps; ++k) {
        detail::require(spec.kappa[k] > 0.0, "kappa must be positive");
        detail::require(spec.sigma[k] > 0.0, "sigma must be positive");
        if (!spec.gap_init.empty()) detail::require(spec.gap_init[k] >= 0.0, "gap_init must be non-negative");
    }

    const std::size_t samples = spec.steps / spec.sample_every + 1;
    SimOutput out;
    out.gaps = Matrix(samples, gaps);
    out.signed_gaps = Matrix(samples, gaps);
    out.local_time = Matrix(samples, gaps);

    std::vector<double> g = spec.gap_init.empty() ? std::vector<double>(gaps, 0.0) : spec.gap_init;
    std::vector<double> sign(gaps, 1.0);
    std::vector<double> lambda(gaps, 0.0);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sqrt_dt = std::sqrt(spec.dt);

    auto record = [&](std::size_t row) {
        for (std::size_t k = 0; k < gaps; ++k) {
            out.gaps(row, k) = g[k];
            out.signed_gaps(row, k) = sign[k] * g[k];
            out.local_time(row, k) = lambda[k];
        }
    };
    record(0);
    for (std::size_t step = 1; step <= spec.steps; ++step) {
        for (std::size_t k = 0; k < gaps; ++k) {
            const double proposal = g[k] - spec.kappa[k] * spec.dt + spec.sigma[k] * sqrt_dt * normal(rng);
            if (proposal < 0.0) {
                g[k] = -proposal;
                lambda[k] += -2.0 * proposal;
                sign[k] = -sign[k];
            } else {
                g[k] = proposal;
            }
        }
        if (step % spec.sample_every == 0) record(step / spec.sample_every);
    }

    const int frequency = detail::sampled_frequency(spec.dt, spec.sample_every);
    auto shares = gaps_to_shares(out.gaps, frequency);
    out.labels = std::move(shares.labels);
    out.levels = std::move(shares.values);
    out.truth.kappa = spec.kappa;
    out.truth.sigma2.resize(gaps);
    for (std::size_t k = 0; k < gaps; ++k) out.truth.sigma2[k] = spec.sigma[k] * spec.sigma[k];
    out.truth.alpha = alpha_from_kappa(out.truth.kappa);
    return out;
}

/// Shares of two named entities whose log ratio is z(t) = log theta_1 - log theta_2.
inline SharePanel two_entity_shares(std::span<const double> z, int frequency) {
    Matrix shares(z.size(), 2);
    for (std::size_t t = 0; t < z.size(); ++t) {
        // theta_1 = 1 / (1 + e^{-z}), evaluated without overflow
        const double e = std::exp(-std::abs(z[t]));
        const double big = 1.0 / (1.0 + e);
        const double small = e / (1.0 + e);
        shares(t, 0) = z[t] >= 0.0 ? big : small;
        shares(t, 1) = z[t] >= 0.0 ? small : big;
    }
    return {detail::synthetic_labels(2, z.size(), frequency, "entity"), std::move(shares)};
}

namespace detail {

/// Solve (I - J/2) x = d for the (N-1) x (N-1) tridiagonal matrix with unit
/// diagonal and -1/2 off the diagonal (Thomas algorithm).
inline void solve_local_time_system(std::vector<double>& d) {
    const std::size_t n = d.size();
    std::vector<double> c(n, 0.0);
    double denom = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        denom = i == 0 ? 1.0 : 1.0 - (-0.5) * c[i - 1];
        if (i > 0) d[i] = d[i] - (-0.5) * d[i - 1];
        c[i] = -0.5 / denom;
        d[i] /= denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
}

} // namespace detail

/// Log-Euler simulation of the name-based model.
///
/// Local time is recovered at every fine step from the rank-gap identity
/// dgap_k = d(frozen gap_k) + dLambda_k - (dLambda_{k-1} + dLambda_{k+1}) / 2,
/// which is independent of the panel estimator. Ground-truth alpha and
/// sigma2 are time averages along the simulated path, with the aggregate
/// drift mu(t) taken from the total-units dynamics.
inline SimOutput simulate_name_model(const NameModelSpec& spec) {
    const std::size_t N = spec.x0.size();
    detail::require(N >= 2, "name model needs at least 2 entities");
    detail::require(spec.drift.rows() == N && spec.drift.cols() == N, "drift table must be N x N");
    detail::require(spec.loadings.rows() == N && spec.loadings.cols() >= N, "loadings must be N x M with M >= N");
    detail::require(spec.dt > 0.0 && std::isfinite(spec.dt), "dt must be positive");
    detail::require(spec.sample_every >= 1, "sample_every must be at least 1");
    for (std::size_t i = 0; i < N; ++i) {
        detail::require(spec.x0[i] > 0.0, "initial levels must be positive");
        detail::require(spec.loadings(i, i) >= 0.0, "own-noise loadings must be non-negative");
    }
    const std::size_t M = spec.loadings.cols();

    Matrix rho(N, N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
            double s = 0.0;
            for (std::size_t m = 0; m < M; ++m) s += spec.loadings(i, m) * spec.loadings(j, m);
            rho(i, j) = s;
        }

    std::vector<double> log_x(N);
    for (std::size_t i = 0; i < N; ++i) log_x[i] = std::log(spec.x0[i]);

    const std::size_t samples = spec.steps / spec.sample_every + 1;
    SimOutput out;
    out.levels = Matrix(samples, N);
    out.gaps = Matrix(samples, N - 1);
    out.local_time = Matrix(samples, N - 1);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sqrt_dt = std::sqrt(spec.dt);

    std::vector<double> lambda(N - 1, 0.0);
    std::vector<double> alpha_sum(N, 0.0);
    std::vector<double> sigma2_sum(N - 1, 0.0);
    std::vector<double> mu(N), theta(N), dB(M), d(N - 1), next(N);
    std::vector<std::size_t> rank_of(N);

    auto record = [&](std::size_t row, const Permutation& perm) {
        const auto& order = perm.order();
        for (std::size_t i = 0; i < N; ++i) out.levels(row, i) = std::exp(log_x[i]);
        for (std::size_t k = 0; k + 1 < N; ++k) {
            out.gaps(row, k) = log_x[order[k]] - log_x[order[k + 1]];
            out.local_time(row, k) = lambda[k];
        }
    };

    Permutation perm = rank_permutation(log_x);
    const std::size_t total = spec.burn_in + spec.steps;
    if (spec.burn_in == 0) record(0, perm);
    for (std::size_t step = 1; step <= total; ++step) {
        const bool sampling = step > spec.burn_in;
        const auto& order = perm.order();
        for (std::size_t k = 0; k < N; ++k) rank_of[order[k]] = k;
        for (std::size_t i = 0; i < N; ++i) mu[i] = spec.drift(i, rank_of[i]);

        if (sampling) {
            const double top = *std::max_element(log_x.begin(), log_x.end());
            double sum = 0.0;
            for (std::size_t i = 0; i < N; ++i) sum += (theta[i] = std::exp(log_x[i] - top));
            for (double& th : theta) th /= sum;
            double agg = 0.0, own = 0.0, cross = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                agg += theta[i] * mu[i];
                own += theta[i] * rho(i, i);
                for (std::size_t j = 0; j < N; ++j) cross += theta[i] * theta[j] * rho(i, j);
            }
            const double aggregate_mu = agg + 0.5 * (own - cross);
            for (std::size_t k = 0; k < N; ++k) alpha_sum[k] += (mu[order[k]] - aggregate_mu) * spec.dt;
            for (std::size_t k = 0; k + 1 < N; ++k) {
                double v = 0.0;
                for (std::size_t m = 0; m < M; ++m) {
                    const double diff = spec.loadings(order[k], m) - spec.loadings(order[k + 1], m);
                    v += diff * diff;
                }
                sigma2_sum[k] += v * spec.dt;
            }
        }

        for (double& b : dB) b = sqrt_dt * normal(rng);
        for (std::size_t i = 0; i < N; ++i) {
            double noise = 0.0;
            for (std::size_t m = 0; m < M; ++m) noise += spec.loadings(i, m) * dB[m];
            next[i] = log_x[i] + mu[i] * spec.dt + noise;
        }
        Permutation next_perm = rank_permutation(next);
        const auto& next_order = next_perm.order();
        for (std::size_t k = 0; k + 1 < N; ++k) {
            const double gap_change =
                (next[next_order[k]] - next[next_order[k + 1]]) - (log_x[order[k]] - log_x[order[k + 1]]);
            const double frozen_change =
                (next[order[k]] - next[order[k + 1]]) - (log_x[order[k]] - log_x[order[k + 1]]);
            d[k] = gap_change - frozen_change;
        }
        if (next_order != order) {
            detail::solve_local_time_system(d);
            for (std::size_t k = 0; k + 1 < N; ++k) lambda[k] += d[k];
        }
        log_x.swap(next);
        perm = std::move(next_perm);

        if (sampling && (step - spec.burn_in) % spec.sample_every == 0)
            record((step - spec.burn_in) / spec.sample_every, perm);
        if (step == spec.burn_in) {
            std::fill(lambda.begin(), lambda.end(), 0.0);
            record(0, perm);
        }
    }

    const int frequency = detail::sampled_frequency(spec.dt, spec.sample_every);
    out.labels = detail::synthetic_labels(N, samples, frequency, "entity");
    const double horizon = static_cast<double>(spec.steps) * spec.dt;
    out.truth.alpha_empirical.resize(N);
    out.truth.sigma2_empirical.resize(N - 1);
    for (std::size_t k = 0; k < N; ++k) out.truth.alpha_empirical[k] = alpha_sum[k] / horizon;
    for (std::size_t k = 0; k + 1 < N; ++k) out.truth.sigma2_empirical[k] = sigma2_sum[k] / horizon;
    out.truth.alpha = out.truth.alpha_empirical;
    out.truth.sigma2 = out.truth.sigma2_empirical;
    out.truth.kappa = kappa_from_alpha(out.truth.alpha);
    return out;
}

/// Gibrat preset: every rank k < N drifts at `alpha` relative to the
/// cross-section and rank N at -(N-1) alpha, so the rank drifts average to
/// zero. Each entity carries independent noise with variance sigma2 / 2,
/// which makes every rank gap's variance equal to `sigma2`. The initial
/// state places the gaps at their stationary means sigma2 / (-4 k alpha).
struct GibratPreset {
    std::size_t n = 10;
    double alpha = -0.05; ///< per year, < 0
    double sigma2 = 0.2;  ///< rank-gap variance per year, > 0
    std::size_t periods = 600;
    std::size_t sample_every = 10;
    double dt = 1.0 / 120.0; ///< ten fine steps per monthly period
    std::size_t burn_in_periods = 120;
    std::uint64_t seed = 1;
};

inline NameModelSpec gibrat_spec(const GibratPreset& p) {
    detail::require(p.n >= 2, "Gibrat preset needs at least 2 entities");
    detail::require(p.alpha < 0.0, "Gibrat preset needs alpha < 0");
    detail::require(p.sigma2 > 0.0, "Gibrat preset needs sigma2 > 0");
    NameModelSpec spec;
    const std::size_t N = p.n;
    spec.drift = Matrix(N, N, p.alpha);
    for (std::size_t i = 0; i < N; ++i) spec.drift(i, N - 1) = -static_cast<double>(N - 1) * p.alpha;
    spec.loadings = Matrix(N, N, 0.0);
    for (std::size_t i = 0; i < N; ++i) spec.loadings(i, i) = std::sqrt(p.sigma2 / 2.0);
    spec.x0.resize(N);
    double log_level = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        spec.x0[k] = std::exp(log_level);
        log_level -= p.sigma2 / (-4.0 * static_cast<double>(k + 1) * p.alpha);
    }
    spec.dt = p.dt;
    spec.sample_every = p.sample_every;
    spec.steps = p.periods * p.sample_every;
    spec.burn_in = p.burn_in_periods * p.sample_every;
    spec.seed = p.seed;
    return spec;
}

/// Simulate the Gibrat preset; nominal parameters are reported as the truth.
inline SimOutput simulate_gibrat(const GibratPreset& p) {
    auto out = simulate_name_model(gibrat_spec(p));
    out.truth.alpha.assign(p.n, p.alpha);
    out.truth.alpha.back() = -static_cast<double>(p.n - 1) * p.alpha;
    out.truth.sigma2.assign(p.n - 1, p.sigma2);
    out.truth.kappa = kappa_from_alpha(out.truth.alpha);
    return out;
}

} // namespace powerlaw::sim
