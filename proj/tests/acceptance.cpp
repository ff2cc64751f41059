// Acceptance run: one PASS/FAIL/SKIP line per criterion. Seeds are fixed
// here and never tuned. Exit status is non-zero if any criterion fails.
//
// Criterion 9 needs the commodity panel; point POWERLAW_COMMODITY_CSV at a
// wide CSV (period column, one column per commodity) to enable it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "powerlaw/powerlaw.hpp"
#include "powerlaw/cli.hpp"

namespace fs = std::filesystem;
using namespace powerlaw;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
    Verdict verdict;
    std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Verdict::Pass : Verdict::Fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

unsigned worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Log-normal random walks with a random size per panel.
std::vector<RankSharePanel> random_panels(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> n_dist(2, 20), t_dist(2, 200);
    std::uniform_real_distribution<double> vol_dist(0.001, 0.5);
    std::vector<RankSharePanel> out;
    out.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        const std::size_t n = n_dist(rng), T = t_dist(rng);
        std::normal_distribution<double> z(0.0, vol_dist(rng));
        PanelLabels labels;
        for (std::size_t i = 0; i < n; ++i) labels.entities.push_back("e" + std::to_string(i));
        for (std::size_t t = 0; t < T; ++t) labels.times.push_back(std::to_string(t));
        Matrix x(T, n);
        for (std::size_t i = 0; i < n; ++i) x(0, i) = std::exp(3.0 * z(rng));
        for (std::size_t t = 1; t < T; ++t)
            for (std::size_t i = 0; i < n; ++i) x(t, i) = x(t - 1, i) * std::exp(z(rng));
        out.push_back(ranked_view(to_shares(Panel(labels, x))));
    }
    return out;
}

const std::vector<RankSharePanel>& shared_random_panels() {
    static const auto panels = random_panels(1000, 20240601);
    return panels;
}

Outcome zipf_exactness() {
    const std::size_t N = 51;
    std::vector<double> alpha(N, -0.05);
    alpha.back() = 0.05 * static_cast<double>(N - 1);
    const std::vector<double> sigma2(N - 1, 0.2);
    const auto curve = predict_stationary_gaps(alpha, sigma2);
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < N; ++k) worst = std::max(worst, std::abs(curve.gaps[k] - 1.0 / (k + 1.0)));
    double slope_err = 0.0;
    for (double s : local_pareto_slopes(curve)) slope_err = std::max(slope_err, std::abs(s + 1.0));
    slope_err = std::max(slope_err, std::abs(gibrat_closed_form(-0.05, 0.2, N).pareto_slope + 1.0));
    return pass_if(worst <= 1e-12 && slope_err <= 1e-12,
                   fmt("max |gap_k - 1/k| = %.2e, max |slope + 1| = %.2e", worst, slope_err));
}

Outcome closure_identity() {
    double worst_sum = 0.0, worst_kappa = 0.0;
    for (const auto& r : shared_random_panels()) {
        const auto e = estimate(r);
        worst_sum = std::max(worst_sum, std::abs(std::accumulate(e.alpha.begin(), e.alpha.end(), 0.0)));
        const auto k = kappa_from_alpha(e.alpha);
        for (std::size_t i = 0; i < k.size(); ++i)
            worst_kappa = std::max(worst_kappa, std::abs(k[i] - e.kappa[i]) / std::max(1.0, std::abs(e.kappa[i])));
    }
    return pass_if(worst_sum <= 1e-10 && worst_kappa <= 1e-12,
                   fmt("1000 panels: max |sum alpha| = %.2e, max kappa mismatch = %.2e", worst_sum, worst_kappa));
}

Outcome local_time_positivity() {
    std::size_t negative = 0, decreasing = 0, increments = 0;
    for (const auto& r : shared_random_panels()) {
        const auto inc = pair_increments(r);
        for (std::size_t t = 0; t < inc.num_pairs(); ++t)
            for (std::size_t k = 0; k < inc.num_gaps(); ++k, ++increments) negative += inc.local_time(t, k) < 0.0;
        const auto lt = estimate_local_times(r);
        for (std::size_t t = 1; t < lt.series.lambda.rows(); ++t)
            for (std::size_t k = 0; k < lt.series.lambda.cols(); ++k)
                decreasing += lt.series.lambda(t, k) < lt.series.lambda(t - 1, k);
    }
    return pass_if(negative == 0 && decreasing == 0,
                   fmt("%zu increments: %zu negative, %zu path decreases", increments, negative, decreasing));
}

Outcome tanaka_equivalence() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        sim::StableGapSpec spec;
        spec.kappa = {0.5};
        spec.sigma = {1.0};
        spec.dt = 1e-3;
        spec.steps = 100000;
        spec.sample_every = 1;
        spec.seed = seed;
        const auto path = sim::simulate_stable_gaps(spec);
        std::vector<double> z(path.signed_gaps.rows());
        for (std::size_t t = 0; t < z.size(); ++t) z[t] = path.signed_gaps(t, 0);
        const auto est = estimate_local_times(ranked_view(sim::two_entity_shares(z, path.labels.frequency)));
        const double estimated = est.series.lambda(z.size() - 1, 0);
        // A rank gap's local time is twice the Tanaka local time of the signed log ratio.
        const double oracle = 2.0 * tanaka_local_time(z);
        worst = std::max(worst, rel_err(estimated, oracle));
    }
    return pass_if(worst <= 0.05, fmt("20 seeds: max relative error %.2e", worst));
}

Outcome ergodic_identity() {
    sim::StableGapSpec spec;
    spec.kappa = {0.5};
    spec.sigma = {1.0};
    spec.dt = 1e-3;
    spec.steps = 100000;
    spec.sample_every = 1;
    spec.seed = 1;
    const auto path = sim::simulate_stable_gaps(spec);
    double mean = 0.0;
    for (std::size_t t = 1; t < path.gaps.rows(); ++t) mean += path.gaps(t, 0);
    mean /= static_cast<double>(path.gaps.rows() - 1);
    const double target = 1.0 / (2.0 * 0.5);
    return pass_if(rel_err(mean, target) <= 0.05, fmt("time-average gap %.4f vs %.4f (%.1f%%)", mean, target,
                                                       100.0 * rel_err(mean, target)));
}

Outcome round_trip() {
    sim::GibratPreset preset;
    preset.periods = 50000;
    preset.seed = 7;
    const auto out = sim::simulate_gibrat(preset);
    const auto ranked = ranked_view(to_shares(out.panel()));
    const auto e = annualize(estimate(ranked), out.labels.frequency);
    const auto predicted = predict_stationary_gaps(e.alpha, e.sigma2);
    const auto observed = observed_average_gaps(ranked);
    double a_err = 0.0, s_err = 0.0, g_err = 0.0;
    for (std::size_t k = 3; k <= 7; ++k) {
        a_err = std::max(a_err, rel_err(e.alpha[k - 1], -0.05));
        s_err = std::max(s_err, rel_err(e.sigma2[k - 1], 0.2));
        g_err = std::max(g_err, rel_err(predicted.gaps[k - 1], observed.gaps[k - 1]));
    }
    std::string alphas;
    for (std::size_t k = 3; k <= 7; ++k) alphas += fmt("%s%.4f", k == 3 ? "" : " ", e.alpha[k - 1]);
    return pass_if(a_err <= 0.15 && s_err <= 0.10 && g_err <= 0.10,
                   fmt("ranks 3-7: alpha [%s] max err %.1f%%, sigma2 max err %.1f%%, gap max err %.1f%%",
                       alphas.c_str(), 100 * a_err, 100 * s_err, 100 * g_err));
}

Outcome bootstrap_coverage() {
    std::size_t inside = 0, total = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        sim::GibratPreset preset;
        preset.periods = 499; // 500 observed periods
        preset.seed = seed;
        const auto out = sim::simulate_gibrat(preset);
        BootstrapOptions opt;
        opt.resamples = 500;
        opt.level = 0.95;
        opt.seed = 1000 + seed;
        opt.threads = worker_threads();
        const auto ci = bootstrap_ci(to_shares(out.panel()), opt);
        for (std::size_t k = 3; k <= 7; ++k, ++total)
            inside += ci.alpha.lower[k - 1] <= -0.05 && -0.05 <= ci.alpha.upper[k - 1];
    }
    const double coverage = static_cast<double>(inside) / static_cast<double>(total);
    return pass_if(coverage >= 0.88 && coverage <= 0.99,
                   fmt("coverage %.1f%% over %zu (panel, rank) pairs", 100 * coverage, total));
}

Outcome size_effect() {
    std::size_t wins = 0;
    const std::size_t runs = 100;
    for (std::uint64_t seed = 1; seed <= runs; ++seed) {
        sim::GibratPreset preset;
        preset.periods = 1200;
        preset.seed = seed;
        const auto panel = sim::simulate_gibrat(preset).panel();
        const auto rep = size_effect_summary(panel, default_split(panel.num_entities()));
        wins += rep.cheap.log_value.back() > rep.expensive.log_value.back();
    }
    const double share = static_cast<double>(wins) / static_cast<double>(runs);
    return pass_if(share > 0.95, fmt("bottom half ahead at the end in %zu of %zu runs", wins, runs));
}

Outcome commodity_reproduction() {
    const char* path = std::getenv("POWERLAW_COMMODITY_CSV");
    if (!path || !*path) return {Verdict::Skip, "set POWERLAW_COMMODITY_CSV to the 22-series monthly panel"};
    std::ifstream in(path, std::ios::binary);
    if (!in) return {Verdict::Fail, std::string("cannot open ") + path};
    const Panel panel = normalize_initial(load_panel(in, {12, PanelFormat::Wide}));

    cli::RunConfig config;
    const auto a = cli::detail::analyze(panel, config, true);
    const auto predicted = predict_stationary_gaps(a.estimates);
    const double deviation = fit_deviation(predicted, a.observed, FitMetric::LogRelativePrice);

    const auto rep = size_effect_summary(panel, default_split(panel.num_entities()));
    const double cheap = 100.0 * rep.cheap.avg_annual_return;
    const double expensive = 100.0 * rep.expensive.avg_annual_return;

    BootstrapOptions opt;
    opt.resamples = 1000;
    opt.seed = 1;
    opt.smoothing_passes = a.estimates.smoothing_passes;
    opt.threads = worker_threads();
    const auto ci = bootstrap_ci(a.increments, opt);
    bool inside = true;
    for (std::size_t k = 0; k < a.estimates.alpha.size(); ++k)
        inside = inside && ci.alpha.lower[k] <= a.estimates.alpha[k] && a.estimates.alpha[k] <= ci.alpha.upper[k];
    for (std::size_t k = 0; k < a.estimates.sigma2.size(); ++k)
        inside = inside && ci.sigma2.lower[k] <= a.estimates.sigma2[k] && a.estimates.sigma2[k] <= ci.sigma2.upper[k];

    const bool ok = std::abs(deviation - 0.143) <= 0.05 && std::abs(cheap - 8.62) <= 1.0 &&
                    std::abs(expensive - 2.25) <= 1.0 && inside;
    return pass_if(ok, fmt("N=%zu T=%zu passes=%d deviation %.3f, cheap %.2f%%, expensive %.2f%%, estimates %s bands",
                           panel.num_entities(), panel.num_periods(), a.estimates.smoothing_passes, deviation, cheap,
                           expensive, inside ? "inside" : "outside"));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "powerlaw_acceptance_determinism";
    fs::remove_all(root);
    std::ostringstream log;

    cli::RunConfig sim;
    sim.subcommand = "simulate";
    sim.periods = 360;
    sim.n = 8;
    sim.seed = 11;
    sim.output_dir = (root / "input").string();
    if (cli::run(sim, log) != cli::kOk) return {Verdict::Fail, "simulate failed: " + log.str()};
    const std::string panel = (root / "input" / "panel.csv").string();

    std::vector<cli::RunConfig> configs;
    configs.push_back(sim);
    for (const char* sub : {"estimate", "predict", "bootstrap", "backtest", "report"}) {
        cli::RunConfig c;
        c.subcommand = sub;
        c.input = panel;
        c.seed = 5;
        c.resamples = 200;
        c.threads = 3;
        configs.push_back(c);
    }

    std::size_t compared = 0;
    std::string mismatch;
    for (const auto& base : configs) {
        std::vector<fs::path> dirs;
        for (int rep = 0; rep < 2; ++rep) {
            auto c = base;
            dirs.push_back(root / (c.subcommand + std::to_string(rep)));
            c.output_dir = dirs.back().string();
            if (cli::run(c, log) != cli::kOk) return {Verdict::Fail, c.subcommand + " failed: " + log.str()};
        }
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            const auto name = entry.path().filename();
            if (name == "manifest.json") continue;
            ++compared;
            if (!fs::exists(dirs[1] / name) || slurp(entry.path()) != slurp(dirs[1] / name))
                mismatch += " " + base.subcommand + "/" + name.string();
        }
    }
    fs::remove_all(root);
    return pass_if(mismatch.empty() && compared > 0,
                   fmt("%zu files compared across 6 subcommands%s%s", compared, mismatch.empty() ? "" : "; differ:",
                       mismatch.c_str()));
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria = {
        {1, "Gibrat closed-form exactness", 1, zipf_exactness},
        {2, "closure identity", 10, closure_identity},
        {3, "local-time positivity", 10, local_time_positivity},
        {4, "Tanaka oracle equivalence", 30, tanaka_equivalence},
        {5, "ergodic identity", 10, ergodic_identity},
        {6, "round-trip recovery", 60, round_trip},
        {7, "bootstrap coverage", 300, bootstrap_coverage},
        {8, "size effect on synthetic data", 120, size_effect},
        {9, "commodity reproduction", 600, commodity_reproduction},
        {10, "determinism", 60, determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& ex) {
            o = {Verdict::Fail, std::string("exception: ") + ex.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (o.verdict == Verdict::Pass && secs > c.budget_s) {
            o.verdict = Verdict::Fail;
            o.detail += fmt(" (over the %.0f s budget)", c.budget_s);
        }
        const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
        failures += o.verdict == Verdict::Fail;
        std::printf("[%s] criterion %2d  %-30s %7.2fs  %s\n", tag, c.id, c.name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
