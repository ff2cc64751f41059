#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "powerlaw/bootstrap.hpp"
#include "powerlaw/error.hpp"
#include "powerlaw/estimator.hpp"
#include "powerlaw/io.hpp"
#include "powerlaw/panel.hpp"
#include "powerlaw/portfolio.hpp"
#include "powerlaw/ranking.hpp"
#include "powerlaw/simulator.hpp"
#include "powerlaw/smoothing.hpp"
#include "powerlaw/stationary.hpp"
#include "powerlaw/version.hpp"

namespace powerlaw::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 2,
    kStationarityViolation = 3,
    kInternalError = 4,
};

inline constexpr const char* kOutputDirEnv = "POWERLAW_OUTPUT_DIR";

struct RunConfig {
    std::string subcommand;
    std::string input;
    PanelFormat format = PanelFormat::Wide;
    std::string output_dir = "out";
    int frequency = 12;
    bool normalize = false;
    std::size_t resamples = 1000;
    double level = 0.95;
    std::uint64_t seed = 1;
    std::string smoothing = "auto"; ///< auto | none | pass count in [1, 100]
    FitMetric metric = FitMetric::LogRelativePrice;
    std::optional<std::size_t> drop_first; ///< defaults to one year of periods
    std::optional<std::size_t> split_rank; ///< defaults to ceil(N / 2)
    std::string estimates;                 ///< predict: estimates JSON
    std::string sim_spec;                  ///< simulate: spec JSON
    std::string preset = "gibrat";         ///< simulate: gibrat | stable
    std::size_t n = 10;
    std::size_t periods = 600;
    double alpha = -0.05;
    double sigma2 = 0.2;
    double kappa = 0.5;
    double dt = 1.0 / 120.0;
    std::size_t sample_every = 10;
    std::size_t burn_in_periods = 120;
    unsigned threads = 1;
};

/// Flag > environment > built-in default.
inline std::string resolve_output_dir(const std::optional<std::string>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return "out";
}

inline io::Json to_json(const RunConfig& c) {
    io::Json j;
    j["subcommand"] = c.subcommand;
    j["input"] = c.input;
    j["format"] = c.format == PanelFormat::Wide ? "wide" : "long";
    j["output_dir"] = c.output_dir;
    j["frequency"] = c.frequency;
    j["normalize"] = c.normalize;
    j["resamples"] = c.resamples;
    j["level"] = c.level;
    j["seed"] = c.seed;
    j["smoothing"] = c.smoothing;
    j["metric"] = c.metric == FitMetric::Gap ? "gap" : "log-relative-price";
    j["drop_first"] = c.drop_first ? io::Json(*c.drop_first) : io::Json(nullptr);
    j["split_rank"] = c.split_rank ? io::Json(*c.split_rank) : io::Json(nullptr);
    j["estimates"] = c.estimates;
    j["sim_spec"] = c.sim_spec;
    j["preset"] = c.preset;
    j["n"] = c.n;
    j["periods"] = c.periods;
    j["alpha"] = c.alpha;
    j["sigma2"] = c.sigma2;
    j["kappa"] = c.kappa;
    j["dt"] = c.dt;
    j["sample_every"] = c.sample_every;
    j["burn_in_periods"] = c.burn_in_periods;
    j["threads"] = c.threads;
    return j;
}

/// Files written by one run; removed again unless the run commits.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;
    ~OutputSet() {
        if (!committed_) rollback();
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
        if (!std::filesystem::exists(dir_)) {
            std::filesystem::create_directories(dir_);
            created_dir_ = true;
        }
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot open " + path.string() + " for writing");
        written_.push_back(path);
        body(out);
        if (!out) throw Error("failed writing " + path.string());
    }

    void write_json(const std::string& name, const io::Json& j) {
        write(name, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
    }

    const std::vector<std::filesystem::path>& files() const noexcept { return written_; }
    void commit() noexcept { committed_ = true; }

private:
    void rollback() noexcept {
        std::error_code ec;
        for (const auto& p : written_) std::filesystem::remove(p, ec);
        if (created_dir_ && std::filesystem::is_empty(dir_, ec)) std::filesystem::remove(dir_, ec);
    }

    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
    bool created_dir_ = false;
    bool committed_ = false;
};

namespace detail {

class Timer {
public:
    void mark(const std::string& label) {
        const auto now = std::chrono::steady_clock::now();
        timings_[label] = std::chrono::duration<double, std::milli>(now - last_).count();
        last_ = now;
    }
    const io::Json& json() const noexcept { return timings_; }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
    io::Json timings_ = io::Json::object();
};

inline Panel read_panel(const RunConfig& c) {
    if (c.input.empty()) throw InputError(InputError::Kind::InvalidArgument, c.subcommand + " requires --input");
    std::ifstream in(c.input, std::ios::binary);
    if (!in) throw InputError(InputError::Kind::Parse, "cannot open input file " + c.input);
    auto p = load_panel(in, {c.frequency, c.format});
    return c.normalize ? normalize_initial(p) : p;
}

inline std::optional<int> parse_smoothing(const std::string& s) {
    if (s == "auto") return std::nullopt;
    try {
        std::size_t used = 0;
        int m = std::stoi(s, &used);
        if (used == s.size() && m >= 1 && m <= kMaxSmoothingPasses) return m;
    } catch (const std::exception&) {
    }
    throw InputError(InputError::Kind::InvalidArgument, "--smoothing must be auto, none, or an integer in [1, 100]");
}

inline std::size_t drop_first_for(const RunConfig& c, std::size_t periods) {
    if (c.drop_first) return *c.drop_first;
    const auto year = static_cast<std::size_t>(c.frequency);
    return periods > year ? year : 0;
}

struct Analysis {
    RankSharePanel ranked;
    PairIncrements increments;
    EstimateSet estimates; ///< per year
    DistributionCurve observed;
    std::vector<std::string> warnings;
};

/// Shared estimate + smoothing pipeline. Smoothing failure is a warning
/// unless `require_smoothing` is set.
inline Analysis analyze(const Panel& panel, const RunConfig& c, bool require_smoothing) {
    Analysis a{ranked_view(to_shares(panel)), {}, {}, {}, {}};
    a.increments = pair_increments(a.ranked);
    std::vector<std::size_t> rows(a.increments.num_pairs());
    for (std::size_t t = 0; t < rows.size(); ++t) rows[t] = t;
    a.estimates = annualize(estimate_from_pairs(a.increments, rows), panel.frequency());
    a.observed = observed_average_gaps(a.ranked, drop_first_for(c, panel.num_periods()));
    if (c.smoothing != "none") {
        try {
            a.estimates = smooth_and_select(std::move(a.estimates), a.observed, parse_smoothing(c.smoothing), c.metric);
        } catch (const NoStationaryPrediction& ex) {
            if (require_smoothing) throw;
            a.warnings.push_back(std::string("smoothing skipped: ") + ex.what());
        }
    }
    return a;
}

inline void write_estimate_csvs(OutputSet& out, const EstimateSet& e, const std::string& suffix = "") {
    const auto* ci = e.ci ? &*e.ci : nullptr;
    out.write("alpha" + suffix + ".csv", [&](std::ostream& s) { io::write_rank_csv(s, e.alpha, ci ? &ci->alpha : nullptr); });
    out.write("sigma2" + suffix + ".csv", [&](std::ostream& s) { io::write_rank_csv(s, e.sigma2, ci ? &ci->sigma2 : nullptr); });
    out.write("kappa" + suffix + ".csv", [&](std::ostream& s) { io::write_rank_csv(s, e.kappa, ci ? &ci->kappa : nullptr); });
    if (e.smoothed) {
        const Band* sa = ci && ci->smoothed_alpha ? &*ci->smoothed_alpha : nullptr;
        const Band* ss = ci && ci->smoothed_sigma2 ? &*ci->smoothed_sigma2 : nullptr;
        out.write("alpha_smoothed" + suffix + ".csv", [&](std::ostream& s) { io::write_rank_csv(s, e.smoothed->alpha, sa); });
        out.write("sigma2_smoothed" + suffix + ".csv", [&](std::ostream& s) { io::write_rank_csv(s, e.smoothed->sigma2, ss); });
    }
}

inline io::Json estimates_document(const EstimateSet& e, const RankSharePanel& r, const RunConfig& c) {
    io::Json j;
    j["entities"] = r.labels.entities;
    j["n"] = r.num_entities();
    j["periods"] = r.num_periods();
    j["seed"] = c.seed;
    const io::Json body = io::to_json(e);
    for (const auto& [k, v] : body.items()) j[k] = v;
    return j;
}

inline io::Json prediction_document(const DistributionCurve& predicted, const std::optional<DistributionCurve>& observed,
                                    const EstimateSet& e) {
    io::Json j;
    j["passes"] = e.smoothing_passes;
    j["uses_smoothed"] = e.smoothed.has_value();
    j["predicted_gaps"] = predicted.gaps;
    j["predicted_log_relative_prices"] = predicted.log_relative_prices();
    if (observed) {
        j["observed_gaps"] = observed->gaps;
        j["observed_log_relative_prices"] = observed->log_relative_prices();
        j["squared_deviation_log_relative_price"] = fit_deviation(predicted, *observed, FitMetric::LogRelativePrice);
        j["squared_deviation_gap"] = fit_deviation(predicted, *observed, FitMetric::Gap);
    }
    return j;
}

inline ConfidenceBands run_bootstrap(const Analysis& a, const RunConfig& c) {
    BootstrapOptions opt;
    opt.resamples = c.resamples;
    opt.level = c.level;
    opt.seed = c.seed;
    opt.smoothing_passes = a.estimates.smoothed ? a.estimates.smoothing_passes : 0;
    opt.annualize = true;
    opt.threads = c.threads;
    return bootstrap_ci(a.increments, opt);
}

inline void write_portfolios(OutputSet& out, const Panel& panel, const RunConfig& c) {
    const Panel normalized = c.normalize ? panel : normalize_initial(panel);
    const std::size_t split = c.split_rank ? *c.split_rank : default_split(normalized.num_entities());
    const auto rep = size_effect_summary(normalized, split);
    out.write("portfolio.csv", [&](std::ostream& s) { io::write_portfolio_csv(s, normalized.labels().times, rep); });
    out.write_json("backtest.json", io::to_json(rep, normalized.frequency()));
}

inline io::Json json_from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(InputError::Kind::Parse, "cannot open " + path);
    try {
        return io::Json::parse(in);
    } catch (const io::Json::exception& ex) {
        throw InputError(InputError::Kind::Parse, path + ": " + ex.what());
    }
}

inline std::vector<double> vec(const io::Json& j, const char* key) { return j.at(key).get<std::vector<double>>(); }

inline Matrix matrix_from_json(const io::Json& rows) {
    const std::size_t r = rows.size();
    const std::size_t cols = r ? rows[0].size() : 0;
    Matrix m(r, cols);
    for (std::size_t i = 0; i < r; ++i) {
        if (rows[i].size() != cols) throw InputError(InputError::Kind::InvalidSpec, "ragged matrix in spec");
        for (std::size_t k = 0; k < cols; ++k) m(i, k) = rows[i][k].get<double>();
    }
    return m;
}

struct Simulation {
    sim::SimOutput output;
    io::Json spec;
};

inline Simulation simulate_from_json(const io::Json& j, std::uint64_t default_seed) {
    try {
        const std::string model = j.value("model", "gibrat");
        const std::uint64_t seed = j.value("seed", default_seed);
        if (model == "gibrat") {
            sim::GibratPreset p;
            p.n = j.value("n", p.n);
            p.alpha = j.value("alpha", p.alpha);
            p.sigma2 = j.value("sigma2", p.sigma2);
            p.periods = j.value("periods", p.periods);
            p.sample_every = j.value("sample_every", p.sample_every);
            p.dt = j.value("dt", p.dt);
            p.burn_in_periods = j.value("burn_in_periods", p.burn_in_periods);
            p.seed = seed;
            io::Json used{{"model", model}, {"n", p.n}, {"alpha", p.alpha}, {"sigma2", p.sigma2},
                          {"periods", p.periods}, {"sample_every", p.sample_every}, {"dt", p.dt},
                          {"burn_in_periods", p.burn_in_periods}, {"seed", seed}};
            return {sim::simulate_gibrat(p), used};
        }
        if (model == "stable") {
            sim::StableGapSpec s;
            s.kappa = vec(j, "kappa");
            s.sigma = vec(j, "sigma");
            if (j.contains("gap_init")) s.gap_init = vec(j, "gap_init");
            s.dt = j.value("dt", s.dt);
            s.steps = j.value("steps", s.steps);
            s.sample_every = j.value("sample_every", s.sample_every);
            s.seed = seed;
            io::Json used{{"model", model}, {"kappa", s.kappa}, {"sigma", s.sigma}, {"gap_init", s.gap_init},
                          {"dt", s.dt}, {"steps", s.steps}, {"sample_every", s.sample_every}, {"seed", seed}};
            return {sim::simulate_stable_gaps(s), used};
        }
        if (model == "name") {
            sim::NameModelSpec s;
            s.x0 = vec(j, "x0");
            const std::size_t n = s.x0.size();
            if (j.contains("drift")) {
                s.drift = matrix_from_json(j["drift"]);
            } else {
                const auto rank_drift = vec(j, "rank_drift");
                if (rank_drift.size() != n) throw InputError(InputError::Kind::InvalidSpec, "rank_drift must have N entries");
                s.drift = Matrix(n, n);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t k = 0; k < n; ++k) s.drift(i, k) = rank_drift[k];
            }
            if (j.contains("loadings")) {
                s.loadings = matrix_from_json(j["loadings"]);
            } else {
                const auto vol = vec(j, "volatility");
                if (vol.size() != n) throw InputError(InputError::Kind::InvalidSpec, "volatility must have N entries");
                s.loadings = Matrix(n, n);
                for (std::size_t i = 0; i < n; ++i) s.loadings(i, i) = vol[i];
            }
            s.dt = j.value("dt", s.dt);
            s.steps = j.value("steps", s.steps);
            s.sample_every = j.value("sample_every", s.sample_every);
            s.burn_in = j.value("burn_in", s.burn_in);
            s.seed = seed;
            io::Json used = j;
            used["seed"] = seed;
            return {sim::simulate_name_model(s), used};
        }
        throw InputError(InputError::Kind::InvalidSpec, "unknown model '" + model + "'");
    } catch (const io::Json::exception& ex) {
        throw InputError(InputError::Kind::InvalidSpec, std::string("malformed simulation spec: ") + ex.what());
    }
}

inline Simulation simulate_from_config(const RunConfig& c) {
    if (!c.sim_spec.empty()) return simulate_from_json(json_from_file(c.sim_spec), c.seed);
    io::Json j;
    if (c.preset == "gibrat") {
        j = {{"model", "gibrat"}, {"n", c.n}, {"alpha", c.alpha}, {"sigma2", c.sigma2}, {"periods", c.periods},
             {"sample_every", c.sample_every}, {"dt", c.dt}, {"burn_in_periods", c.burn_in_periods}};
    } else if (c.preset == "stable") {
        if (c.n < 2) throw InputError(InputError::Kind::InvalidSpec, "stable preset needs n >= 2");
        j = {{"model", "stable"},
             {"kappa", std::vector<double>(c.n - 1, c.kappa)},
             {"sigma", std::vector<double>(c.n - 1, std::sqrt(c.sigma2))},
             {"dt", c.dt},
             {"steps", c.periods * c.sample_every},
             {"sample_every", c.sample_every}};
    } else {
        throw InputError(InputError::Kind::InvalidArgument, "unknown preset '" + c.preset + "'");
    }
    return simulate_from_json(j, c.seed);
}

inline void run_estimate(OutputSet& out, const RunConfig& c, std::ostream& log) {
    const auto a = analyze(read_panel(c), c, false);
    for (const auto& w : a.warnings) log << "warning: " << w << '\n';
    out.write_json("estimates.json", estimates_document(a.estimates, a.ranked, c));
    write_estimate_csvs(out, a.estimates);
}

inline void run_predict(OutputSet& out, const RunConfig& c, std::ostream&) {
    std::optional<Panel> panel;
    if (!c.input.empty()) panel = read_panel(c);
    EstimateSet e;
    std::optional<DistributionCurve> observed;
    if (!c.estimates.empty()) {
        e = io::estimate_set_from_json(json_from_file(c.estimates));
        if (panel) {
            const auto r = ranked_view(to_shares(*panel));
            observed = observed_average_gaps(r, drop_first_for(c, panel->num_periods()));
        }
    } else {
        if (!panel) throw InputError(InputError::Kind::InvalidArgument, "predict requires --input or --estimates");
        auto a = analyze(*panel, c, true);
        e = std::move(a.estimates);
        observed = std::move(a.observed);
    }
    const auto predicted = predict_stationary_gaps(e);
    if (observed) {
        out.write("predicted.csv", [&](std::ostream& s) { io::write_curve_csv(s, predicted, *observed); });
    } else {
        out.write("predicted.csv", [&](std::ostream& s) {
            const auto lrp = predicted.log_relative_prices();
            csv::write_record(s, {"rank", "predicted_gap", "predicted_log_relative_price"});
            for (std::size_t k = 0; k < lrp.size(); ++k)
                csv::write_record(s, {std::to_string(k + 1),
                                      k < predicted.gaps.size() ? csv::format_number(predicted.gaps[k]) : std::string{},
                                      csv::format_number(lrp[k])});
        });
    }
    out.write_json("prediction.json", prediction_document(predicted, observed, e));
}

inline void run_bootstrap_cmd(OutputSet& out, const RunConfig& c, std::ostream& log) {
    auto a = analyze(read_panel(c), c, false);
    for (const auto& w : a.warnings) log << "warning: " << w << '\n';
    a.estimates.ci = run_bootstrap(a, c);
    out.write_json("bootstrap.json", estimates_document(a.estimates, a.ranked, c));
    write_estimate_csvs(out, a.estimates, "_ci");
}

inline void run_simulate(OutputSet& out, const RunConfig& c, std::ostream&) {
    const auto s = simulate_from_config(c);
    out.write("panel.csv", [&](std::ostream& o) { write_panel_csv(o, s.output.labels, s.output.levels); });
    io::Json truth{{"spec", s.spec}, {"frequency", s.output.labels.frequency}, {"seed", s.spec["seed"]}};
    truth["truth"] = io::to_json(s.output.truth);
    out.write_json("truth.json", truth);
    out.write("true_local_times.csv", [&](std::ostream& o) {
        io::write_rank_series_csv(o, s.output.labels.times, s.output.local_time, "gap");
    });
}

inline void run_backtest(OutputSet& out, const RunConfig& c, std::ostream&) { write_portfolios(out, read_panel(c), c); }

inline void run_report(OutputSet& out, const RunConfig& c, std::ostream& log) {
    const Panel panel = read_panel(c);
    auto a = analyze(panel, c, false);
    for (const auto& w : a.warnings) log << "warning: " << w << '\n';
    a.estimates.ci = run_bootstrap(a, c);
    out.write_json("estimates.json", estimates_document(a.estimates, a.ranked, c));
    write_estimate_csvs(out, a.estimates);

    out.write("relative_prices.csv", [&](std::ostream& s) {
        io::write_rank_series_csv(s, a.ranked.labels.times, ranked_log_relative_prices(a.ranked), "rank");
    });
    const auto lt = estimate_local_times(a.ranked);
    out.write("local_times.csv", [&](std::ostream& s) {
        io::write_rank_series_csv(s, a.ranked.labels.times, lt.series.lambda, "gap");
    });
    try {
        const auto predicted = predict_stationary_gaps(a.estimates);
        out.write("predicted.csv", [&](std::ostream& s) { io::write_curve_csv(s, predicted, a.observed); });
        out.write_json("prediction.json", prediction_document(predicted, a.observed, a.estimates));
    } catch (const StationarityViolation& ex) {
        log << "warning: prediction skipped: " << ex.what() << '\n';
    }
    write_portfolios(out, panel, c);
}

} // namespace detail

/// Execute one subcommand. Diagnostics go to `log`; returns the exit code.
/// On failure every file written by this run is removed.
inline int run(const RunConfig& c, std::ostream& log = std::cerr) {
    detail::Timer timer;
    try {
        OutputSet out(c.output_dir);
        if (c.subcommand == "estimate") detail::run_estimate(out, c, log);
        else if (c.subcommand == "predict") detail::run_predict(out, c, log);
        else if (c.subcommand == "bootstrap") detail::run_bootstrap_cmd(out, c, log);
        else if (c.subcommand == "simulate") detail::run_simulate(out, c, log);
        else if (c.subcommand == "backtest") detail::run_backtest(out, c, log);
        else if (c.subcommand == "report") detail::run_report(out, c, log);
        else throw InputError(InputError::Kind::InvalidArgument, "unknown subcommand '" + c.subcommand + "'");
        timer.mark("run");

        io::Json manifest;
        manifest["tool"] = "powerlaw";
        manifest["version"] = kVersion;
        manifest["subcommand"] = c.subcommand;
        manifest["seed"] = c.seed;
        manifest["config"] = to_json(c);
        io::Json files = io::Json::array();
        for (const auto& f : out.files()) files.push_back(f.filename().string());
        manifest["outputs"] = files;
        manifest["timings_ms"] = timer.json();
        manifest["created_at"] = static_cast<std::int64_t>(std::time(nullptr));
        out.write_json("manifest.json", manifest);
        out.commit();
        return kOk;
    } catch (const InputError& ex) {
        log << "error: " << ex.what() << '\n';
        return kInputError;
    } catch (const StationarityViolation& ex) {
        log << "error: " << ex.what() << '\n';
        return kStationarityViolation;
    } catch (const NoStationaryPrediction& ex) {
        log << "error: " << ex.what() << '\n';
        return kStationarityViolation;
    } catch (const std::exception& ex) {
        log << "error: " << ex.what() << '\n';
        return kInternalError;
    }
}

} // namespace powerlaw::cli
