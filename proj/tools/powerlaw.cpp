#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "powerlaw/cli.hpp"

namespace {

using powerlaw::cli::RunConfig;

struct SharedFlags {
    std::optional<std::string> output;
    std::string format = "wide";
    std::string metric = "log-relative-price";
};

void add_input(CLI::App* cmd, RunConfig& c, SharedFlags& f, bool required) {
    auto* opt = cmd->add_option("-i,--input", c.input, "Panel CSV (period column, then one column per entity)");
    if (required) opt->required();
    cmd->add_option("--format", f.format, "Panel layout")->check(CLI::IsMember({"wide", "long"}));
    cmd->add_option("-f,--frequency", c.frequency, "Periods per year")->check(CLI::PositiveNumber);
    cmd->add_flag("--normalize", c.normalize, "Divide every series by its first observation before use");
}

void add_estimation(CLI::App* cmd, RunConfig& c, SharedFlags& f) {
    cmd->add_option("--smoothing", c.smoothing, "auto, none, or a pass count in [1, 100]");
    cmd->add_option("--metric", f.metric, "Smoothing objective")
        ->check(CLI::IsMember({"log-relative-price", "gap"}));
    cmd->add_option("--drop-first", c.drop_first, "Periods excluded from the observed curve (default: one year)");
}

void add_bootstrap(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("-B,--resamples", c.resamples, "Bootstrap resamples")->check(CLI::PositiveNumber);
    cmd->add_option("--level", c.level, "Confidence level")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--threads", c.threads, "Worker threads for resampling")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rank-based estimation of dynamic power-law distributions"};
    app.set_version_flag("--version", powerlaw::kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig c;
    SharedFlags f;
    app.add_option("-o,--output", f.output, std::string("Output directory (default: $") +
                                                powerlaw::cli::kOutputDirEnv + " or ./out)");
    app.add_option("--seed", c.seed, "Random seed, recorded in every manifest");

    auto* estimate = app.add_subcommand("estimate", "Estimate alpha, sigma^2 and kappa by rank");
    add_input(estimate, c, f, true);
    add_estimation(estimate, c, f);

    auto* predict = app.add_subcommand("predict", "Predicted against observed stationary curve");
    add_input(predict, c, f, false);
    add_estimation(predict, c, f);
    predict->add_option("--estimates", c.estimates, "estimates.json from a previous run");

    auto* bootstrap = app.add_subcommand("bootstrap", "Percentile bootstrap bands over adjacent-period pairs");
    add_input(bootstrap, c, f, true);
    add_estimation(bootstrap, c, f);
    add_bootstrap(bootstrap, c);

    auto* simulate = app.add_subcommand("simulate", "Synthetic panel with known parameters");
    simulate->add_option("--preset", c.preset, "Built-in model")->check(CLI::IsMember({"gibrat", "stable"}));
    simulate->add_option("--spec", c.sim_spec, "Simulation spec JSON (overrides the preset)");
    simulate->add_option("-n,--n", c.n, "Number of entities");
    simulate->add_option("--steps", c.periods, "Sampled periods");
    simulate->add_option("--alpha", c.alpha, "Gibrat relative drift per year");
    simulate->add_option("--sigma2", c.sigma2, "Rank-gap variance per year");
    simulate->add_option("--kappa", c.kappa, "Stable preset local-time rate per year");
    simulate->add_option("--dt", c.dt, "Fine step in years");
    simulate->add_option("--sample-every", c.sample_every, "Fine steps per sampled period");
    simulate->add_option("--burn-in", c.burn_in_periods, "Gibrat burn-in in sampled periods");

    auto* backtest = app.add_subcommand("backtest", "Top-ranked against bottom-ranked equal-weight portfolios");
    add_input(backtest, c, f, true);
    backtest->add_option("--split", c.split_rank, "Last rank of the top portfolio (default: ceil(N/2))");

    auto* report = app.add_subcommand("report", "Every figure's data in one run");
    add_input(report, c, f, true);
    add_estimation(report, c, f);
    add_bootstrap(report, c);
    report->add_option("--split", c.split_rank, "Last rank of the top portfolio (default: ceil(N/2))");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : powerlaw::cli::kInputError;
    }

    c.subcommand = app.get_subcommands().front()->get_name();
    c.output_dir = powerlaw::cli::resolve_output_dir(f.output);
    c.format = f.format == "long" ? powerlaw::PanelFormat::Long : powerlaw::PanelFormat::Wide;
    c.metric = f.metric == "gap" ? powerlaw::FitMetric::Gap : powerlaw::FitMetric::LogRelativePrice;
    return powerlaw::cli::run(c, std::cerr);
}
