#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "powerlaw/csv.hpp"
#include "powerlaw/error.hpp"
#include "powerlaw/estimator.hpp"
#include "powerlaw/portfolio.hpp"
#include "powerlaw/simulator.hpp"
#include "powerlaw/stationary.hpp"

namespace powerlaw::io {

using Json = nlohmann::ordered_json;

inline Json to_json(const Band& b) { return Json{{"lower", b.lower}, {"upper", b.upper}}; }

inline Json to_json(const ConfidenceBands& ci) {
    Json j{{"level", ci.level}, {"resamples", ci.resamples}, {"seed", ci.seed},
           {"alpha", to_json(ci.alpha)}, {"sigma2", to_json(ci.sigma2)}, {"kappa", to_json(ci.kappa)}};
    j["smoothed_alpha"] = ci.smoothed_alpha ? to_json(*ci.smoothed_alpha) : Json(nullptr);
    j["smoothed_sigma2"] = ci.smoothed_sigma2 ? to_json(*ci.smoothed_sigma2) : Json(nullptr);
    return j;
}

inline Json to_json(const EstimateSet& e) {
    Json j;
    j["alpha"] = e.alpha;
    j["sigma2"] = e.sigma2;
    j["kappa"] = e.kappa;
    if (e.smoothed)
        j["smoothed"] = Json{{"alpha", e.smoothed->alpha}, {"sigma2", e.smoothed->sigma2},
                             {"kappa", e.smoothed->kappa}, {"fit_deviation", e.smoothed->fit_deviation}};
    else
        j["smoothed"] = nullptr;
    j["passes"] = e.smoothing_passes;
    j["frequency"] = e.frequency;
    j["per_year"] = e.per_year;
    j["ci"] = e.ci ? to_json(*e.ci) : Json(nullptr);
    return j;
}

namespace detail {

inline Band band_from_json(const Json& j) {
    return {j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>()};
}

} // namespace detail

inline EstimateSet estimate_set_from_json(const Json& j) {
    try {
        EstimateSet e;
        e.alpha = j.at("alpha").get<std::vector<double>>();
        e.sigma2 = j.at("sigma2").get<std::vector<double>>();
        e.kappa = j.at("kappa").get<std::vector<double>>();
        if (e.alpha.size() != e.sigma2.size() + 1 || e.kappa.size() != e.sigma2.size())
            throw InputError(InputError::Kind::Parse, "estimates have inconsistent vector lengths");
        if (j.contains("smoothed") && !j["smoothed"].is_null()) {
            const auto& s = j["smoothed"];
            SmoothedParameters sp;
            sp.alpha = s.at("alpha").get<std::vector<double>>();
            sp.sigma2 = s.at("sigma2").get<std::vector<double>>();
            sp.kappa = s.value("kappa", kappa_from_alpha(sp.alpha));
            sp.fit_deviation = s.value("fit_deviation", 0.0);
            if (sp.alpha.size() != e.alpha.size() || sp.sigma2.size() != e.sigma2.size())
                throw InputError(InputError::Kind::Parse, "smoothed estimates have inconsistent vector lengths");
            e.smoothed = std::move(sp);
        }
        e.smoothing_passes = j.value("passes", 0);
        e.frequency = j.value("frequency", 12);
        e.per_year = j.value("per_year", false);
        if (j.contains("ci") && !j["ci"].is_null()) {
            const auto& c = j["ci"];
            ConfidenceBands ci;
            ci.level = c.at("level").get<double>();
            ci.resamples = c.at("resamples").get<std::size_t>();
            ci.seed = c.at("seed").get<std::uint64_t>();
            ci.alpha = detail::band_from_json(c.at("alpha"));
            ci.sigma2 = detail::band_from_json(c.at("sigma2"));
            ci.kappa = detail::band_from_json(c.at("kappa"));
            if (c.contains("smoothed_alpha") && !c["smoothed_alpha"].is_null())
                ci.smoothed_alpha = detail::band_from_json(c["smoothed_alpha"]);
            if (c.contains("smoothed_sigma2") && !c["smoothed_sigma2"].is_null())
                ci.smoothed_sigma2 = detail::band_from_json(c["smoothed_sigma2"]);
            e.ci = std::move(ci);
        }
        return e;
    } catch (const Json::exception& ex) {
        throw InputError(InputError::Kind::Parse, std::string("malformed estimates JSON: ") + ex.what());
    }
}

inline Json to_json(const sim::GroundTruth& g) {
    Json j{{"alpha", g.alpha}, {"sigma2", g.sigma2}, {"kappa", g.kappa}};
    j["alpha_empirical"] = g.alpha_empirical.empty() ? Json(nullptr) : Json(g.alpha_empirical);
    j["sigma2_empirical"] = g.sigma2_empirical.empty() ? Json(nullptr) : Json(g.sigma2_empirical);
    return j;
}

/// rank,value,lower,upper; bounds left empty without a band.
inline void write_rank_csv(std::ostream& out, const std::vector<double>& value, const Band* band = nullptr) {
    csv::write_record(out, {"rank", "value", "lower", "upper"});
    for (std::size_t k = 0; k < value.size(); ++k)
        csv::write_record(out, {std::to_string(k + 1), csv::format_number(value[k]),
                                band ? csv::format_number(band->lower[k]) : std::string{},
                                band ? csv::format_number(band->upper[k]) : std::string{}});
}

/// Predicted against observed curve by rank. Gap columns are empty at rank N.
inline void write_curve_csv(std::ostream& out, const DistributionCurve& predicted, const DistributionCurve& observed) {
    csv::write_record(out, {"rank", "predicted_gap", "observed_gap", "predicted_log_relative_price",
                            "observed_log_relative_price"});
    const auto pred = predicted.log_relative_prices();
    const auto obs = observed.log_relative_prices();
    for (std::size_t k = 0; k < pred.size(); ++k) {
        const bool has_gap = k < predicted.gaps.size();
        csv::write_record(out, {std::to_string(k + 1), has_gap ? csv::format_number(predicted.gaps[k]) : std::string{},
                                has_gap ? csv::format_number(observed.gaps[k]) : std::string{},
                                csv::format_number(pred[k]), csv::format_number(obs[k])});
    }
}

/// Any T x K matrix with period labels, one column per rank.
inline void write_rank_series_csv(std::ostream& out, const std::vector<std::string>& times, const Matrix& m,
                                  const std::string& column_prefix) {
    csv::Row header{"period"};
    for (std::size_t k = 0; k < m.cols(); ++k) header.push_back(column_prefix + std::to_string(k + 1));
    csv::write_record(out, header);
    for (std::size_t t = 0; t < m.rows(); ++t) {
        csv::Row row{times[t]};
        for (double v : m.row(t)) row.push_back(csv::format_number(v));
        csv::write_record(out, row);
    }
}

inline void write_portfolio_csv(std::ostream& out, const std::vector<std::string>& times, const SizeEffectReport& r) {
    csv::write_record(out, {"period", "expensive_log_value", "cheap_log_value", "relative_log_value"});
    for (std::size_t t = 0; t < times.size(); ++t)
        csv::write_record(out, {times[t], csv::format_number(r.expensive.log_value[t]),
                                csv::format_number(r.cheap.log_value[t]), csv::format_number(r.relative_log[t])});
}

inline Json to_json(const SizeEffectReport& r, int frequency) {
    auto series = [](const PortfolioSeries& s) {
        return Json{{"avg_period_return", s.avg_period_return},
                    {"avg_annual_return", s.avg_annual_return},
                    {"terminal_log_value", s.log_value.back()}};
    };
    return Json{{"split_rank", r.split_rank},
                {"frequency", frequency},
                {"expensive", series(r.expensive)},
                {"cheap", series(r.cheap)},
                {"annual_spread", r.cheap.avg_annual_return - r.expensive.avg_annual_return},
                {"terminal_relative_log_value", r.relative_log.back()}};
}

} // namespace powerlaw::io
