#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "powerlaw/csv.hpp"
#include "powerlaw/error.hpp"
#include "powerlaw/matrix.hpp"

namespace powerlaw {

/// Row/column labels shared by every panel view.
struct PanelLabels {
    std::vector<std::string> entities;
    std::vector<std::string> times;
    int frequency = 12; ///< periods per year
};

/// Balanced, strictly positive T x N panel of levels x_i(t).
class Panel {
public:
    Panel(PanelLabels labels, Matrix values) : labels_(std::move(labels)), values_(std::move(values)) {
        validate();
    }

    std::size_t num_entities() const noexcept { return values_.cols(); }
    std::size_t num_periods() const noexcept { return values_.rows(); }
    int frequency() const noexcept { return labels_.frequency; }
    const PanelLabels& labels() const noexcept { return labels_; }
    const Matrix& values() const noexcept { return values_; }

private:
    void validate() const {
        using K = InputError::Kind;
        if (labels_.frequency < 1)
            throw InputError(K::InvalidArgument, "frequency must be a positive integer");
        if (values_.cols() != labels_.entities.size() || values_.rows() != labels_.times.size())
            throw InputError(K::MissingCell, "panel labels do not match value matrix shape");
        if (values_.cols() < 2)
            throw InputError(K::TooFewEntities, "panel needs at least 2 entities, got " + std::to_string(values_.cols()));
        if (values_.rows() < 2)
            throw InputError(K::TooFewPeriods, "panel needs at least 2 periods, got " + std::to_string(values_.rows()));
        for (std::size_t t = 0; t < values_.rows(); ++t)
            for (std::size_t i = 0; i < values_.cols(); ++i) {
                double v = values_(t, i);
                if (!(v > 0.0) || !std::isfinite(v))
                    throw InputError(K::NonPositiveValue, "non-positive value at period '" + labels_.times[t] +
                                                              "' (row " + std::to_string(t + 1) + "), entity '" +
                                                              labels_.entities[i] + "' (column " +
                                                              std::to_string(i + 1) + ")");
            }
    }

    PanelLabels labels_;
    Matrix values_;
};

/// Cross-sectional shares theta_i(t) = x_i(t) / sum_j x_j(t).
struct SharePanel {
    PanelLabels labels;
    Matrix values;

    std::size_t num_entities() const noexcept { return values.cols(); }
    std::size_t num_periods() const noexcept { return values.rows(); }
    int frequency() const noexcept { return labels.frequency; }
};

/// Relative prices N * theta_i(t); each row has mean one.
struct RelPricePanel {
    PanelLabels labels;
    Matrix values;

    std::size_t num_entities() const noexcept { return values.cols(); }
    std::size_t num_periods() const noexcept { return values.rows(); }
};

enum class PanelFormat { Wide, Long };

struct LoadOptions {
    int frequency = 12;
    PanelFormat format = PanelFormat::Wide;
};

namespace detail {

inline std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Orders period labels numerically when every label is a number,
/// lexicographically otherwise. Throws DuplicatePeriod on repeats.
inline std::vector<std::size_t> period_order(const std::vector<std::string>& labels) {
    std::vector<std::size_t> idx(labels.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::optional<double>> numeric(labels.size());
    bool all_numeric = true;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        numeric[i] = parse_double(labels[i]);
        all_numeric = all_numeric && numeric[i].has_value();
    }
    if (all_numeric)
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return *numeric[a] < *numeric[b]; });
    else
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return labels[a] < labels[b]; });
    for (std::size_t i = 1; i < idx.size(); ++i) {
        bool same = all_numeric ? *numeric[idx[i]] == *numeric[idx[i - 1]] : labels[idx[i]] == labels[idx[i - 1]];
        if (same)
            throw InputError(InputError::Kind::DuplicatePeriod, "duplicate period '" + labels[idx[i]] + "'");
    }
    return idx;
}

inline double parse_cell(const std::string& cell, const std::string& period, const std::string& entity) {
    using K = InputError::Kind;
    if (cell.empty() || cell == "NA" || cell == "NaN" || cell == ".")
        throw InputError(K::MissingCell, "missing value at period '" + period + "', entity '" + entity + "'");
    auto v = parse_double(cell);
    if (!v) throw InputError(K::Parse, "cannot parse '" + cell + "' at period '" + period + "', entity '" + entity + "'");
    return *v;
}

inline Panel assemble(std::vector<std::string> entities, std::vector<std::string> periods,
                      const std::vector<std::vector<double>>& rows, int frequency) {
    auto order = period_order(periods);
    PanelLabels labels;
    labels.entities = std::move(entities);
    labels.frequency = frequency;
    Matrix values(rows.size(), labels.entities.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        labels.times.push_back(periods[order[r]]);
        for (std::size_t c = 0; c < labels.entities.size(); ++c) values(r, c) = rows[order[r]][c];
    }
    return Panel(std::move(labels), std::move(values));
}

inline Panel load_wide(const std::vector<csv::Row>& records, int frequency) {
    using K = InputError::Kind;
    if (records.empty()) throw InputError(K::Parse, "empty input");
    const auto& header = records.front();
    std::vector<std::string> entities(header.begin() + 1, header.end());
    for (std::size_t i = 0; i < entities.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (entities[i] == entities[j]) throw InputError(K::Parse, "duplicate entity column '" + entities[i] + "'");
    std::vector<std::string> periods;
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() > header.size())
            throw InputError(K::Parse, "row " + std::to_string(r + 1) + " has more fields than the header");
        periods.push_back(rec.front());
        std::vector<double> row(entities.size());
        for (std::size_t c = 0; c < entities.size(); ++c) {
            std::string cell = c + 1 < rec.size() ? rec[c + 1] : std::string{};
            row[c] = parse_cell(cell, rec.front(), entities[c]);
        }
        rows.push_back(std::move(row));
    }
    return assemble(std::move(entities), std::move(periods), rows, frequency);
}

inline Panel load_long(const std::vector<csv::Row>& records, int frequency) {
    using K = InputError::Kind;
    if (records.empty()) throw InputError(K::Parse, "empty input");
    std::vector<std::string> entities;
    std::map<std::string, std::size_t> entity_index;
    std::vector<std::string> periods;
    std::map<std::string, std::size_t> period_index;
    std::map<std::pair<std::size_t, std::size_t>, double> cells;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != 3) throw InputError(K::Parse, "long-format row " + std::to_string(r + 1) + " needs 3 fields");
        auto [pit, pnew] = period_index.try_emplace(rec[0], periods.size());
        if (pnew) periods.push_back(rec[0]);
        auto [eit, enew] = entity_index.try_emplace(rec[1], entities.size());
        if (enew) entities.push_back(rec[1]);
        double v = parse_cell(rec[2], rec[0], rec[1]);
        if (!cells.emplace(std::pair{pit->second, eit->second}, v).second)
            throw InputError(K::DuplicatePeriod, "duplicate observation for period '" + rec[0] + "', entity '" + rec[1] + "'");
    }
    std::vector<std::vector<double>> rows(periods.size(), std::vector<double>(entities.size()));
    for (std::size_t p = 0; p < periods.size(); ++p)
        for (std::size_t e = 0; e < entities.size(); ++e) {
            auto it = cells.find({p, e});
            if (it == cells.end())
                throw InputError(K::MissingCell, "missing value at period '" + periods[p] + "', entity '" + entities[e] + "'");
            rows[p][e] = it->second;
        }
    return assemble(std::move(entities), std::move(periods), rows, frequency);
}

} // namespace detail

/// Parse a wide (period, entity...) or long (period, entity, value) CSV panel.
inline Panel load_panel(std::istream& in, const LoadOptions& options = {}) {
    auto records = csv::read_records(in);
    return options.format == PanelFormat::Wide ? detail::load_wide(records, options.frequency)
                                               : detail::load_long(records, options.frequency);
}

/// Wide CSV; the inverse of load_panel for the wide format.
inline void write_panel_csv(std::ostream& out, const PanelLabels& labels, const Matrix& values,
                            const std::string& period_header = "period") {
    csv::Row header{period_header};
    header.insert(header.end(), labels.entities.begin(), labels.entities.end());
    csv::write_record(out, header);
    for (std::size_t t = 0; t < values.rows(); ++t) {
        csv::Row row{labels.times[t]};
        for (double v : values.row(t)) row.push_back(csv::format_number(v));
        csv::write_record(out, row);
    }
}

/// Divide each series by its own first observation.
inline Panel normalize_initial(const Panel& p) {
    Matrix out = p.values();
    for (std::size_t i = 0; i < out.cols(); ++i) {
        const double base = p.values()(0, i);
        for (std::size_t t = 0; t < out.rows(); ++t) out(t, i) = p.values()(t, i) / base;
    }
    return Panel(p.labels(), std::move(out));
}

inline SharePanel to_shares(const Panel& p) {
    Matrix out(p.num_periods(), p.num_entities());
    for (std::size_t t = 0; t < out.rows(); ++t) {
        auto row = p.values().row(t);
        const double total = std::accumulate(row.begin(), row.end(), 0.0);
        for (std::size_t i = 0; i < out.cols(); ++i) out(t, i) = row[i] / total;
    }
    return {p.labels(), std::move(out)};
}

inline RelPricePanel relative_prices(const SharePanel& s) {
    Matrix out = s.values;
    const double n = static_cast<double>(s.num_entities());
    for (std::size_t t = 0; t < out.rows(); ++t)
        for (double& v : out.row(t)) v *= n;
    return {s.labels, std::move(out)};
}

} // namespace powerlaw
