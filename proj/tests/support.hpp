#pragma once

#include <random>
#include <string>
#include <vector>

#include "powerlaw/panel.hpp"

namespace testing_support {

inline powerlaw::Panel make_panel(const std::vector<std::vector<double>>& rows, int frequency = 12) {
    powerlaw::PanelLabels labels;
    labels.frequency = frequency;
    for (std::size_t i = 0; i < rows.front().size(); ++i) labels.entities.push_back("e" + std::to_string(i + 1));
    for (std::size_t t = 0; t < rows.size(); ++t) labels.times.push_back(std::to_string(t));
    powerlaw::Matrix m(rows.size(), rows.front().size());
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t i = 0; i < rows[t].size(); ++i) m(t, i) = rows[t][i];
    return powerlaw::Panel(std::move(labels), std::move(m));
}

inline powerlaw::SharePanel make_shares(const std::vector<std::vector<double>>& rows, int frequency = 12) {
    return powerlaw::to_shares(make_panel(rows, frequency));
}

// Log-normal random walk, so ranks actually change.
inline powerlaw::Panel random_panel(std::mt19937_64& rng, std::size_t n, std::size_t t, double vol = 0.1) {
    std::normal_distribution<double> z(0.0, vol);
    std::vector<std::vector<double>> rows(t, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) rows[0][i] = std::exp(z(rng) * 5.0);
    for (std::size_t s = 1; s < t; ++s)
        for (std::size_t i = 0; i < n; ++i) rows[s][i] = rows[s - 1][i] * std::exp(z(rng));
    return make_panel(rows);
}

} // namespace testing_support
