// Simulate a Gibrat panel, estimate it back, and compare with the truth.
//
//   gibrat_roundtrip [periods] [seed]

#include <cstdio>
#include <cstdlib>

#include "powerlaw/powerlaw.hpp"

int main(int argc, char** argv) {
    using namespace powerlaw;
    sim::GibratPreset preset;
    preset.periods = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 50000;
    preset.seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;

    const auto simulated = sim::simulate_gibrat(preset);
    const auto ranked = ranked_view(to_shares(simulated.panel()));
    const auto est = annualize(estimate(ranked), simulated.labels.frequency);
    const auto observed = observed_average_gaps(ranked);
    const auto predicted = predict_stationary_gaps(est);

    std::printf("%4s %10s %10s %10s %10s %10s\n", "rank", "alpha", "truth", "sigma2", "pred_gap", "obs_gap");
    for (std::size_t k = 0; k < est.alpha.size(); ++k) {
        if (k < est.sigma2.size())
            std::printf("%4zu %10.4f %10.4f %10.4f %10.4f %10.4f\n", k + 1, est.alpha[k], simulated.truth.alpha[k],
                        est.sigma2[k], predicted.gaps[k], observed.gaps[k]);
        else
            std::printf("%4zu %10.4f %10.4f\n", k + 1, est.alpha[k], simulated.truth.alpha[k]);
    }
    return 0;
}
