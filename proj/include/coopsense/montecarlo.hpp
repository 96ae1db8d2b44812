#pragma once

// Simulation oracle. Each trial draws per-user SNRs and energies, fuses them
// the way a band manager would, and thresholds the result; H0 and H1 run as
// independent equal-size blocks. Every trial derives its own random stream
// from (seed, trial index), so any partition of the trial range across
// workers produces identical aggregate counts.

#include <cstdint>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "coopsense/channel.hpp"
#include "coopsense/fusion.hpp"
#include "coopsense/rng.hpp"

namespace coopsense {

struct Egc {};
struct WcFixed {
    WeightVector weights;
};
struct WcAdaptive {};

using WeightMode = std::variant<Egc, WcFixed, WcAdaptive>;

struct SimScenario {
    SensingParams params;
    ChannelModel model;
    std::vector<double> distances;  // length n
    WeightMode weight_mode;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0x5eed;
};

struct SimEstimate {
    double psi_d_hat = 0.0;
    double psi_f_hat = 0.0;
    double stderr_d = 0.0;
    double stderr_f = 0.0;
    std::uint64_t trials = 0;
};

struct CurveStats {
    std::uint64_t degenerate_fallbacks = 0;  // adaptive trials that fell back to equal gain
};

namespace detail {

inline void validate_scenario(const SimScenario& sc) {
    validate(sc.params);
    validate(sc.model);
    require(sc.trials >= 1, "SimScenario: trials must be >= 1");
    require(sc.distances.size() == static_cast<std::size_t>(sc.params.n),
            "SimScenario: distances length must equal n");
    for (double d : sc.distances)
        require(d > 0.0, "SimScenario: distances must be > 0");
    if (const auto* wf = std::get_if<WcFixed>(&sc.weight_mode))
        require(wf->weights.weights.size() == static_cast<std::size_t>(sc.params.n),
                "SimScenario: fixed weights length must equal n");
}

struct BlockCounts {
    std::vector<std::uint64_t> h1_over;  // per threshold
    std::vector<std::uint64_t> h0_over;
    std::uint64_t fallbacks = 0;
};

// One contiguous range of trials; exact integer counts only, so aggregation
// order cannot perturb the result.
inline BlockCounts run_block(const SimScenario& sc, const std::vector<double>& grid,
                             std::uint64_t first, std::uint64_t last) {
    const int n = sc.params.n;
    const int r = sc.params.r;
    const bool adaptive = std::holds_alternative<WcAdaptive>(sc.weight_mode);
    WeightVector fixed;
    if (const auto* wf = std::get_if<WcFixed>(&sc.weight_mode))
        fixed = wf->weights;
    else if (!adaptive)
        fixed = egc_weights(n);

    BlockCounts counts;
    counts.h1_over.assign(grid.size(), 0);
    counts.h0_over.assign(grid.size(), 0);

    std::vector<double> energies(static_cast<std::size_t>(n));
    std::vector<UserReport> reports(static_cast<std::size_t>(n));

    for (std::uint64_t t = first; t < last; ++t) {
        for (int hyp = 0; hyp < 2; ++hyp) {
            RandomStream rng(sc.seed, 2 * t + static_cast<std::uint64_t>(hyp));
            const Hypothesis h = hyp == 0 ? Hypothesis::H0 : Hypothesis::H1;
            for (int i = 0; i < n; ++i) {
                const double g = h == Hypothesis::H1 ? sample_snr(rng, sc.model) : 0.0;
                energies[static_cast<std::size_t>(i)] = sample_energy(rng, r, g, h);
            }
            double y_t;
            if (adaptive) {
                for (int i = 0; i < n; ++i)
                    reports[static_cast<std::size_t>(i)] = {
                        energies[static_cast<std::size_t>(i)],
                        sc.distances[static_cast<std::size_t>(i)]};
                WeightVector w = wc_weights(reports, sc.params.nu);
                if (w.degenerate_fallback) ++counts.fallbacks;
                y_t = combine(w, energies);
            } else {
                y_t = combine(fixed, energies);
            }
            auto& over = h == Hypothesis::H1 ? counts.h1_over : counts.h0_over;
            for (std::size_t gi = 0; gi < grid.size(); ++gi)
                if (y_t > grid[gi]) ++over[gi];
        }
    }
    return counts;
}

}  // namespace detail

// Estimates along a shared-sample threshold grid. Common random numbers
// across thresholds make the curve monotone by construction.
inline std::vector<SimEstimate> simulate_curve(const SimScenario& sc,
                                               const std::vector<double>& lambda_grid,
                                               unsigned workers = 1,
                                               CurveStats* stats = nullptr) {
    detail::validate_scenario(sc);
    detail::require(!lambda_grid.empty(), "simulate_curve: threshold grid must be nonempty");
    for (std::size_t i = 1; i < lambda_grid.size(); ++i)
        detail::require(lambda_grid[i] > lambda_grid[i - 1],
                        "simulate_curve: threshold grid must be strictly increasing");
    for (double lam : lambda_grid)
        detail::require(lam >= 0.0, "simulate_curve: thresholds must be >= 0");
    if (workers == 0) workers = 1;

    std::vector<detail::BlockCounts> parts(workers);
    if (workers == 1) {
        parts[0] = detail::run_block(sc, lambda_grid, 0, sc.trials);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (sc.trials + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t first = std::min<std::uint64_t>(w * chunk, sc.trials);
            const std::uint64_t last = std::min<std::uint64_t>(first + chunk, sc.trials);
            pool.emplace_back([&, w, first, last] {
                parts[w] = detail::run_block(sc, lambda_grid, first, last);
            });
        }
        for (auto& th : pool) th.join();
    }

    detail::BlockCounts total;
    total.h1_over.assign(lambda_grid.size(), 0);
    total.h0_over.assign(lambda_grid.size(), 0);
    for (const auto& part : parts) {
        for (std::size_t gi = 0; gi < lambda_grid.size(); ++gi) {
            total.h1_over[gi] += part.h1_over[gi];
            total.h0_over[gi] += part.h0_over[gi];
        }
        total.fallbacks += part.fallbacks;
    }
    if (stats) stats->degenerate_fallbacks = total.fallbacks;

    std::vector<SimEstimate> out(lambda_grid.size());
    const double nt = static_cast<double>(sc.trials);
    for (std::size_t gi = 0; gi < lambda_grid.size(); ++gi) {
        SimEstimate& e = out[gi];
        e.trials = sc.trials;
        e.psi_d_hat = static_cast<double>(total.h1_over[gi]) / nt;
        e.psi_f_hat = static_cast<double>(total.h0_over[gi]) / nt;
        e.stderr_d = std::sqrt(e.psi_d_hat * (1.0 - e.psi_d_hat) / nt);
        e.stderr_f = std::sqrt(e.psi_f_hat * (1.0 - e.psi_f_hat) / nt);
    }
    return out;
}

inline SimEstimate simulate(const SimScenario& sc, unsigned workers = 1,
                            CurveStats* stats = nullptr) {
    return simulate_curve(sc, {sc.params.lambda}, workers, stats)[0];
}

}  // namespace coopsense
