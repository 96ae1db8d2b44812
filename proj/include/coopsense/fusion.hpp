#pragma once

// Combining rules at the band manager: the equal-gain sum and the
// energy/path-loss weighting rule, plus the effective and mean SNR
// bookkeeping the closed forms are parameterized by.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "coopsense/specfun.hpp"

namespace coopsense {

struct UserReport {
    double energy = 0.0;    // measured Y_i, >= 0
    double distance = 1.0;  // d_i to the primary transmitter, > 0
};

struct WeightVector {
    std::vector<double> weights;      // all >= 0
    double sum_a = 0.0;               // sum of weights
    bool degenerate_fallback = false; // true -> all weights forced to 1
};

inline WeightVector egc_weights(int n) {
    detail::require(n >= 1, "egc_weights: n must be >= 1");
    WeightVector w;
    w.weights.assign(static_cast<std::size_t>(n), 1.0);
    w.sum_a = static_cast<double>(n);
    w.degenerate_fallback = false;
    return w;
}

// Weight rule: a_i = 10*log10(Y_i/Y_m) / (10*nu*log10(d_i/d_m)), with Y_m and
// d_m the arithmetic means. The raw formula misbehaves in several ways the
// derivation glosses over, so the following guards apply:
//   - a user at (numerically) the mean distance divides by zero; it gets the
//     neutral weight 1 instead,
//   - a zero-energy report would send the numerator to -inf; that user gets
//     weight 0 (it carries no occupied-band evidence),
//   - negative raw weights are clamped to 0 (a weaker-than-average report
//     must not subtract evidence from the sum),
//   - if no user produces a usable positive weight (all raw weights clamped
//     or undefined, e.g. identical energies, or a single user), the rule
//     degenerates and equal-gain weights are used, with the fallback flagged.
inline WeightVector wc_weights(const std::vector<UserReport>& reports, double nu) {
    detail::require(!reports.empty(), "wc_weights: need at least one report");
    detail::require(nu > 0.0, "wc_weights: nu must be > 0");
    const std::size_t n = reports.size();

    double energy_sum = 0.0, dist_sum = 0.0;
    for (const auto& rep : reports) {
        detail::require(rep.energy >= 0.0, "wc_weights: energies must be >= 0");
        detail::require(rep.distance > 0.0, "wc_weights: distances must be > 0");
        energy_sum += rep.energy;
        dist_sum += rep.distance;
    }
    if (energy_sum == 0.0)
        throw std::domain_error("wc_weights: all reported energies are zero");

    const double y_mean = energy_sum / static_cast<double>(n);
    const double d_mean = dist_sum / static_cast<double>(n);

    WeightVector w;
    w.weights.assign(n, 0.0);
    double informative_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dist_log = std::log10(reports[i].distance / d_mean);
        if (std::fabs(dist_log) <= 1e-9) {
            w.weights[i] = 1.0;  // neutral: at the mean distance
            continue;
        }
        if (reports[i].energy == 0.0) {
            w.weights[i] = 0.0;
            continue;
        }
        const double raw =
            10.0 * std::log10(reports[i].energy / y_mean) / (10.0 * nu * dist_log);
        w.weights[i] = raw > 0.0 ? raw : 0.0;
        informative_sum += w.weights[i];
    }

    if (informative_sum < 1e-9) {
        w.weights.assign(n, 1.0);
        w.degenerate_fallback = true;
    }
    w.sum_a = 0.0;
    for (double a : w.weights) w.sum_a += a;
    return w;
}

// Y_t = sum a_i * Y_i (equal-gain combining when all a_i = 1).
inline double combine(const WeightVector& w, const std::vector<double>& energies) {
    if (w.weights.size() != energies.size())
        throw std::invalid_argument("combine: weight/energy length mismatch");
    double y = 0.0;
    for (std::size_t i = 0; i < energies.size(); ++i) y += w.weights[i] * energies[i];
    return y;
}

// gamma_t = sum a_i * gamma_i
inline double effective_snr(const WeightVector& w, const std::vector<double>& snrs) {
    if (w.weights.size() != snrs.size())
        throw std::invalid_argument("effective_snr: weight/SNR length mismatch");
    double g = 0.0;
    for (std::size_t i = 0; i < snrs.size(); ++i) g += w.weights[i] * snrs[i];
    return g;
}

// Virtual-branch mean SNR: gamma_bar_w = a * gamma_bar / n. Equals gamma_bar
// under equal gain (a = n).
inline double mean_snr_wc(double sum_a, double mean_gamma, int n) {
    if (sum_a <= 0.0) throw std::domain_error("mean_snr_wc: sum_a must be > 0");
    detail::require(mean_gamma > 0.0, "mean_snr_wc: mean_gamma must be > 0");
    detail::require(n >= 1, "mean_snr_wc: n must be >= 1");
    return sum_a * mean_gamma / static_cast<double>(n);
}

}  // namespace coopsense
