#pragma once

// Single-user energy-detector statistics. The normalized detector output Y
// follows a central chi-square law with 2r degrees of freedom on an empty
// band and a noncentral one (noncentrality 2*r*gamma) when the primary is
// transmitting; everything else in the artifact builds on these two laws.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <variant>

#include "coopsense/rng.hpp"
#include "coopsense/specfun.hpp"

namespace coopsense {

struct SensingParams {
    int r = 1;           // time-bandwidth product, integer by assumption
    int n = 1;           // cooperating users
    double nu = 4.0;     // path-loss exponent
    double lambda = 0.0;  // decision threshold
};

enum class Hypothesis { H0, H1 };

struct Awgn {
    double gamma = 0.0;  // fixed SNR, linear scale
};
struct Rayleigh {
    double mean_gamma = 1.0;  // mean SNR, linear scale
};
struct Nakagami {
    int m = 1;                // fading severity, integer; m = 1 is Rayleigh
    double mean_gamma = 1.0;
};
struct Lognormal {
    double mu_db = 0.0;     // dB-domain mean
    double sigma_db = 6.0;  // dB-domain standard deviation, > 0
};

using ChannelModel = std::variant<Awgn, Rayleigh, Nakagami, Lognormal>;

inline void validate(const SensingParams& p) {
    detail::require(p.r >= 1, "SensingParams: r must be an integer >= 1");
    detail::require(p.n >= 1, "SensingParams: n must be >= 1");
    detail::require(p.nu > 0.0, "SensingParams: nu must be > 0");
    detail::require(p.lambda >= 0.0, "SensingParams: lambda must be >= 0");
}

inline void validate(const ChannelModel& model) {
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Awgn>) {
                detail::require(m.gamma >= 0.0, "Awgn: gamma must be >= 0");
            } else if constexpr (std::is_same_v<T, Rayleigh>) {
                detail::require(m.mean_gamma > 0.0, "Rayleigh: mean_gamma must be > 0");
            } else if constexpr (std::is_same_v<T, Nakagami>) {
                detail::require(m.m >= 1, "Nakagami: m must be an integer >= 1");
                detail::require(m.mean_gamma > 0.0, "Nakagami: mean_gamma must be > 0");
            } else {
                detail::require(m.sigma_db > 0.0, "Lognormal: sigma_db must be > 0");
            }
        },
        model);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// PDF of Y at y. H0: central chi-square with 2r degrees of freedom.
// H1: noncentral chi-square, assembled from logs so that large noncentrality
// cannot overflow the Bessel factor.
inline double energy_density(double y, int r, double gamma, Hypothesis h) {
    detail::require(r >= 1, "energy_density: r must be >= 1");
    detail::require(y >= 0.0, "energy_density: y must be >= 0");
    detail::require(gamma >= 0.0, "energy_density: gamma must be >= 0");
    const double df = 2.0 * r;
    if (h == Hypothesis::H0 || gamma == 0.0) {
        if (y == 0.0) return r == 1 ? 0.5 : 0.0;
        const double lg = (0.5 * df - 1.0) * std::log(y) - 0.5 * y -
                          0.5 * df * std::log(2.0) - detail::lgamma_pos(0.5 * df);
        return std::exp(lg);
    }
    const double nc = 2.0 * r * gamma;  // noncentrality
    if (y == 0.0) return 0.0;
    // f(y) = 1/2 e^{-(y+nc)/2} (y/nc)^{(v-2)/4} I_{v/2-1}(sqrt(nc*y)), v = 2r
    const double order = 0.5 * df - 1.0;
    const double lg = -std::log(2.0) - 0.5 * (y + nc) + 0.25 * (df - 2.0) * (std::log(y) - std::log(nc)) +
                      log_bessel_i(order, std::sqrt(nc * y));
    return std::exp(lg);
}

// False-alarm probability of one user: P{Y > lambda | H0}.
inline double single_pf(double lambda, int r) {
    detail::require(lambda >= 0.0, "single_pf: lambda must be >= 0");
    detail::require(r >= 1, "single_pf: r must be >= 1");
    return regularized_upper_gamma(static_cast<double>(r), 0.5 * lambda);
}

// Detection probability of one user on a non-fading channel with SNR gamma.
inline double single_pd_awgn(double lambda, int r, double gamma) {
    detail::require(lambda >= 0.0, "single_pd_awgn: lambda must be >= 0");
    detail::require(r >= 1, "single_pd_awgn: r must be >= 1");
    detail::require(gamma >= 0.0, "single_pd_awgn: gamma must be >= 0");
    if (gamma == 0.0) return single_pf(lambda, r);
    return marcum_q(r, std::sqrt(2.0 * r * gamma), std::sqrt(lambda));
}

// One draw of Y: a sum of 2r squared unit-variance Gaussians whose common
// mean sqrt(gamma) spreads the total noncentrality 2*r*gamma evenly. Exact
// for integer r, no rejection step.
inline double sample_energy(RandomStream& rng, int r, double gamma, Hypothesis h) {
    const double mean = (h == Hypothesis::H1 && gamma > 0.0) ? std::sqrt(gamma) : 0.0;
    double y = 0.0;
    for (int j = 0; j < 2 * r; ++j) {
        const double z = rng.next_normal() + mean;
        y += z * z;
    }
    return y;
}

// One draw of a user's instantaneous SNR under the given channel model.
inline double sample_snr(RandomStream& rng, const ChannelModel& model) {
    return std::visit(
        [&rng](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Awgn>) {
                return m.gamma;
            } else if constexpr (std::is_same_v<T, Rayleigh>) {
                return -m.mean_gamma * std::log(rng.next_open_unit());
            } else if constexpr (std::is_same_v<T, Nakagami>) {
                // gamma(shape m, mean mean_gamma) as a sum of m exponentials
                double acc = 0.0;
                for (int j = 0; j < m.m; ++j) acc += -std::log(rng.next_open_unit());
                return acc * m.mean_gamma / m.m;
            } else {
                return db_to_linear(m.mu_db + m.sigma_db * rng.next_normal());
            }
        },
        model);
}

}  // namespace coopsense
