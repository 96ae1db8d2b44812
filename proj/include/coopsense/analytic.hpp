#pragma once

// Closed-form cooperative detection and false-alarm probabilities.
//
// The combined statistic Y_t under H1 is noncentral chi-square with 2nr
// degrees of freedom and noncentrality 2*r*gamma_t, so
//
//   Psi_d | gamma_t  =  Q_{nr}( sqrt(2 r gamma_t), sqrt(lambda) ).
//
// Fading averages this over the distribution of gamma_t. For gamma_t ~
// Gamma(shape L, scale beta) the average has an exact finite form derived
// from the Poisson-mixture representation of the Marcum Q: with x = lambda/2,
// p = 1/(1+beta), q = 1-p and M = nr,
//
//   E[Q_M] = Q(L, p x)  +  sgn(M-L) * p^L e^{-x} *
//            sum_{i=min(M,L)}^{max(M,L)-1}  x^i/i! * 1F1(L; i+1; q x),
//
// (empty sum when M = L, so E[Q_M] = Q(L, p x) there). Rayleigh combining
// uses L = n, beta = r*a*gbar/n; Nakagami-m uses L = m*n, beta = r*a*gbar/(n*m),
// which reduces to the Rayleigh expression exactly at m = 1. Lognormal
// shadowing has no such form and is averaged by Gauss-Hermite quadrature.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopsense/channel.hpp"
#include "coopsense/integrate.hpp"
#include "coopsense/specfun.hpp"

namespace coopsense {

struct CooperativeScenario {
    SensingParams params;
    ChannelModel model;
    double sum_a = 1.0;  // weight sum a; a = n selects equal gain
};

// Cooperative false alarm: Y_t under H0 is (taken as) central chi-square with
// 2nr degrees of freedom for every combining scheme, so this is independent
// of both the channel model and the weight sum.
inline double psi_f(double lambda, int n, int r) {
    detail::require(lambda >= 0.0, "psi_f: lambda must be >= 0");
    detail::require(n >= 1 && r >= 1, "psi_f: n and r must be >= 1");
    return regularized_upper_gamma(static_cast<double>(n) * r, 0.5 * lambda);
}

inline double threshold_for_pf(double target_pf, int n, int r) {
    detail::require(target_pf > 0.0 && target_pf <= 1.0,
                    "threshold_for_pf: target must be in (0,1]");
    detail::require(n >= 1 && r >= 1, "threshold_for_pf: n and r must be >= 1");
    if (target_pf == 1.0) return 0.0;
    return 2.0 * inverse_regularized_upper_gamma(static_cast<double>(n) * r, target_pf);
}

inline double psi_d_awgn(double lambda, int n, int r, double gamma_t) {
    detail::require(lambda >= 0.0, "psi_d_awgn: lambda must be >= 0");
    detail::require(n >= 1 && r >= 1, "psi_d_awgn: n and r must be >= 1");
    detail::require(gamma_t >= 0.0, "psi_d_awgn: gamma_t must be >= 0");
    if (gamma_t == 0.0) return psi_f(lambda, n, r);
    return marcum_q(n * r, std::sqrt(2.0 * r * gamma_t), std::sqrt(lambda));
}

namespace detail {

// E[Q_M(sqrt(2T), sqrt(2x))] for T ~ Gamma(shape L, scale beta), by the
// finite expression in the header comment. Terms are assembled in log form;
// an intermediate that would leave the representable range is reported, not
// saturated.
inline double avg_marcum_over_gamma(int M, int L, double beta, double x) {
    require(M >= 1 && L >= 1, "avg_marcum_over_gamma: orders must be >= 1");
    require(beta > 0.0 && std::isfinite(beta), "avg_marcum_over_gamma: beta must be > 0");
    require(x >= 0.0 && std::isfinite(x), "avg_marcum_over_gamma: x must be >= 0");
    const double p = 1.0 / (1.0 + beta);
    const double q = 1.0 - p;

    double result = regularized_upper_gamma(static_cast<double>(L), p * x);
    if (M == L || x == 0.0) return result;

    const int lo = M < L ? M : L;
    const int hi = M < L ? L : M;
    const double sgn = M > L ? 1.0 : -1.0;
    const double log_x = std::log(x);
    const double base = L * std::log(p) - x;

    double series = 0.0;
    for (int i = lo; i < hi; ++i) {
        const double f = kummer_1f1(static_cast<double>(L), static_cast<double>(i) + 1.0, q * x);
        // all-positive arguments: f >= 1 always holds here
        const double log_term = base + i * log_x - lgamma_pos(i + 1.0) + std::log(f);
        if (log_term > 700.0)
            throw std::runtime_error(
                "avg_marcum_over_gamma: term exceeds representable range (overflow)");
        series += std::exp(log_term);
    }
    result += sgn * series;
    return result < 0.0 ? 0.0 : (result > 1.0 ? 1.0 : result);
}

}  // namespace detail

// Rayleigh fading, weight sum a: gamma_t ~ Gamma(n, r-free scale) via the
// virtual-branch mean a*gbar/n, folded into the Marcum average with
// beta = r * a * gbar / n.
inline double psi_d_rayleigh(double lambda, int n, int r, double mean_gamma, double sum_a) {
    detail::require(lambda >= 0.0, "psi_d_rayleigh: lambda must be >= 0");
    detail::require(n >= 1 && r >= 1, "psi_d_rayleigh: n and r must be >= 1");
    detail::require(mean_gamma > 0.0, "psi_d_rayleigh: mean_gamma must be > 0");
    detail::require(sum_a > 0.0, "psi_d_rayleigh: sum_a must be > 0");
    const double beta = r * sum_a * mean_gamma / n;
    return detail::avg_marcum_over_gamma(n * r, n, beta, 0.5 * lambda);
}

// Nakagami-m fading: the gamma shape and scale pick up the factor m, i.e.
// L = m*n and beta = r*a*gbar/(n*m); m = 1 is exactly the Rayleigh case.
inline double psi_d_nakagami(double lambda, int n, int r, int m, double mean_gamma,
                             double sum_a) {
    detail::require(lambda >= 0.0, "psi_d_nakagami: lambda must be >= 0");
    detail::require(n >= 1 && r >= 1, "psi_d_nakagami: n and r must be >= 1");
    detail::require(m >= 1, "psi_d_nakagami: m must be an integer >= 1");
    detail::require(mean_gamma > 0.0, "psi_d_nakagami: mean_gamma must be > 0");
    detail::require(sum_a > 0.0, "psi_d_nakagami: sum_a must be > 0");
    const double beta = r * sum_a * mean_gamma / (static_cast<double>(n) * m);
    return detail::avg_marcum_over_gamma(n * r, m * n, beta, 0.5 * lambda);
}

// Lognormal shadowing, Gauss-Hermite average: the combined SNR is modeled as
// gamma_t = a * 10^{(sqrt(2) sigma x_i + mu)/10} across the quadrature nodes
// and the result normalized by the weight sum. As sigma -> 0 this collapses
// to psi_d_awgn at gamma_t = a * 10^{mu/10}.
inline double psi_d_lognormal(double lambda, int n, int r, double mu_db, double sigma_db,
                              double sum_a, int order = 5) {
    detail::require(lambda >= 0.0, "psi_d_lognormal: lambda must be >= 0");
    detail::require(n >= 1 && r >= 1, "psi_d_lognormal: n and r must be >= 1");
    detail::require(sigma_db > 0.0, "psi_d_lognormal: sigma_db must be > 0");
    detail::require(sum_a > 0.0, "psi_d_lognormal: sum_a must be > 0");
    detail::require(order >= 1 && order <= 64, "psi_d_lognormal: order must be in [1,64]");
    const QuadratureRule rule = gauss_hermite(order);
    const double sqrt2 = 1.4142135623730950488;
    double acc = 0.0, wsum = 0.0;
    for (int i = 0; i < order; ++i) {
        const double gamma_t =
            sum_a * db_to_linear(sqrt2 * sigma_db * rule.nodes[i] + mu_db);
        acc += rule.weights[i] * psi_d_awgn(lambda, n, r, gamma_t);
        wsum += rule.weights[i];
    }
    return acc / wsum;
}

// Numeric-integration fallback: averages the conditional detection
// probability over an arbitrary SNR density on [0, inf). Serves as the
// internal oracle for every closed form above. The density is first checked
// to integrate to 1 (the stated precondition); optional breakpoints let the
// caller mark sharp features such as near-point-mass spikes.
inline double psi_d_numeric(double lambda, int n, int r,
                            const std::function<double(double)>& snr_density,
                            const std::vector<double>& breakpoints = {}) {
    detail::require(lambda >= 0.0, "psi_d_numeric: lambda must be >= 0");
    detail::require(n >= 1 && r >= 1, "psi_d_numeric: n and r must be >= 1");

    QuadResult mass = integrate_half_line(snr_density, 1e-10, breakpoints);
    if (std::fabs(mass.value - 1.0) > 1e-8)
        throw std::domain_error("psi_d_numeric: snr_density does not integrate to 1 (got " +
                                std::to_string(mass.value) + ")");

    auto integrand = [&](double g) {
        return psi_d_awgn(lambda, n, r, g) * snr_density(g);
    };
    QuadResult res = integrate_half_line(integrand, 1e-8, breakpoints);
    if (!res.converged)
        throw std::runtime_error(
            "psi_d_numeric: adaptive quadrature did not converge (error estimate " +
            std::to_string(res.error_estimate) + ")");
    return res.value < 0.0 ? 0.0 : (res.value > 1.0 ? 1.0 : res.value);
}

// Model dispatcher used by the sweep commands. gh_order only matters for the
// lognormal branch.
inline double psi_d(const CooperativeScenario& sc, int gh_order = 5) {
    validate(sc.params);
    validate(sc.model);
    detail::require(sc.sum_a > 0.0, "CooperativeScenario: sum_a must be > 0");
    const double lambda = sc.params.lambda;
    const int n = sc.params.n;
    const int r = sc.params.r;
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Awgn>) {
                return psi_d_awgn(lambda, n, r, sc.sum_a * m.gamma);
            } else if constexpr (std::is_same_v<T, Rayleigh>) {
                return psi_d_rayleigh(lambda, n, r, m.mean_gamma, sc.sum_a);
            } else if constexpr (std::is_same_v<T, Nakagami>) {
                return psi_d_nakagami(lambda, n, r, m.m, m.mean_gamma, sc.sum_a);
            } else {
                return psi_d_lognormal(lambda, n, r, m.mu_db, m.sigma_db, sc.sum_a, gh_order);
            }
        },
        sc.model);
}

}  // namespace coopsense
