#pragma once

// Special functions backing the closed-form detection probabilities:
// regularized incomplete gamma (and its inverse), the generalized Marcum Q
// function, log-domain modified Bessel I, Laguerre polynomials, Kummer's
// confluent hypergeometric 1F1, and Gauss-Hermite quadrature rules.
//
// Everything here is a pure function of its arguments and safe to call
// from any number of threads.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace coopsense {

struct QuadratureRule {
    int order = 0;
    std::vector<double> nodes;    // strictly increasing, symmetric about 0
    std::vector<double> weights;  // positive, sum = sqrt(pi)
};

namespace detail {

// std::lgamma writes the global signgam on glibc; use the reentrant form.
inline double lgamma_pos(double x) {
#if defined(__GLIBC__) || defined(__APPLE__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

inline void require(bool ok, const char* what) {
    if (!ok) throw std::domain_error(what);
}

// lgamma(n+1) - [Stirling through the 1/2 log term], by the asymptotic series
// for large n and the definition for small n where nothing cancels.
inline double stirlerr(double n) {
    constexpr double s0 = 1.0 / 12.0;
    constexpr double s1 = 1.0 / 360.0;
    constexpr double s2 = 1.0 / 1260.0;
    constexpr double s3 = 1.0 / 1680.0;
    constexpr double s4 = 1.0 / 1188.0;
    constexpr double half_log_2pi = 0.91893853320467274178;
    if (n < 16.0)
        return lgamma_pos(n + 1.0) - (n + 0.5) * std::log(n) + n - half_log_2pi;
    const double nn = n * n;
    if (n < 35.0) return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
    if (n < 80.0) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
    if (n < 500.0) return (s0 - (s1 - s2 / nn) / nn) / n;
    return (s0 - s1 / nn) / n;
}

// x log(x/np) + np - x without the cancellation that hits the direct form
// when x is near np.
inline double bd0(double x, double np) {
    if (std::fabs(x - np) < 0.1 * (x + np)) {
        const double v = (x - np) / (x + np);
        double s = (x - np) * v;
        double ej = 2.0 * x * v;
        for (int j = 1; j < 1000; ++j) {
            ej *= v * v;
            const double s1 = s + ej / (2.0 * j + 1.0);
            if (s1 == s) return s1;
            s = s1;
        }
    }
    return x * std::log(x / np) + np - x;
}

// log of the Poisson(mu) density at real-valued k >= 0. The saddle-point
// form keeps full relative precision even when -mu + k log(mu) - lgamma(k+1)
// would cancel tens of thousands against each other.
inline double log_pois_pmf(double k, double mu) {
    if (k == 0.0) return -mu;
    constexpr double half_log_2pi = 0.91893853320467274178;
    return -stirlerr(k) - bd0(k, mu) - half_log_2pi - 0.5 * std::log(k);
}

}  // namespace detail

// Gamma(s,x) / Gamma(s): series for the lower function below the s+1 knee,
// Lentz continued fraction for the upper function above it.
inline double regularized_upper_gamma(double s, double x) {
    detail::require(s > 0.0 && std::isfinite(s), "regularized_upper_gamma: s must be > 0");
    detail::require(x >= 0.0 && std::isfinite(x), "regularized_upper_gamma: x must be >= 0");
    if (x == 0.0) return 1.0;

    // x^s e^-x / Gamma(s) = s * Poisson(x) density at s, which the saddle-point
    // form evaluates without the giant-term cancellation of the naive log.
    const double log_prefix = std::log(s) + detail::log_pois_pmf(s, x);
    if (x < s + 1.0) {
        // P(s,x) = x^s e^-x / Gamma(s) * sum_k x^k / (s(s+1)...(s+k))
        double ap = s;
        double del = 1.0 / s;
        double sum = del;
        for (int i = 0; i < 100000; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-17) {
                double p = sum * std::exp(log_prefix);
                double q = 1.0 - p;
                return q < 0.0 ? 0.0 : (q > 1.0 ? 1.0 : q);
            }
        }
        throw std::runtime_error("regularized_upper_gamma: series did not converge");
    }
    // Q(s,x) = x^s e^-x / Gamma(s) * CF(x;s), modified Lentz. Here x >= s + 1,
    // so CF <= 1/(x + 1 - s) <= 1 and the prefactor alone bounds the result;
    // once it underflows the answer is 0 to machine precision.
    if (log_prefix < -745.0) return 0.0;
    double b = x + 1.0 - s;
    double c = 1.0 / 1e-300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 100000; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 4e-16) {
            double q = h * std::exp(log_prefix);
            return q < 0.0 ? 0.0 : (q > 1.0 ? 1.0 : q);
        }
    }
    throw std::runtime_error("regularized_upper_gamma: continued fraction did not converge");
}

// Solve regularized_upper_gamma(s, x) = p for x. Bisection on the monotone
// tail keeps the two-sided-inverse guarantee over the whole admissible range.
inline double inverse_regularized_upper_gamma(double s, double p) {
    detail::require(s > 0.0 && std::isfinite(s), "inverse_regularized_upper_gamma: s must be > 0");
    detail::require(p > 0.0 && p <= 1.0, "inverse_regularized_upper_gamma: p must be in (0,1]");
    if (p == 1.0) return 0.0;

    double lo = 0.0;
    double hi = s + 8.0 * std::sqrt(s) + 8.0;  // beyond the bulk of the distribution
    while (regularized_upper_gamma(s, hi) > p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw std::runtime_error("inverse_regularized_upper_gamma: bracket overflow");
    }
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (regularized_upper_gamma(s, mid) > p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Generalized Marcum Q_M(a,b) through the canonical noncentral chi-square
// mixture: Q_M(a,b) = sum_k Poisson(k; a^2/2) * Q(M+k, b^2/2). Terms are
// consumed outward from the Poisson mode with the incomplete-gamma values
// updated by the one-step recurrence, so the truncation error is bounded by
// the unconsumed Poisson mass (all gamma factors lie in [0,1]).
inline double marcum_q(int order, double a, double b) {
    detail::require(order >= 1, "marcum_q: order must be >= 1");
    detail::require(a >= 0.0 && std::isfinite(a), "marcum_q: a must be >= 0");
    detail::require(b >= 0.0 && std::isfinite(b), "marcum_q: b must be >= 0");
    if (b == 0.0) return 1.0;
    if (a == 0.0) return regularized_upper_gamma(static_cast<double>(order), 0.5 * b * b);

    const double pois_mean = 0.5 * a * a;
    const double y = 0.5 * b * b;
    const double log_y = std::log(y);
    const double M = static_cast<double>(order);
    const long long k0 = static_cast<long long>(pois_mean);

    // When the threshold sits far outside the band of chi-square orders that
    // carries the Poisson mass, every gamma factor in that band is 1 (or 0)
    // to machine precision and the answer is immediate. This keeps the cost
    // bounded at very large noncentrality.
    {
        const double span = std::ceil(10.0 * std::sqrt(pois_mean)) + 80.0;
        if (static_cast<double>(k0) > span &&
            regularized_upper_gamma(M + (static_cast<double>(k0) - span), y) >= 1.0 - 1e-15)
            return 1.0;
        if (regularized_upper_gamma(M + static_cast<double>(k0) + span, y) <= 1e-300)
            return 0.0;
    }

    // g(s) = y^s e^-y / Gamma(s+1) drives Q(s+1,y) = Q(s,y) + g(s); carried
    // in log form because it under/overflows long before it matters.
    double w_up = std::exp(detail::log_pois_pmf(static_cast<double>(k0), pois_mean));
    double w_dn = w_up;
    double q_up = regularized_upper_gamma(M + static_cast<double>(k0), y);
    double q_dn = q_up;
    double lng_up = detail::log_pois_pmf(M + static_cast<double>(k0), y);
    double lng_dn = lng_up;

    double sum = w_up * q_up;
    double consumed = w_up;
    const double tol = 1e-14;
    bool dn_alive = k0 > 0;
    for (long long j = 1; consumed < 1.0 - tol; ++j) {
        if (j > 50000000LL)
            throw std::runtime_error("marcum_q: series did not converge within the iteration cap");
        // Rounding can leave the consumed mass pinned a few ulp short of 1.
        // Once both frontier weights are negligible the unconsumed tail is
        // bounded by them times a short geometric sum, so stop.
        if (w_up < 1e-20 && (!dn_alive || w_dn < 1e-20)) break;
        // The one-step recurrences drift over long walks; refresh the state
        // from the closed forms often enough to keep the drift below 1e-14.
        if ((j & 127) == 0) {
            const double ku = static_cast<double>(k0 + j - 1);
            w_up = std::exp(detail::log_pois_pmf(ku, pois_mean));
            lng_up = detail::log_pois_pmf(M + ku, y);
            q_up = regularized_upper_gamma(M + ku, y);
            if (dn_alive) {
                const double kd = static_cast<double>(k0 - (j - 1));
                w_dn = std::exp(detail::log_pois_pmf(kd, pois_mean));
                lng_dn = detail::log_pois_pmf(M + kd, y);
                q_dn = regularized_upper_gamma(M + kd, y);
            }
        }
        {
            const long long k = k0 + j;
            w_up *= pois_mean / static_cast<double>(k);
            q_up += std::exp(lng_up);  // g(M+k-1)
            if (q_up > 1.0) q_up = 1.0;
            lng_up += log_y - std::log(M + static_cast<double>(k));
            sum += w_up * q_up;
            consumed += w_up;
        }
        if (dn_alive) {
            const long long k = k0 - j;
            w_dn *= static_cast<double>(k + 1) / pois_mean;
            lng_dn += std::log(M + static_cast<double>(k + 1)) - log_y;  // now g(M+k)
            q_dn -= std::exp(lng_dn);
            if (q_dn < 0.0) q_dn = 0.0;
            sum += w_dn * q_dn;
            consumed += w_dn;
            if (k == 0) dn_alive = false;
        }
    }
    return sum < 0.0 ? 0.0 : (sum > 1.0 ? 1.0 : sum);
}

// ln I_nu(x) by the ascending series, summed relative to its largest term.
// The largest term sits near k* = (-nu + sqrt(nu^2 + x^2)) / 2, and all
// ratios to it stay representable, so the result is finite far beyond the
// overflow point of I_nu itself.
inline double log_bessel_i(double nu, double x) {
    detail::require(nu >= 0.0 && std::isfinite(nu), "log_bessel_i: order must be >= 0");
    detail::require(x >= 0.0 && std::isfinite(x), "log_bessel_i: x must be >= 0");
    if (x == 0.0) {
        if (nu == 0.0) return 0.0;
        return -std::numeric_limits<double>::infinity();
    }
    const double half = 0.5 * x;
    const double log_half = std::log(half);
    auto log_term = [&](double k) {
        return (nu + 2.0 * k) * log_half - detail::lgamma_pos(k + 1.0) -
               detail::lgamma_pos(nu + k + 1.0);
    };
    const double kstar = std::floor(std::max(0.0, 0.5 * (-nu + std::sqrt(nu * nu + x * x))));
    const double peak = log_term(kstar);

    double tail = 0.0;  // sum of the other terms, in units of exp(peak)
    // upward from the peak
    double t = 1.0;
    for (double k = kstar + 1.0; k < kstar + 1e7; k += 1.0) {
        t *= (half * half) / (k * (nu + k));
        tail += t;
        if (t < 1e-18 * (1.0 + tail)) break;
    }
    // downward from the peak
    t = 1.0;
    for (double k = kstar; k >= 1.0; k -= 1.0) {
        t *= (k * (nu + k)) / (half * half);
        tail += t;
        if (t < 1e-18 * (1.0 + tail)) break;
    }
    // log1p keeps the result accurate when the peak term carries nearly all
    // the mass and the log is close to zero.
    return peak + std::log1p(tail);
}

// Laguerre polynomial L_k(x) by the stable three-term recurrence.
inline double laguerre(int degree, double x) {
    detail::require(degree >= 0, "laguerre: degree must be >= 0");
    if (degree == 0) return 1.0;
    double lm1 = 1.0;
    double l = 1.0 - x;
    for (int j = 1; j < degree; ++j) {
        double lp1 = ((2.0 * j + 1.0 - x) * l - j * lm1) / (j + 1.0);
        lm1 = l;
        l = lp1;
    }
    return l;
}

// Kummer's 1F1(a;b;x) by direct series. The closed forms only call this with
// a > 0, b >= 2 and x >= 0, where every term is positive; negative arguments
// are still summed (with the usual cancellation caveat at large |x|).
inline double kummer_1f1(double a, double b, double x) {
    if (b <= 0.0 && b == std::floor(b))
        throw std::domain_error("kummer_1f1: b must not be a nonpositive integer");
    detail::require(std::isfinite(a) && std::isfinite(b) && std::isfinite(x),
                    "kummer_1f1: arguments must be finite");
    double term = 1.0;
    double sum = 1.0;
    const double hump = std::fabs(x) + 10.0;
    for (int k = 0; k < 100000; ++k) {
        term *= (a + k) * x / ((b + k) * (k + 1.0));
        sum += term;
        if (!std::isfinite(sum))
            throw std::runtime_error("kummer_1f1: series overflowed double range");
        if (k > hump && std::fabs(term) < 1e-16 * std::fabs(sum)) return sum;
    }
    throw std::runtime_error("kummer_1f1: series did not converge");
}

// Gauss-Hermite rule for weight e^{-x^2}: nodes are roots of the physicists'
// Hermite polynomial H_l found by Newton iteration on the orthonormal
// recurrence; weights from the derivative identity w = 2 / (Hbar_l'(x))^2.
inline QuadratureRule gauss_hermite(int order) {
    detail::require(order >= 1 && order <= 64, "gauss_hermite: order must be in [1,64]");
    const int l = order;
    const int m = (l + 1) / 2;
    const double pim4 = 0.7511255444649425;  // pi^{-1/4}

    QuadratureRule rule;
    rule.order = l;
    rule.nodes.assign(l, 0.0);
    rule.weights.assign(l, 0.0);

    double z = 0.0, z_prev = 0.0, z_prev2 = 0.0;
    for (int i = 0; i < m; ++i) {
        // initial guesses, largest root first
        if (i == 0)
            z = std::sqrt(2.0 * l + 1.0) - 1.85575 * std::pow(2.0 * l + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(l), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * z_prev2;
        else if (i == 3)
            z = 1.91 * z - 0.91 * z_prev2;
        else
            z = 2.0 * z - z_prev2;

        double pp = 0.0;
        bool converged = false;
        for (int it = 0; it < 200; ++it) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 1; j <= l; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * l) * p2;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) <= 3e-15 * (1.0 + std::fabs(z))) {
                converged = true;
                break;
            }
        }
        if (!converged) throw std::runtime_error("gauss_hermite: Newton iteration did not converge");

        z_prev2 = z_prev;
        z_prev = z;

        const bool center = (l % 2 == 1) && (i == m - 1);
        const double node = center ? 0.0 : z;
        const double w = 2.0 / (pp * pp);
        rule.nodes[l - 1 - i] = node;
        rule.nodes[i] = -node;
        rule.weights[l - 1 - i] = w;
        rule.weights[i] = w;
    }
    return rule;
}

}  // namespace coopsense
