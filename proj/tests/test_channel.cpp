#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "coopsense/channel.hpp"
#include "coopsense/integrate.hpp"
#include "coopsense/rng.hpp"

using namespace coopsense;

TEST_CASE("energy densities match frozen references") {
    REQUIRE(std::fabs(energy_density(0.5, 1, 0.0, Hypothesis::H0) -
                      0.38940039153570244) < 1e-15);
    REQUIRE(std::fabs(energy_density(4.0, 2, 1.5, Hypothesis::H1) -
                      0.061007781484982482) < 1e-15);
    REQUIRE(std::fabs(energy_density(7.0, 3, 0.0, Hypothesis::H0) -
                      0.092479486730850408) < 1e-15);
    REQUIRE(std::fabs(energy_density(30.0, 2, 8.0, Hypothesis::H1) -
                      0.033724669732586463) < 1e-15);
}

TEST_CASE("energy densities integrate to one") {
    for (int r : {1, 2, 5}) {
        for (double g : {0.0, 1.0, 3.9810717055349722}) {
            for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
                const auto res = integrate_half_line(
                    [r, g, h](double y) { return energy_density(y, r, g, h); }, 1e-10,
                    {2.0 * r, 2.0 * r * (1.0 + g) + 10.0});
                REQUIRE(res.converged);
                REQUIRE(std::fabs(res.value - 1.0) <= 1e-8);
            }
        }
    }
}

TEST_CASE("densities are the derivatives of the tail probabilities") {
    for (int r : {1, 2, 4}) {
        for (double lam : {0.8, 3.0, 9.0}) {
            const auto tail0 = integrate_to_infinity(
                [r](double y) { return energy_density(y, r, 0.0, Hypothesis::H0); }, lam,
                1e-12);
            REQUIRE(std::fabs(tail0.value - single_pf(lam, r)) < 1e-9);
            const double g = 2.2;
            const auto tail1 = integrate_to_infinity(
                [r, g](double y) { return energy_density(y, r, g, Hypothesis::H1); }, lam,
                1e-12);
            REQUIRE(std::fabs(tail1.value - single_pd_awgn(lam, r, g)) < 1e-9);
        }
    }
}

TEST_CASE("single sensor probabilities match frozen references") {
    REQUIRE(std::fabs(single_pf(5.0, 2) - 0.28729749518364578) < 1e-15);
    REQUIRE(std::fabs(single_pd_awgn(6.0, 1, 3.9810717055349722) -
                      0.71476335304368321) < 1e-14);
    REQUIRE(single_pf(0.0, 3) == 1.0);
    REQUIRE(single_pd_awgn(0.0, 2, 4.0) == 1.0);
    REQUIRE(std::fabs(single_pd_awgn(7.0, 2, 0.0) - single_pf(7.0, 2)) < 1e-12);
}

TEST_CASE("energy samples have the analytic moments") {
    RandomStream rng(314159, 0);
    const int draws = 1000000;
    for (auto [r, g] : std::vector<std::pair<int, double>>{{1, 0.0}, {2, 1.5}, {3, 4.0}}) {
        const Hypothesis h = g == 0.0 ? Hypothesis::H0 : Hypothesis::H1;
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < draws; ++i) {
            const double y = sample_energy(rng, r, g, h);
            s1 += y;
            s2 += y * y;
        }
        const double mean = s1 / draws;
        const double var = s2 / draws - mean * mean;
        const double mean_want = 2.0 * r * (1.0 + g);
        const double var_want = 4.0 * r + 8.0 * r * g;
        REQUIRE(std::fabs(mean - mean_want) < 3.0 * std::sqrt(var_want / draws));
        // sample variance sd ~ var_want * sqrt(2/draws + kurtosis slack)
        REQUIRE(std::fabs(var - var_want) < 5.0 * var_want * std::sqrt(2.0 / draws));
    }
}

TEST_CASE("empirical tail of sampled energies matches single_pf") {
    RandomStream rng(271828, 5);
    const int draws = 200000;
    const int r = 2;
    for (double lam : {2.0, 5.0, 9.0}) {
        int hits = 0;
        RandomStream fresh(271828, static_cast<std::uint64_t>(lam * 16));
        for (int i = 0; i < draws; ++i)
            if (sample_energy(fresh, r, 0.0, Hypothesis::H0) > lam) ++hits;
        const double p = single_pf(lam, r);
        const double se = std::sqrt(p * (1.0 - p) / draws);
        REQUIRE(std::fabs(static_cast<double>(hits) / draws - p) < 3.5 * se);
    }
    (void)rng;
}

TEST_CASE("SNR samples follow the configured fading model") {
    const int draws = 1000000;
    {
        RandomStream rng(99, 1);
        const ChannelModel aw = Awgn{2.5};
        for (int i = 0; i < 16; ++i) REQUIRE(sample_snr(rng, aw) == 2.5);
    }
    {
        RandomStream rng(99, 2);
        const double gbar = 3.9810717055349722;
        const ChannelModel ray = Rayleigh{gbar};
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < draws; ++i) {
            const double g = sample_snr(rng, ray);
            s1 += g;
            s2 += g * g;
        }
        const double mean = s1 / draws;
        REQUIRE(std::fabs(mean - gbar) < 3.0 * gbar / 1000.0);
        // exponential: variance = mean^2
        const double var = s2 / draws - mean * mean;
        REQUIRE(std::fabs(var - gbar * gbar) < 6.0 * gbar * gbar * std::sqrt(8.0 / draws));
    }
    {
        RandomStream rng(99, 3);
        const int m = 3;
        const double gbar = 2.0;
        const ChannelModel nak = Nakagami{m, gbar};
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < draws; ++i) {
            const double g = sample_snr(rng, nak);
            s1 += g;
            s2 += g * g;
        }
        const double mean = s1 / draws;
        const double var = s2 / draws - mean * mean;
        REQUIRE(std::fabs(mean - gbar) < 3.0 * (gbar / std::sqrt(3.0)) / 1000.0);
        // gamma(m, gbar/m): variance = gbar^2/m
        REQUIRE(std::fabs(var - gbar * gbar / m) < 5.0 * (gbar * gbar / m) * 0.01);
    }
    {
        RandomStream rng(99, 4);
        const ChannelModel ln = Lognormal{1.0, 6.0};
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < draws; ++i) {
            const double db = linear_to_db(sample_snr(rng, ln));
            s1 += db;
            s2 += db * db;
        }
        const double mean = s1 / draws;
        const double sd = std::sqrt(s2 / draws - mean * mean);
        REQUIRE(std::fabs(mean - 1.0) < 3.0 * 6.0 / 1000.0);
        REQUIRE(std::fabs(sd - 6.0) < 0.05);
    }
}

TEST_CASE("parameter validation rejects out-of-domain configurations") {
    REQUIRE_THROWS_AS(validate(SensingParams{0, 3, 4.0, 1.0}), std::domain_error);
    REQUIRE_THROWS_AS(validate(SensingParams{1, 0, 4.0, 1.0}), std::domain_error);
    REQUIRE_THROWS_AS(validate(SensingParams{1, 3, 0.0, 1.0}), std::domain_error);
    REQUIRE_THROWS_AS(validate(SensingParams{1, 3, 4.0, -1.0}), std::domain_error);
    REQUIRE_NOTHROW(validate(SensingParams{1, 3, 4.0, 0.0}));

    REQUIRE_THROWS_AS(validate(ChannelModel{Rayleigh{0.0}}), std::domain_error);
    REQUIRE_THROWS_AS(validate(ChannelModel{Nakagami{0, 1.0}}), std::domain_error);
    REQUIRE_THROWS_AS(validate(ChannelModel{Nakagami{2, -1.0}}), std::domain_error);
    REQUIRE_THROWS_AS(validate(ChannelModel{Lognormal{1.0, 0.0}}), std::domain_error);
    REQUIRE_NOTHROW(validate(ChannelModel{Awgn{0.0}}));

    REQUIRE_THROWS_AS(energy_density(-1.0, 1, 0.0, Hypothesis::H0), std::domain_error);
    REQUIRE_THROWS_AS(single_pf(-1.0, 1), std::domain_error);
    REQUIRE_THROWS_AS(single_pd_awgn(1.0, 0, 1.0), std::domain_error);
}

TEST_CASE("decibel conversions round-trip") {
    for (double db : {-20.0, -3.0, 0.0, 1.0, 6.0, 13.0})
        REQUIRE(std::fabs(linear_to_db(db_to_linear(db)) - db) < 1e-12);
    REQUIRE(db_to_linear(0.0) == 1.0);
    REQUIRE(std::fabs(db_to_linear(10.0) - 10.0) < 1e-14);
}
