#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "coopsense/analytic.hpp"
#include "coopsense/montecarlo.hpp"

using namespace coopsense;

namespace {

SimScenario base_scenario() {
    SimScenario sc;
    sc.params = {1, 3, 4.0, 8.0};
    sc.model = Rayleigh{3.9810717055349722};
    sc.distances = {200.0, 650.0, 1400.0};
    sc.weight_mode = Egc{};
    sc.trials = 20000;
    sc.seed = 0xC0FFEE;
    return sc;
}

bool same_estimate(const SimEstimate& a, const SimEstimate& b) {
    return a.psi_d_hat == b.psi_d_hat && a.psi_f_hat == b.psi_f_hat &&
           a.stderr_d == b.stderr_d && a.stderr_f == b.stderr_f && a.trials == b.trials;
}

}  // namespace

TEST_CASE("zero threshold detects every trial") {
    SimScenario sc = base_scenario();
    sc.params.lambda = 0.0;
    sc.trials = 3000;
    const SimEstimate est = simulate(sc);
    REQUIRE(est.psi_d_hat == 1.0);
    REQUIRE(est.psi_f_hat == 1.0);
    REQUIRE(est.stderr_d == 0.0);
}

TEST_CASE("all-ones fixed weights reproduce equal gain exactly") {
    SimScenario egc = base_scenario();
    SimScenario fixed = base_scenario();
    fixed.weight_mode = WcFixed{egc_weights(3)};
    const auto a = simulate_curve(egc, {3.0, 8.0, 15.0});
    const auto b = simulate_curve(fixed, {3.0, 8.0, 15.0});
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(same_estimate(a[i], b[i]));
}

TEST_CASE("results are a pure function of config and seed") {
    const SimScenario sc = base_scenario();
    const SimEstimate first = simulate(sc);
    const SimEstimate again = simulate(sc);
    REQUIRE(same_estimate(first, again));
    for (unsigned workers : {2u, 3u, 8u, 32u}) {
        const SimEstimate parallel = simulate(sc, workers);
        REQUIRE(same_estimate(first, parallel));
    }
    SimScenario reseeded = sc;
    reseeded.seed = 0xC0FFEF;
    REQUIRE_FALSE(same_estimate(first, simulate(reseeded)));
}

TEST_CASE("worker counts beyond the trial count stay correct") {
    SimScenario sc = base_scenario();
    sc.trials = 5;
    REQUIRE(same_estimate(simulate(sc, 1), simulate(sc, 16)));
}

TEST_CASE("shared-sample curves are monotone in the threshold") {
    const SimScenario sc = base_scenario();
    const auto curve = simulate_curve(sc, {1.0, 4.0, 9.0, 16.0, 25.0});
    for (std::size_t i = 1; i < curve.size(); ++i) {
        REQUIRE(curve[i].psi_d_hat <= curve[i - 1].psi_d_hat);
        REQUIRE(curve[i].psi_f_hat <= curve[i - 1].psi_f_hat);
    }
}

TEST_CASE("a one-point curve equals the single-threshold estimate") {
    const SimScenario sc = base_scenario();
    const auto curve = simulate_curve(sc, {8.0});
    REQUIRE(same_estimate(curve[0], simulate(sc)));
}

TEST_CASE("standard errors shrink as the square root of the trial count") {
    SimScenario small = base_scenario();
    small.trials = 25000;
    SimScenario big = base_scenario();
    big.trials = 100000;
    const SimEstimate se_small = simulate(small);
    const SimEstimate se_big = simulate(big);
    const double ratio = se_small.stderr_d / se_big.stderr_d;
    REQUIRE(ratio > 1.6);
    REQUIRE(ratio < 2.4);
}

TEST_CASE("estimates agree with the closed forms within three standard errors") {
    {
        SimScenario sc;
        sc.params = {1, 2, 4.0, 7.0};
        sc.model = Awgn{2.0};
        sc.distances = {100.0, 100.0};
        sc.weight_mode = Egc{};
        sc.trials = 100000;
        sc.seed = 1001;
        const SimEstimate est = simulate(sc);
        const double pd = psi_d_awgn(7.0, 2, 1, 2.0 * 2.0);
        const double pf = psi_f(7.0, 2, 1);
        REQUIRE(std::fabs(est.psi_d_hat - pd) <= 3.0 * est.stderr_d);
        REQUIRE(std::fabs(est.psi_f_hat - pf) <= 3.0 * est.stderr_f);
    }
    {
        SimScenario sc = base_scenario();
        sc.params.lambda = 11.0;
        sc.trials = 100000;
        sc.seed = 1002;
        const SimEstimate est = simulate(sc);
        const double pd = psi_d_rayleigh(11.0, 3, 1, 3.9810717055349722, 3.0);
        REQUIRE(std::fabs(est.psi_d_hat - pd) <= 3.0 * est.stderr_d);
        REQUIRE(std::fabs(est.psi_f_hat - psi_f(11.0, 3, 1)) <= 3.0 * est.stderr_f);
    }
    {
        SimScenario sc;
        sc.params = {2, 1, 4.0, 6.0};
        sc.model = Nakagami{2, 1.5};
        sc.distances = {300.0};
        sc.weight_mode = Egc{};
        sc.trials = 100000;
        sc.seed = 1003;
        const SimEstimate est = simulate(sc);
        const double pd = psi_d_nakagami(6.0, 1, 2, 2, 1.5, 1.0);
        REQUIRE(std::fabs(est.psi_d_hat - pd) <= 3.0 * est.stderr_d);
    }
}

TEST_CASE("adaptive weighting recomputes per trial and reports fallbacks") {
    SimScenario sc = base_scenario();
    sc.weight_mode = WcAdaptive{};
    sc.trials = 4000;
    CurveStats stats;
    const SimEstimate est = simulate(sc, 1, &stats);
    REQUIRE(est.psi_d_hat >= 0.0);
    REQUIRE(est.psi_d_hat <= 1.0);
    REQUIRE(est.psi_f_hat >= 0.0);
    REQUIRE(est.psi_f_hat <= 1.0);

    // a single user degenerates on every evaluation (two per trial)
    SimScenario solo = sc;
    solo.params.n = 1;
    solo.distances = {500.0};
    CurveStats solo_stats;
    simulate(solo, 1, &solo_stats);
    REQUIRE(solo_stats.degenerate_fallbacks == 2 * solo.trials);
}

TEST_CASE("scenario validation rejects inconsistent configurations") {
    SimScenario sc = base_scenario();
    sc.distances = {100.0, 200.0};
    REQUIRE_THROWS_AS(simulate(sc), std::domain_error);
    sc = base_scenario();
    sc.trials = 0;
    REQUIRE_THROWS_AS(simulate(sc), std::domain_error);
    sc = base_scenario();
    sc.distances[1] = 0.0;
    REQUIRE_THROWS_AS(simulate(sc), std::domain_error);
    sc = base_scenario();
    sc.weight_mode = WcFixed{egc_weights(2)};
    REQUIRE_THROWS_AS(simulate(sc), std::domain_error);
    sc = base_scenario();
    sc.params.lambda = -1.0;
    REQUIRE_THROWS_AS(simulate(sc), std::domain_error);
    sc = base_scenario();
    REQUIRE_THROWS_AS(simulate_curve(sc, {}), std::domain_error);
    REQUIRE_THROWS_AS(simulate_curve(sc, {3.0, 3.0}), std::domain_error);
    REQUIRE_THROWS_AS(simulate_curve(sc, {5.0, 2.0}), std::domain_error);
}
