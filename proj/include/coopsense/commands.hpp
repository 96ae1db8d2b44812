#pragma once

// Batch commands behind the CLI: closed-form sweeps (roc, utilization,
// snr-req), the Monte-Carlo-vs-closed-form validation grid, and a self-test.
// Each command validates its config up front, computes, checks the emitted
// table's invariants, and only then writes CSV.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "coopsense/analytic.hpp"
#include "coopsense/channel.hpp"
#include "coopsense/config.hpp"
#include "coopsense/csv.hpp"
#include "coopsense/fusion.hpp"
#include "coopsense/montecarlo.hpp"
#include "coopsense/specfun.hpp"

namespace coopsense {

// exit code 1: an output or oracle check failed after a well-formed config
struct ValidationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace cmd_detail {

enum class Scheme { EgcScheme, WcFixedScheme, WcAdaptiveScheme };

inline Scheme parse_scheme(const std::string& s) {
    if (s == "egc") return Scheme::EgcScheme;
    if (s == "wc-fixed") return Scheme::WcFixedScheme;
    if (s == "wc-adaptive") return Scheme::WcAdaptiveScheme;
    throw ConfigError("config key 'scheme': expected egc|wc-fixed|wc-adaptive, got '" + s +
                      "'");
}

inline std::vector<Scheme> parse_scheme_list(const Config& cfg, const std::string& fallback) {
    std::vector<Scheme> out;
    std::istringstream in(cfg.get_string("scheme", fallback));
    std::string piece;
    while (std::getline(in, piece, ',')) {
        const auto b = piece.find_first_not_of(" \t");
        const auto e = piece.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(parse_scheme(piece.substr(b, e - b + 1)));
    }
    if (out.empty()) throw ConfigError("config key 'scheme': empty");
    return out;
}

inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::EgcScheme: return "egc";
        case Scheme::WcFixedScheme: return "wc-fixed";
        default: return "wc-adaptive";
    }
}

inline ChannelModel make_model(const Config& cfg, const std::string& name) {
    const double mean_db = cfg.get_double("mean_snr_db", 6.0);
    if (name == "awgn") return Awgn{db_to_linear(mean_db)};
    if (name == "rayleigh") return Rayleigh{db_to_linear(mean_db)};
    if (name == "nakagami") {
        const long long m = cfg.get_int("nakagami_m", 2);
        if (m < 1) throw ConfigError("config key 'nakagami_m': must be an integer >= 1");
        return Nakagami{static_cast<int>(m), db_to_linear(mean_db)};
    }
    if (name == "lognormal") {
        const double sigma = cfg.get_double("sigma_db", 6.0);
        if (sigma <= 0.0) throw ConfigError("config key 'sigma_db': must be > 0");
        return Lognormal{cfg.get_double("mu_db", 1.0), sigma};
    }
    throw ConfigError("config key 'model': expected awgn|rayleigh|nakagami|lognormal, got '" +
                      name + "'");
}

inline ChannelModel make_model(const Config& cfg) {
    return make_model(cfg, cfg.get_string("model", "rayleigh"));
}

// Replace the model's mean SNR (dB): the bisection variable of the
// SNR-requirement sweep. For lognormal shadowing the dB-domain mean mu plays
// that role.
inline ChannelModel with_mean_db(const ChannelModel& proto, double mean_db) {
    ChannelModel out = proto;
    std::visit(
        [mean_db](auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Awgn>)
                m.gamma = db_to_linear(mean_db);
            else if constexpr (std::is_same_v<T, Rayleigh>)
                m.mean_gamma = db_to_linear(mean_db);
            else if constexpr (std::is_same_v<T, Nakagami>)
                m.mean_gamma = db_to_linear(mean_db);
            else
                m.mu_db = mean_db;
        },
        out);
    return out;
}

inline SensingParams make_params(const Config& cfg) {
    SensingParams p;
    const long long r = cfg.get_int("r", 1);
    const long long n = cfg.get_int("n", 3);
    if (r < 1) throw ConfigError("config key 'r': must be an integer >= 1");
    if (n < 1) throw ConfigError("config key 'n': must be an integer >= 1");
    p.r = static_cast<int>(r);
    p.n = static_cast<int>(n);
    p.nu = cfg.get_double("nu", 4.0);
    if (p.nu <= 0.0) throw ConfigError("config key 'nu': must be > 0");
    return p;
}

inline int get_gh_order(const Config& cfg) {
    const long long l = cfg.get_int("gh_order", 5);
    if (l < 1 || l > 64) throw ConfigError("config key 'gh_order': must be in [1,64]");
    return static_cast<int>(l);
}

// Weight sum for a closed-form command. Equal gain pins a = n; wc-fixed
// takes an absolute 'sum_a' or, for user-count sweeps, a 'sum_a_factor'
// multiplier on n. Explicit per-user 'weights' win over both.
inline double resolve_sum_a(const Config& cfg, Scheme scheme, int n) {
    if (scheme == Scheme::EgcScheme) return static_cast<double>(n);
    if (scheme == Scheme::WcAdaptiveScheme)
        throw ConfigError(
            "config key 'scheme': wc-adaptive has no fixed weight sum; closed-form sweeps "
            "support egc and wc-fixed");
    if (cfg.has("weights")) {
        const std::vector<double> w = cfg.get_double_list("weights", {});
        if (w.size() != static_cast<std::size_t>(n))
            throw ConfigError("config key 'weights': expected " + std::to_string(n) +
                              " entries");
        double s = 0.0;
        for (double a : w) {
            if (a < 0.0) throw ConfigError("config key 'weights': entries must be >= 0");
            s += a;
        }
        if (s <= 0.0) throw ConfigError("config key 'weights': sum must be > 0");
        return s;
    }
    if (cfg.has("sum_a")) {
        const double a = cfg.get_double("sum_a", 0.0);
        if (a <= 0.0) throw ConfigError("config key 'sum_a': must be > 0");
        return a;
    }
    if (cfg.has("sum_a_factor")) {
        const double f = cfg.get_double("sum_a_factor", 1.0);
        if (f <= 0.0) throw ConfigError("config key 'sum_a_factor': must be > 0");
        return f * n;
    }
    throw ConfigError("scheme wc-fixed requires one of 'sum_a', 'sum_a_factor' or 'weights'");
}

// Solve psi_d(lambda) = target on the monotone closed form. Returns the
// threshold; the caller owns feasibility reporting.
inline double solve_lambda_for_pd(const CooperativeScenario& proto, int gh_order,
                                  double target) {
    CooperativeScenario sc = proto;
    double lo = 0.0;  // psi_d(0) = 1 >= target
    double hi = 2.0 * sc.params.n * sc.params.r + 16.0;
    for (int guard = 0;; ++guard) {
        sc.params.lambda = hi;
        if (psi_d(sc, gh_order) < target) break;
        lo = hi;
        hi *= 2.0;
        if (guard > 300) throw std::runtime_error("solve_lambda_for_pd: bracket overflow");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        sc.params.lambda = mid;
        if (psi_d(sc, gh_order) >= target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline bool is_probability(double v) { return v >= 0.0 && v <= 1.0; }

// Agreement score between a closed-form probability and a Monte Carlo
// estimate, in standard deviations. When every trial landed on the same side
// the binomial standard error is zero, so the exact tail probability of that
// outcome is converted to an equivalent normal deviate instead.
inline double mc_zscore(double closed, double mc, double se, std::uint64_t trials) {
    const double gap = std::fabs(closed - mc);
    if (se > 0.0) return gap / se;
    if (gap == 0.0) return 0.0;
    // P(all trials agree) = (1 - gap)^trials for either saturated side
    const double logp = static_cast<double>(trials) * std::log1p(-gap);
    if (logp < -700.0) return std::sqrt(-2.0 * logp);
    const double two_sided = std::min(1.0, 2.0 * std::exp(logp));
    return std::sqrt(2.0 * inverse_regularized_upper_gamma(0.5, two_sided));
}

}  // namespace cmd_detail

// ROC sweep: for each false-alarm grid point, invert the threshold and
// evaluate the configured closed form; rows are (scheme, psi_f, psi_m,
// lambda) in grid order.
inline int cmd_roc(const Config& cfg, std::ostream& out) {
    cfg.require_known({"model", "r", "n", "nu", "mean_snr_db", "nakagami_m", "mu_db",
                       "sigma_db", "gh_order", "scheme", "sum_a", "sum_a_factor", "weights",
                       "psi_f_min", "psi_f_max", "psi_f_points"});
    const SensingParams params = cmd_detail::make_params(cfg);
    const ChannelModel model = cmd_detail::make_model(cfg);
    const int gh_order = cmd_detail::get_gh_order(cfg);
    const auto schemes = cmd_detail::parse_scheme_list(cfg, "egc");

    const double pf_min = cfg.get_double("psi_f_min", 1e-4);
    const double pf_max = cfg.get_double("psi_f_max", 1.0);
    const long long points = cfg.get_int("psi_f_points", 40);
    if (!(pf_min > 0.0 && pf_min < pf_max && pf_max <= 1.0))
        throw ConfigError("config: need 0 < psi_f_min < psi_f_max <= 1");
    if (points < 2) throw ConfigError("config key 'psi_f_points': must be >= 2");

    CsvTable table;
    table.header = {"scheme", "psi_f", "psi_m", "lambda"};
    for (auto scheme : schemes) {
        const double sum_a = cmd_detail::resolve_sum_a(cfg, scheme, params.n);
        CooperativeScenario sc{params, model, sum_a};
        double prev_pm = 1.0 + 1e-12;
        for (long long k = 0; k < points; ++k) {
            const double frac = static_cast<double>(k) / static_cast<double>(points - 1);
            const double pf =
                std::exp(std::log(pf_min) + frac * (std::log(pf_max) - std::log(pf_min)));
            sc.params.lambda = threshold_for_pf(pf, params.n, params.r);
            const double pd = psi_d(sc, gh_order);
            const double pm = 1.0 - pd;
            if (!cmd_detail::is_probability(pf) || !cmd_detail::is_probability(pm))
                throw ValidationFailure("cmd_roc: emitted value outside [0,1]");
            if (pm > prev_pm + 1e-12)
                throw ValidationFailure("cmd_roc: psi_m not nonincreasing along the grid");
            prev_pm = pm;
            table.rows.push_back({cmd_detail::scheme_name(scheme), csv_num(pf), csv_num(pm),
                                  csv_num(sc.params.lambda)});
        }
    }
    table.write(out);
    return 0;
}

// Spectrum utilization: 1 - psi_f at the threshold meeting a target psi_d,
// swept over user counts.
inline int cmd_utilization(const Config& cfg, std::ostream& out) {
    cfg.require_known({"model", "r", "nu", "mean_snr_db", "nakagami_m", "mu_db", "sigma_db",
                       "gh_order", "scheme", "sum_a_factor", "target_psi_d", "users"});
    const ChannelModel model = cmd_detail::make_model(cfg);
    const int gh_order = cmd_detail::get_gh_order(cfg);
    const auto schemes = cmd_detail::parse_scheme_list(cfg, "egc");
    const double target_pd = cfg.get_double("target_psi_d", 0.9);
    if (!(target_pd > 0.0 && target_pd < 1.0))
        throw ConfigError("config key 'target_psi_d': must be in (0,1)");
    const std::vector<int> users = cfg.get_int_list("users", {1, 2, 3, 4, 5, 6, 7, 8});
    for (int n : users)
        if (n < 1) throw ConfigError("config key 'users': entries must be >= 1");

    SensingParams base;
    const long long r = cfg.get_int("r", 1);
    if (r < 1) throw ConfigError("config key 'r': must be an integer >= 1");
    base.r = static_cast<int>(r);
    base.nu = cfg.get_double("nu", 4.0);

    CsvTable table;
    table.header = {"scheme", "n", "target_psi_d", "lambda", "psi_f", "utilization", "status"};
    for (auto scheme : schemes) {
        double prev_util = -1.0;
        for (int n : users) {
            SensingParams params = base;
            params.n = n;
            const double sum_a = cmd_detail::resolve_sum_a(cfg, scheme, n);
            CooperativeScenario sc{params, model, sum_a};
            double lambda = 0.0, pf = 0.0, util = 0.0;
            std::string status = "ok";
            try {
                lambda = cmd_detail::solve_lambda_for_pd(sc, gh_order, target_pd);
                pf = psi_f(lambda, n, params.r);
                util = 1.0 - pf;
            } catch (const std::runtime_error&) {
                status = "infeasible";
                lambda = pf = util = std::numeric_limits<double>::quiet_NaN();
            }
            if (status == "ok") {
                if (!cmd_detail::is_probability(pf) || !cmd_detail::is_probability(util))
                    throw ValidationFailure("cmd_utilization: emitted value outside [0,1]");
                if (util < prev_util - 1e-9)
                    throw ValidationFailure(
                        "cmd_utilization: utilization not nondecreasing in n");
                prev_util = util;
            }
            table.rows.push_back({cmd_detail::scheme_name(scheme), std::to_string(n),
                                  csv_num(target_pd), csv_num(lambda), csv_num(pf),
                                  csv_num(util), status});
        }
    }
    table.write(out);
    return 0;
}

// Required mean SNR (dB) to reach a detection target at a fixed false-alarm
// budget, swept over user counts; bisection on the monotone closed form.
inline int cmd_snr_requirement(const Config& cfg, std::ostream& out) {
    cfg.require_known({"model", "r", "nu", "nakagami_m", "sigma_db", "gh_order", "scheme",
                       "sum_a_factor", "users", "target_psi_f", "target_psi_d_list"});
    const int gh_order = cmd_detail::get_gh_order(cfg);
    const auto schemes = cmd_detail::parse_scheme_list(cfg, "egc");
    const double target_pf = cfg.get_double("target_psi_f", 0.1);
    if (!(target_pf > 0.0 && target_pf < 1.0))
        throw ConfigError("config key 'target_psi_f': must be in (0,1)");
    const std::vector<double> target_pds = cfg.get_double_list("target_psi_d_list", {0.9});
    for (double pd : target_pds) {
        if (!(pd > 0.0 && pd < 1.0))
            throw ConfigError("config key 'target_psi_d_list': entries must be in (0,1)");
        if (!(pd > target_pf))
            throw ConfigError("config: each detection target must exceed target_psi_f");
    }
    const std::vector<int> users = cfg.get_int_list("users", {1, 2, 3, 4, 5});
    for (int n : users)
        if (n < 1) throw ConfigError("config key 'users': entries must be >= 1");

    // model prototype: mean replaced per bisection step
    const ChannelModel proto = cmd_detail::make_model(cfg);
    SensingParams base;
    const long long r = cfg.get_int("r", 1);
    if (r < 1) throw ConfigError("config key 'r': must be an integer >= 1");
    base.r = static_cast<int>(r);
    base.nu = cfg.get_double("nu", 4.0);

    const double floor_db = -60.0, cap_db = 60.0;

    CsvTable table;
    table.header = {"scheme",          "n",    "target_psi_d", "target_psi_f",
                    "required_mean_snr_db", "status"};
    for (auto scheme : schemes) {
        for (double target_pd : target_pds) {
            double prev_req = std::numeric_limits<double>::infinity();
            for (int n : users) {
                SensingParams params = base;
                params.n = n;
                params.lambda = threshold_for_pf(target_pf, n, params.r);
                const double sum_a = cmd_detail::resolve_sum_a(cfg, scheme, n);
                auto pd_at = [&](double mean_db) {
                    CooperativeScenario sc{params, cmd_detail::with_mean_db(proto, mean_db),
                                           sum_a};
                    return psi_d(sc, gh_order);
                };
                std::string status = "ok";
                double req = 0.0;
                if (pd_at(cap_db) < target_pd) {
                    status = "infeasible";
                    req = std::numeric_limits<double>::quiet_NaN();
                } else if (pd_at(floor_db) >= target_pd) {
                    status = "floor";  // at or below the sweep floor
                    req = floor_db;
                } else {
                    double lo = floor_db, hi = cap_db;
                    for (int i = 0; i < 200; ++i) {
                        const double mid = 0.5 * (lo + hi);
                        if (mid == lo || mid == hi) break;
                        if (pd_at(mid) < target_pd)
                            lo = mid;
                        else
                            hi = mid;
                    }
                    req = 0.5 * (lo + hi);
                    if (std::fabs(pd_at(req) - target_pd) > 1e-6)
                        throw ValidationFailure(
                            "cmd_snr_requirement: bisection missed the detection target");
                }
                if (status == "ok") {
                    if (req < prev_req - 1e-12)
                        prev_req = req;
                    else
                        throw ValidationFailure(
                            "cmd_snr_requirement: required SNR not strictly decreasing in n");
                }
                table.rows.push_back({cmd_detail::scheme_name(scheme), std::to_string(n),
                                      csv_num(target_pd), csv_num(target_pf), csv_num(req),
                                      status});
            }
        }
    }
    table.write(out);
    return 0;
}

// Oracle-agreement grid: closed form vs Monte Carlo per (model, n, r,
// threshold), both hypotheses. Adaptive-weight rows are informational (the
// fixed-weight formulas are a documented approximation there); any other
// cell beyond 3 standard errors fails the run.
inline int cmd_validate(const Config& cfg, std::ostream& out) {
    cfg.require_known({"models", "users", "tb_products", "pf_targets", "trials", "seed",
                       "workers", "scheme", "mean_snr_db", "nakagami_m", "mu_db", "sigma_db",
                       "nu", "distances"});
    const std::vector<int> users = cfg.get_int_list("users", {1, 3, 5});
    const std::vector<int> tbs = cfg.get_int_list("tb_products", {1, 2});
    const std::vector<double> pf_targets =
        cfg.get_double_list("pf_targets", {0.5, 0.1, 0.01});
    for (double pf : pf_targets)
        if (!(pf > 0.0 && pf <= 1.0))
            throw ConfigError("config key 'pf_targets': entries must be in (0,1]");
    for (int n : users)
        if (n < 1) throw ConfigError("config key 'users': entries must be >= 1");
    for (int r : tbs)
        if (r < 1) throw ConfigError("config key 'tb_products': entries must be >= 1");
    const std::uint64_t trials = cfg.get_u64("trials", 100000);
    if (trials < 1) throw ConfigError("config key 'trials': must be >= 1");
    const std::uint64_t seed = cfg.get_u64("seed", 20260814);
    const unsigned workers = static_cast<unsigned>(cfg.get_u64("workers", 1));

    std::vector<std::string> model_names;
    {
        std::istringstream in(cfg.get_string("models", "awgn,rayleigh,nakagami,lognormal"));
        std::string piece;
        while (std::getline(in, piece, ','))
            if (!piece.empty()) model_names.push_back(piece);
    }
    const auto schemes = cmd_detail::parse_scheme_list(cfg, "egc");

    // lognormal closed form evaluated at high quadrature order so that the
    // comparison measures the model, not the quadrature truncation
    const int gh_order_cmp = 31;

    CsvTable table;
    table.header = {"model",  "scheme",      "n",           "r",      "lambda", "quantity",
                    "closed_form", "mc_estimate", "stderr", "zscore", "status"};
    bool any_fail = false;
    std::uint64_t stream_salt = 0;

    for (const auto& model_name : model_names) {
        const ChannelModel model = cmd_detail::make_model(cfg, model_name);
        for (auto scheme : schemes) {
            for (int n : users) {
                for (int r : tbs) {
                    SensingParams params;
                    params.n = n;
                    params.r = r;
                    params.nu = cfg.get_double("nu", 4.0);

                    std::vector<double> grid;
                    for (double pf : pf_targets) grid.push_back(threshold_for_pf(pf, n, r));
                    std::sort(grid.begin(), grid.end());

                    SimScenario sim;
                    sim.params = params;
                    sim.model = model;
                    sim.distances = cfg.get_double_list(
                        "distances", std::vector<double>(static_cast<std::size_t>(n), 1000.0));
                    if (sim.distances.size() != static_cast<std::size_t>(n)) {
                        // a single shared geometry cannot fit every n in the grid
                        sim.distances.assign(static_cast<std::size_t>(n), 1000.0);
                    }
                    double sum_a = static_cast<double>(n);
                    bool informational = false;
                    switch (scheme) {
                        case cmd_detail::Scheme::EgcScheme:
                            sim.weight_mode = Egc{};
                            break;
                        case cmd_detail::Scheme::WcFixedScheme:
                            sim.weight_mode = WcFixed{egc_weights(n)};
                            break;
                        case cmd_detail::Scheme::WcAdaptiveScheme:
                            sim.weight_mode = WcAdaptive{};
                            informational = true;
                            break;
                    }
                    sim.trials = trials;
                    // decorrelate cells while keeping the whole run a pure
                    // function of the configured seed
                    sim.seed = detail::mix64(seed ^ detail::mix64(++stream_salt));

                    const auto estimates = simulate_curve(sim, grid, workers);
                    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
                        const double lambda = grid[gi];
                        CooperativeScenario sc{params, model, sum_a};
                        sc.params.lambda = lambda;
                        const double cf_d = psi_d(sc, gh_order_cmp);
                        const double cf_f = psi_f(lambda, n, r);
                        const SimEstimate& est = estimates[gi];
                        struct Row {
                            const char* quantity;
                            double closed, mc, se;
                        } rows[2] = {{"psi_d", cf_d, est.psi_d_hat, est.stderr_d},
                                     {"psi_f", cf_f, est.psi_f_hat, est.stderr_f}};
                        for (const Row& row : rows) {
                            const double z =
                                cmd_detail::mc_zscore(row.closed, row.mc, row.se, trials);
                            std::string status;
                            if (informational)
                                status = "info";
                            else if (z <= 3.0)
                                status = "pass";
                            else {
                                status = "fail";
                                any_fail = true;
                            }
                            table.rows.push_back({model_name, cmd_detail::scheme_name(scheme),
                                                  std::to_string(n), std::to_string(r),
                                                  csv_num(lambda), row.quantity,
                                                  csv_num(row.closed), csv_num(row.mc),
                                                  csv_num(row.se), csv_num(z), status});
                        }
                    }
                }
            }
        }
    }
    table.write(out);
    return any_fail ? 1 : 0;
}

namespace cmd_detail {

struct CheckSet {
    std::string module;
    int passed = 0;
    int failed = 0;
    std::ostream& log;

    CheckSet(std::string mod, std::ostream& os) : module(std::move(mod)), log(os) {}

    void check(const std::string& name, bool ok) {
        if (ok) {
            ++passed;
        } else {
            ++failed;
            log << "  FAILED: " << module << ": " << name << "\n";
        }
    }
};

inline bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

}  // namespace cmd_detail

// Self-test: the analytically-forced example values and the quick invariant
// sweeps from every module. Prints per-module counts; nonzero on failure.
inline int cmd_selftest(std::ostream& out) {
    using cmd_detail::near;
    std::vector<cmd_detail::CheckSet> sets;

    {
        cmd_detail::CheckSet cs("specfun", out);
        const double e = 2.718281828459045235360287;
        cs.check("upper gamma at x=0", regularized_upper_gamma(1.0, 0.0) == 1.0);
        cs.check("upper gamma s=1 closed form",
                 near(regularized_upper_gamma(1.0, 1.0), 1.0 / e, 1e-14));
        cs.check("inverse at p=1", inverse_regularized_upper_gamma(1.0, 1.0) == 0.0);
        cs.check("inverse s=1 closed form",
                 near(inverse_regularized_upper_gamma(1.0, 1.0 / e), 1.0, 1e-10));
        {
            bool ok = true;
            for (double s : {0.5, 1.0, 2.0, 5.0, 20.0})
                for (double p : {1e-6, 1e-3, 0.25, 0.5, 0.999}) {
                    const double x = inverse_regularized_upper_gamma(s, p);
                    ok = ok && near(regularized_upper_gamma(s, x), p, 1e-9);
                }
            cs.check("inverse is a two-sided inverse", ok);
        }
        cs.check("marcum at b=0", marcum_q(2, 1.3, 0.0) == 1.0);
        cs.check("marcum a=0 order 1", near(marcum_q(1, 0.0, 2.0), std::exp(-2.0), 1e-14));
        {
            bool ok = true;
            for (int M : {1, 3, 8})
                for (double a : {0.0, 0.7, 2.5, 6.0}) {
                    double prev = 1.0 + 1e-15;
                    for (double b : {0.0, 0.5, 1.5, 3.0, 6.0, 10.0}) {
                        const double q = marcum_q(M, a, b);
                        ok = ok && q <= prev + 1e-12 && q >= 0.0 && q <= 1.0;
                        prev = q;
                    }
                }
            cs.check("marcum nonincreasing in b", ok);
        }
        {
            bool ok = true;
            for (int M : {1, 2, 5, 12})
                for (double b : {0.3, 1.0, 4.0, 9.0})
                    ok = ok && near(marcum_q(M, 0.0, b),
                                    regularized_upper_gamma(M, 0.5 * b * b), 1e-10);
            cs.check("marcum central reduction", ok);
        }
        cs.check("log bessel at origin", log_bessel_i(0.0, 0.0) == 0.0);
        cs.check("laguerre degree 0", laguerre(0, 7.3) == 1.0);
        cs.check("laguerre degree 1", laguerre(1, 2.0) == -1.0);
        cs.check("kummer at x=0", kummer_1f1(2.0, 3.0, 0.0) == 1.0);
        cs.check("kummer a=b exponential",
                 near(kummer_1f1(1.0, 1.0, 1.5), std::exp(1.5), 1e-12));
        {
            const QuadratureRule g1 = gauss_hermite(1);
            const QuadratureRule g2 = gauss_hermite(2);
            const double rpi = 1.7724538509055160273;
            cs.check("gauss hermite order 1",
                     g1.nodes[0] == 0.0 && near(g1.weights[0], rpi, 1e-14));
            cs.check("gauss hermite order 2",
                     near(g2.nodes[1], 1.0 / std::sqrt(2.0), 1e-14) &&
                         near(g2.weights[0], rpi / 2.0, 1e-14) &&
                         g2.nodes[0] == -g2.nodes[1]);
        }
        {
            bool ok = true;
            for (int l : {1, 2, 5, 8, 20}) {
                const QuadratureRule g = gauss_hermite(l);
                double wsum = 0.0;
                for (double w : g.weights) wsum += w;
                ok = ok && near(wsum, 1.7724538509055160273, 1e-12);
                // exact moments of e^{-x^2}: odd vanish, even = sqrt(pi)*(k-1)!!/2^{k/2}
                double expect = 1.7724538509055160273;
                for (int k = 0; k <= 2 * l - 1; ++k) {
                    double got = 0.0;
                    for (int i = 0; i < l; ++i)
                        got += g.weights[i] * std::pow(g.nodes[i], k);
                    if (k % 2 == 1) {
                        ok = ok && std::fabs(got) < 1e-10 * expect;
                    } else {
                        if (k > 0) expect *= 0.5 * (k - 1);
                        ok = ok && std::fabs(got - expect) <= 1e-10 * std::fabs(expect);
                    }
                }
            }
            cs.check("gauss hermite integrates monomials exactly", ok);
        }
        sets.push_back(cs);
    }

    {
        cmd_detail::CheckSet cs("channel", out);
        cs.check("H0 density r=1",
                 near(energy_density(0.5, 1, 0.0, Hypothesis::H0), std::exp(-0.25) / 2.0,
                      1e-14));
        {
            bool ok = true;
            for (double y : {0.1, 1.0, 4.0, 12.0})
                for (int r : {1, 2, 4})
                    ok = ok && near(energy_density(y, r, 0.0, Hypothesis::H1),
                                    energy_density(y, r, 0.0, Hypothesis::H0), 1e-14);
            cs.check("zero noncentrality collapses to H0", ok);
        }
        cs.check("single_pf at lambda=0", single_pf(0.0, 3) == 1.0);
        cs.check("single_pf r=1 closed form", near(single_pf(2.0, 1), std::exp(-1.0), 1e-14));
        cs.check("single_pd at gamma=0",
                 near(single_pd_awgn(3.0, 1, 0.0), std::exp(-1.5), 1e-14));
        cs.check("single_pd at lambda=0", single_pd_awgn(0.0, 2, 4.0) == 1.0);
        {
            bool ok = true;
            for (double lam : {0.5, 2.0, 6.0, 14.0})
                for (int r : {1, 2, 5})
                    for (double g : {0.0, 0.4, 2.0, 8.0})
                        ok = ok && single_pd_awgn(lam, r, g) >= single_pf(lam, r) - 1e-12;
            cs.check("detection dominates false alarm", ok);
        }
        {
            RandomStream rng(2024, 0);
            const int draws = 1000000;
            double acc = 0.0;
            for (int i = 0; i < draws; ++i) acc += sample_energy(rng, 1, 0.0, Hypothesis::H0);
            const double mean = acc / draws;
            cs.check("H0 energy mean is 2r", near(mean, 2.0, 3.0 * 2.0 / 1000.0));
            acc = 0.0;
            for (int i = 0; i < draws; ++i) acc += sample_energy(rng, 2, 1.5, Hypothesis::H1);
            cs.check("H1 energy mean is 2r(1+gamma)",
                     near(acc / draws, 10.0, 3.0 * std::sqrt(4 * 2 + 8 * 2 * 1.5) / 1000.0));
        }
        {
            RandomStream rng(2025, 1);
            const int draws = 1000000;
            double acc = 0.0;
            const ChannelModel ray = Rayleigh{3.9810717055349722};
            for (int i = 0; i < draws; ++i) acc += sample_snr(rng, ray);
            cs.check("rayleigh SNR mean",
                     near(acc / draws, 3.9810717055349722, 3.0 * 3.981 / 1000.0));
            acc = 0.0;
            const ChannelModel ln = Lognormal{1.0, 6.0};
            for (int i = 0; i < draws; ++i) acc += linear_to_db(sample_snr(rng, ln));
            cs.check("lognormal dB mean", near(acc / draws, 1.0, 3.0 * 6.0 / 1000.0));
            const ChannelModel aw = Awgn{2.0};
            bool ok = true;
            for (int i = 0; i < 10; ++i) ok = ok && sample_snr(rng, aw) == 2.0;
            cs.check("awgn SNR is constant", ok);
        }
        sets.push_back(cs);
    }

    {
        cmd_detail::CheckSet cs("fusion", out);
        const WeightVector e3 = egc_weights(3);
        cs.check("egc weights", e3.sum_a == 3.0 && !e3.degenerate_fallback &&
                                    e3.weights == std::vector<double>({1.0, 1.0, 1.0}));
        cs.check("combine egc sum", combine(e3, {2.0, 3.0, 4.0}) == 9.0);
        cs.check("combine weighted", combine({{0.5, 2.0}, 2.5, false}, {4.0, 1.0}) == 4.0);
        cs.check("effective snr", effective_snr({{1.0, 1.0}, 2.0, false}, {2.0, 3.0}) == 5.0);
        cs.check("mean snr egc identity", mean_snr_wc(3.0, 3.981, 3) == 3.981);
        cs.check("mean snr arithmetic", near(mean_snr_wc(4.5, 2.0, 3), 3.0, 1e-15));
        {
            const WeightVector w = wc_weights({{10.0, 50.0}, {10.0, 400.0}}, 4.0);
            cs.check("equal energies fall back", w.degenerate_fallback &&
                                                     w.weights ==
                                                         std::vector<double>({1.0, 1.0}));
        }
        {
            const WeightVector w = wc_weights({{7.0, 123.0}}, 4.0);
            cs.check("single user falls back", w.degenerate_fallback && w.weights[0] == 1.0);
        }
        {
            // common energy scale and common distance scale leave weights alone
            RandomStream rng(77, 3);
            bool ok = true;
            for (int rep = 0; rep < 20; ++rep) {
                std::vector<UserReport> reports;
                for (int i = 0; i < 4; ++i)
                    reports.push_back({50.0 * rng.next_open_unit() + 1.0,
                                       900.0 * rng.next_open_unit() + 100.0});
                const WeightVector w0 = wc_weights(reports, 4.0);
                std::vector<UserReport> scaled = reports;
                for (auto& rep2 : scaled) {
                    rep2.energy *= 37.5;
                    rep2.distance *= 0.21;
                }
                const WeightVector w1 = wc_weights(scaled, 4.0);
                for (std::size_t i = 0; i < w0.weights.size(); ++i)
                    ok = ok && near(w0.weights[i], w1.weights[i], 1e-10);
            }
            cs.check("weights invariant to common scales", ok);
        }
        sets.push_back(cs);
    }

    {
        cmd_detail::CheckSet cs("analytic", out);
        cs.check("psi_f at lambda=0", psi_f(0.0, 3, 1) == 1.0);
        cs.check("psi_f single user", near(psi_f(2.0, 1, 1), std::exp(-1.0), 1e-14));
        cs.check("threshold at target 1", threshold_for_pf(1.0, 3, 1) == 0.0);
        cs.check("threshold single user",
                 near(threshold_for_pf(std::exp(-1.0), 1, 1), 2.0, 1e-9));
        {
            bool ok = true;
            for (double lam : {0.5, 3.0, 9.0})
                for (int n : {1, 3})
                    ok = ok && near(psi_d_awgn(lam, n, 1, 0.0), psi_f(lam, n, 1), 1e-10);
            cs.check("zero SNR collapses to false alarm", ok);
        }
        cs.check("awgn detection at lambda=0", psi_d_awgn(0.0, 2, 1, 5.0) == 1.0);
        cs.check("nakagami m=1 is rayleigh",
                 psi_d_nakagami(11.0, 3, 1, 1, 3.981, 3.0) ==
                     psi_d_rayleigh(11.0, 3, 1, 3.981, 3.0));
        {
            const double direct = psi_d_awgn(8.0, 3, 1, 3.0 * db_to_linear(1.0));
            const double collapsed = psi_d_lognormal(8.0, 3, 1, 1.0, 1e-3, 3.0, 5);
            cs.check("narrow shadowing collapses to awgn", near(direct, collapsed, 1e-3));
        }
        {
            bool ok = true;
            for (double lam : {4.0, 11.0, 21.0})
                ok = ok && near(psi_d_lognormal(lam, 3, 1, 1.0, 6.0, 3.0, 5),
                                psi_d_lognormal(lam, 3, 1, 1.0, 6.0, 3.0, 31), 0.04);
            cs.check("quadrature order insensitivity", ok);
        }
        {
            bool ok = true;
            const double gbar = 3.9810717055349722;
            for (int n : {1, 2, 4}) {
                double prev = -1.0;
                for (double p : {0.01, 0.1, 0.5, 0.9}) {
                    const double lam = threshold_for_pf(p, n, 1);
                    const double pd = psi_d_rayleigh(lam, n, 1, gbar, static_cast<double>(n));
                    ok = ok && pd >= prev - 1e-12 && pd >= p - 1e-12;
                    prev = pd;
                }
            }
            cs.check("ROC dominance and ordering", ok);
        }
        sets.push_back(cs);
    }

    {
        cmd_detail::CheckSet cs("montecarlo", out);
        SimScenario sc;
        sc.params = {1, 3, 4.0, 0.0};
        sc.model = Rayleigh{3.981};
        sc.distances = {100.0, 500.0, 1000.0};
        sc.weight_mode = Egc{};
        sc.trials = 5000;
        sc.seed = 42;
        const SimEstimate zero_lambda = simulate(sc);
        cs.check("lambda=0 detects everything",
                 zero_lambda.psi_d_hat == 1.0 && zero_lambda.psi_f_hat == 1.0);

        sc.params.lambda = 8.0;
        const SimEstimate egc_run = simulate(sc);
        sc.weight_mode = WcFixed{egc_weights(3)};
        const SimEstimate fixed_run = simulate(sc);
        cs.check("unit fixed weights match egc bit for bit",
                 egc_run.psi_d_hat == fixed_run.psi_d_hat &&
                     egc_run.psi_f_hat == fixed_run.psi_f_hat);

        sc.weight_mode = Egc{};
        const auto curve = simulate_curve(sc, {2.0, 6.0, 12.0, 20.0});
        bool mono = true;
        for (std::size_t i = 1; i < curve.size(); ++i) {
            mono = mono && curve[i].psi_d_hat <= curve[i - 1].psi_d_hat;
            mono = mono && curve[i].psi_f_hat <= curve[i - 1].psi_f_hat;
        }
        cs.check("shared-sample curve is monotone", mono);

        const auto single = simulate_curve(sc, {8.0});
        cs.check("one-point curve equals simulate",
                 single[0].psi_d_hat == egc_run.psi_d_hat &&
                     single[0].psi_f_hat == egc_run.psi_f_hat);

        const SimEstimate workers1 = simulate(sc, 1);
        const SimEstimate workers4 = simulate(sc, 4);
        cs.check("worker count cannot change the result",
                 workers1.psi_d_hat == workers4.psi_d_hat &&
                     workers1.psi_f_hat == workers4.psi_f_hat);
        sets.push_back(cs);
    }

    {
        cmd_detail::CheckSet cs("cli", out);
        const std::string text = "model = rayleigh\nn = 4\nmean_snr_db = 6\n";
        const Config a = Config::parse_text(text);
        const Config b = Config::parse_text(a.serialize());
        cs.check("config round-trip", a.entries() == b.entries());
        sets.push_back(cs);
    }

    int total_failed = 0;
    for (const auto& cs : sets) {
        out << cs.module << ": " << cs.passed << " passed, " << cs.failed << " failed\n";
        total_failed += cs.failed;
    }
    out << (total_failed == 0 ? "selftest: all checks passed\n" : "selftest: FAILURES\n");
    return total_failed == 0 ? 0 : 1;
}

}  // namespace coopsense
