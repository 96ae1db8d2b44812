// Command-line front end for the cooperative sensing library. Subcommands
// mirror the batch commands; every option can also come from a key=value
// config file, with flags taking precedence.

#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "coopsense/commands.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string seed;
    std::string trials;
    std::string scheme;
    std::string workers;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "key=value config file");
    sub->add_option("--out", opts.out_path, "output file (default: stdout)");
    sub->add_option("--seed", opts.seed, "override config key 'seed'");
    sub->add_option("--trials", opts.trials, "override config key 'trials'");
    sub->add_option("--scheme", opts.scheme, "override config key 'scheme'");
    sub->add_option("--workers", opts.workers, "override config key 'workers'");
}

coopsense::Config load_config(const CommonOpts& opts) {
    coopsense::Config cfg;
    if (!opts.config_path.empty()) cfg = coopsense::Config::parse_file(opts.config_path);
    if (!opts.seed.empty()) cfg.set("seed", opts.seed);
    if (!opts.trials.empty()) cfg.set("trials", opts.trials);
    if (!opts.scheme.empty()) cfg.set("scheme", opts.scheme);
    if (!opts.workers.empty()) cfg.set("workers", opts.workers);
    return cfg;
}

int run_with_output(const CommonOpts& opts,
                    const std::function<int(std::ostream&)>& body) {
    if (opts.out_path.empty()) return body(std::cout);
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot open output file '" << opts.out_path << "'\n";
        return 2;
    }
    return body(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"closed-form and Monte Carlo analysis of cooperative spectrum sensing"};
    app.require_subcommand(1);

    CommonOpts roc_opts, util_opts, snr_opts, val_opts, self_opts;
    CLI::App* roc = app.add_subcommand("roc", "missed-detection vs false-alarm sweep");
    add_common(roc, roc_opts);
    CLI::App* util =
        app.add_subcommand("utilization", "spectrum utilization vs user count");
    add_common(util, util_opts);
    CLI::App* snr = app.add_subcommand(
        "snr-req", "required mean SNR for detection targets vs user count");
    add_common(snr, snr_opts);
    CLI::App* val = app.add_subcommand(
        "validate", "closed forms against the Monte Carlo oracle over a model grid");
    add_common(val, val_opts);
    CLI::App* self = app.add_subcommand("selftest", "built-in invariant checks");
    add_common(self, self_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (roc->parsed())
            return run_with_output(roc_opts, [&](std::ostream& out) {
                return coopsense::cmd_roc(load_config(roc_opts), out);
            });
        if (util->parsed())
            return run_with_output(util_opts, [&](std::ostream& out) {
                return coopsense::cmd_utilization(load_config(util_opts), out);
            });
        if (snr->parsed())
            return run_with_output(snr_opts, [&](std::ostream& out) {
                return coopsense::cmd_snr_requirement(load_config(snr_opts), out);
            });
        if (val->parsed())
            return run_with_output(val_opts, [&](std::ostream& out) {
                return coopsense::cmd_validate(load_config(val_opts), out);
            });
        return run_with_output(self_opts,
                               [&](std::ostream& out) { return coopsense::cmd_selftest(out); });
    } catch (const coopsense::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const std::domain_error& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const coopsense::ValidationFailure& err) {
        std::cerr << "validation failure: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
