// Command-line runner: configure a scenario, run the baselines and tuners,
// emit traces and summaries, serve a holder over TCP, or print the
// estimator/regret diagnostics.
//
// Exit codes: 0 success, 2 usage error, 3 runtime failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "feedtune/diagnostics.hpp"
#include "feedtune/experiment.hpp"
#include "feedtune/wire.hpp"

namespace {

using feedtune::ExperimentSpec;
using nlohmann::json;

struct CommonFlags {
    std::string config;
    json overrides = json::object();

    void add_to(CLI::App* cmd) {
        cmd->add_option("--config", config, "JSON config file (flags override it)");
        auto opt = [this, cmd](const std::string& flag, const std::string& key,
                               const std::string& help) {
            cmd->add_option_function<std::string>(
                   flag,
                   [this, key](const std::string& v) {
                       overrides[key] = json::parse(v, nullptr, false).is_discarded()
                                            ? json(v)
                                            : json::parse(v);
                   },
                   help)
                ->type_name("TEXT");
        };
        opt("--scenario", "scenario", "toy | biased | multiclass | csv");
        opt("--method", "method", "ini | opt | rs | pps | lcps | fair_pps");
        opt("--budget", "budget", "query budget Q");
        opt("--batch", "batch", "sampling batch size b (0 = heuristic)");
        opt("--sigma", "sigma", "sampling scale");
        opt("--eta", "eta", "learning rate");
        opt("--unit", "unit", "queries per unit update (lcps)");
        opt("--beta", "beta", "importance step (lcps)");
        opt("--gamma", "gamma", "exploration floor (lcps)");
        opt("--rho", "rho", "accuracy weight (fair_pps)");
        opt("--decimals", "decimals", "feedback precision 0..3, -1 = full");
        opt("--split-fraction", "split_fraction", "support fraction of target data");
        opt("--seeds", "seeds", "JSON list of seeds, e.g. [0,1,2]");
        opt("--outdir", "outdir", "output directory for traces and summary");
        opt("--hidden", "hidden", "hidden layer widths, e.g. [16,80]");
        opt("--tunable", "tunable", "last | all");
        opt("--metric", "metric", "accuracy | top<K> | pearson | fair");
        opt("--per-class", "per_class", "samples per class for generators");
        opt("--source-variance", "source_variance", "e.g. [0.7,0.7]");
        opt("--target-variance", "target_variance", "e.g. [0.1,1.5]");
        opt("--source-mean", "source_mean", "class-1 mean, class 0 mirrored");
        opt("--target-mean", "target_mean", "class-1 mean, class 0 mirrored");
        opt("--bias-correlation", "bias_correlation", "label/sensitive correlation (source)");
        opt("--target-bias-correlation", "target_bias_correlation",
            "label/sensitive correlation (target)");
        opt("--sensitive-strength", "sensitive_strength", "scale of the sensitive feature");
        opt("--classes", "classes", "class count for the multiclass scenario");
        opt("--csv-source", "csv_source", "source CSV path");
        opt("--csv-target", "csv_target", "target CSV path");
        opt("--csv-columns", "csv_columns", "JSON map column -> role");
        opt("--pretrain-epochs", "pretrain_epochs", "pre-training epochs");
        opt("--pretrain-lr", "pretrain_lr", "pre-training learning rate");
        opt("--opt-epochs", "opt_epochs", "supervised-tuning epochs");
        opt("--opt-lr", "opt_lr", "supervised-tuning learning rate");
    }

    ExperimentSpec build() const {
        ExperimentSpec spec;
        if (!config.empty()) spec = feedtune::spec_from_json_file(config);
        feedtune::apply_json_overrides(spec, overrides.dump());
        return spec;
    }
};

bool parse_endpoint(const std::string& text, std::string& host, std::uint16_t& port) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) return false;
    host = text.substr(0, colon);
    const int p = std::stoi(text.substr(colon + 1));
    if (p <= 0 || p > 65535) return false;
    port = static_cast<std::uint16_t>(p);
    return true;
}

void print_summary(const feedtune::RunSummary& summary) {
    std::printf("scenario=%s method=%s budget=%zu seeds=%zu\n", summary.scenario.c_str(),
                feedtune::to_string(summary.method).c_str(), summary.budget,
                summary.per_seed.size());
    std::printf("  ini  support %.4f  holdout %.4f\n", summary.mean_ini_support,
                summary.mean_ini_holdout);
    std::printf("  final support %.4f +- %.4f  holdout %.4f +- %.4f\n",
                summary.mean_final_support, summary.std_final_support,
                summary.mean_final_holdout, summary.std_final_holdout);
}

int cmd_run(const CommonFlags& common, const std::string& connect) {
    ExperimentSpec spec = common.build();
    if (!connect.empty()) {
        if (!parse_endpoint(connect, spec.connect_host, spec.connect_port)) {
            std::cerr << "bad --connect endpoint '" << connect << "'\n";
            return 2;
        }
    }
    print_summary(feedtune::run_experiment(spec));
    return 0;
}

int cmd_compare(const CommonFlags& common, const std::vector<std::string>& methods,
                const std::string& out) {
    std::vector<ExperimentSpec> specs;
    for (const auto& m : methods) {
        ExperimentSpec spec = common.build();
        spec.method = feedtune::method_from_string(m);
        if (spec.method == feedtune::Method::fair_pps && spec.metric.arity() != 2) {
            spec.metric = feedtune::MetricSpec::tuple_of(
                {feedtune::MetricSpec::accuracy(), feedtune::MetricSpec::demographic_parity()});
        }
        specs.push_back(std::move(spec));
    }
    const auto table = feedtune::compare(specs);
    feedtune::write_compare_csv(table, out);
    std::printf("wrote %s (%zu methods x %zu queries)\n", out.c_str(), table.labels.size(),
                table.budget);
    return 0;
}

int cmd_serve(const CommonFlags& common, const std::string& bind, std::uint64_t seed) {
    ExperimentSpec spec = common.build();
    std::string host;
    std::uint16_t port = 0;
    if (!parse_endpoint(bind, host, port)) {
        std::cerr << "bad --bind endpoint '" << bind << "'\n";
        return 2;
    }
    feedtune::HolderSetup holder = feedtune::build_holder(spec, seed);
    feedtune::FeedbackOracle oracle(holder.ini_model, holder.selection, holder.support,
                                    holder.holdout, holder.metric, spec.budget, spec.decimals);
    feedtune::OracleServer server(oracle, host, port);
    std::printf("serving %s seed=%llu budget=%zu on %s:%u\n", spec.scenario.c_str(),
                static_cast<unsigned long long>(seed), spec.budget, host.c_str(),
                server.port());
    std::fflush(stdout);
    server.run();
    std::printf("final report delivered, %zu queries answered\n", oracle.audit_log().size());
    return 0;
}

int cmd_diagnose(std::uint64_t seed) {
    const auto est = feedtune::run_estimator_diagnostics(seed);
    std::printf("estimator (dim=%zu b=%zu sigma=%g):\n", est.dim, est.batch, est.sigma);
    std::printf("  cosine(avg estimate, true gradient) = %.4f\n", est.mean_estimate_cosine);
    std::printf("  antithetic linear residual          = %.3e\n",
                est.antithetic_linear_residual);
    std::printf("  projected-norm ratio in (1+-%.1f):\n", est.xi);
    for (std::size_t i = 0; i < est.concentration_batches.size(); ++i) {
        std::printf("    b=%-3zu fraction=%.3f\n", est.concentration_batches[i],
                    est.concentration_fraction[i]);
    }
    std::printf("  fitted C-hat = %.4f\n", est.fitted_c_hat);

    const auto reg = feedtune::run_regret_diagnostics(seed);
    std::printf("regret (arms=%zu T=%zu beta=%.4f):\n", reg.arms, reg.horizon, reg.beta_used);
    std::printf("  bound violations %zu/%zu, worst slack %.3f\n", reg.bound_violations,
                reg.seeds_checked, reg.worst_slack);
    return reg.bound_violations == 0 ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"query-budgeted black-box model tuning from scalar feedback"};
    app.require_subcommand(1);

    CommonFlags run_flags, compare_flags, serve_flags;
    std::string connect, compare_out = "compare.csv", bind = "127.0.0.1:7777";
    std::vector<std::string> compare_methods;
    std::uint64_t serve_seed = 0, diag_seed = 0;

    auto* run = app.add_subcommand("run", "run one experiment spec across its seeds");
    run_flags.add_to(run);
    run->add_option("--connect", connect, "tune against a served holder (host:port)");

    auto* cmp = app.add_subcommand("compare", "run several methods on one scenario");
    compare_flags.add_to(cmp);
    cmp->add_option("--methods", compare_methods, "methods to compare")
        ->required()
        ->delimiter(',');
    cmp->add_option("--out", compare_out, "output CSV path");

    auto* serve = app.add_subcommand("serve", "hold the data and answer queries over TCP");
    serve_flags.add_to(serve);
    serve->add_option("--bind", bind, "bind endpoint host:port (port 0 = ephemeral)");
    serve->add_option("--seed", serve_seed, "seed the served oracle is derived from");

    auto* diag = app.add_subcommand("diagnose", "estimator and regret diagnostic suites");
    diag->add_option("--seed", diag_seed, "diagnostic seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_flags, connect);
        if (cmp->parsed()) return cmd_compare(compare_flags, compare_methods, compare_out);
        if (serve->parsed()) return cmd_serve(serve_flags, bind, serve_seed);
        if (diag->parsed()) return cmd_diagnose(diag_seed);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
