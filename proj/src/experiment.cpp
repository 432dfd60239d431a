#include "feedtune/experiment.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <json.hpp>

#include "feedtune/wire.hpp"

namespace feedtune {

namespace {

using nlohmann::json;

// Stable child-stream ids for per-seed derivation.
enum : std::uint64_t {
    kSourceStream = 1,
    kTargetStream = 2,
    kInitStream = 3,
    kSplitStream = 4,
    kOptimizerStream = 5,
};

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

double mean_of(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    return xs.empty() ? 0.0 : m / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return std::sqrt(v / static_cast<double>(xs.size()));
}

void validate(const ExperimentSpec& spec) {
    if (spec.scenario != "toy" && spec.scenario != "biased" && spec.scenario != "multiclass" &&
        spec.scenario != "csv") {
        throw std::invalid_argument("unknown scenario '" + spec.scenario + "'");
    }
    if (spec.tunable != "last" && spec.tunable != "all") {
        throw std::invalid_argument("tunable must be 'last' or 'all'");
    }
    if (!(spec.split_fraction > 0.0 && spec.split_fraction < 1.0)) {
        throw std::invalid_argument("split fraction must lie in (0,1)");
    }
    if (spec.seeds.empty()) throw std::invalid_argument("need at least one seed");
    if (spec.sigma <= 0.0) throw std::invalid_argument("sigma must be > 0");
    if (spec.eta <= 0.0) throw std::invalid_argument("eta must be > 0");
    if (spec.decimals < -1 || spec.decimals > 3) {
        throw std::invalid_argument("decimals must be full (-1) or 0..3");
    }
    if (spec.method == Method::fair_pps && spec.metric.arity() != 2) {
        throw std::invalid_argument("fair_pps needs a two-metric tuple (accuracy, parity)");
    }
    if (spec.scenario == "csv" &&
        (spec.csv_source_path.empty() || spec.csv_target_path.empty())) {
        throw std::invalid_argument("csv scenario needs --csv-source and --csv-target");
    }
    if ((spec.method == Method::ini || spec.method == Method::opt) &&
        !spec.connect_host.empty()) {
        throw std::invalid_argument("ini/opt are local baselines; remote mode tunes only");
    }
}

} // namespace

Method method_from_string(const std::string& name) {
    if (name == "ini") return Method::ini;
    if (name == "opt") return Method::opt;
    if (name == "rs") return Method::rs;
    if (name == "pps") return Method::pps;
    if (name == "lcps") return Method::lcps;
    if (name == "fair_pps") return Method::fair_pps;
    throw std::invalid_argument("unknown method '" + name + "'");
}

std::string to_string(Method method) {
    switch (method) {
        case Method::ini: return "ini";
        case Method::opt: return "opt";
        case Method::rs: return "rs";
        case Method::pps: return "pps";
        case Method::lcps: return "lcps";
        case Method::fair_pps: return "fair_pps";
    }
    return "?";
}

HolderSetup build_holder(const ExperimentSpec& spec, std::uint64_t seed) {
    validate(spec);
    SeededRng root(seed);
    const std::uint64_t source_seed = root.child(kSourceStream).next_u64();
    const std::uint64_t target_seed = root.child(kTargetStream).next_u64();
    const std::uint64_t split_seed = root.child(kSplitStream).next_u64();
    SeededRng init_rng = root.child(kInitStream);

    LabeledDataset source, target;
    if (spec.scenario == "toy") {
        TwoGaussiansSpec s = spec.source;
        s.seed = source_seed;
        TwoGaussiansSpec t = spec.target;
        t.seed = target_seed;
        source = gen_two_gaussians(s);
        target = gen_two_gaussians(t);
    } else if (spec.scenario == "biased") {
        BiasedBinarySpec s{spec.source, spec.bias_correlation, spec.sensitive_strength};
        s.base.seed = source_seed;
        BiasedBinarySpec t{spec.target, spec.target_bias_correlation, spec.sensitive_strength};
        t.base.seed = target_seed;
        source = gen_biased_binary(s);
        target = gen_biased_binary(t);
    } else if (spec.scenario == "multiclass") {
        GaussianBlobsSpec s = spec.blobs_source;
        s.seed = source_seed;
        GaussianBlobsSpec t = spec.blobs_target;
        t.seed = target_seed;
        source = gen_gaussian_blobs(s);
        target = gen_gaussian_blobs(t);
    } else {
        CsvSchema schema = spec.csv_schema;
        source = load_csv(spec.csv_source_path, schema);
        target = load_csv(spec.csv_target_path, schema);
    }

    const std::size_t out_dim =
        source.regression ? 1 : (source.class_count == 2 ? 1 : static_cast<std::size_t>(source.class_count));
    MlpModel init = make_mlp(source.features.cols, spec.hidden, out_dim, source.regression,
                             init_rng);
    MlpModel pretrained = pretrain(init, source, spec.pretrain_cfg);

    HolderSetup holder;
    holder.selection = spec.tunable == "last" ? TunableSelection::last_layer_weights(pretrained)
                                              : TunableSelection::all(pretrained);
    holder.ini_model = std::move(pretrained);
    auto [support, holdout] = split_dataset(target, spec.split_fraction, split_seed);
    holder.support = std::move(support);
    holder.holdout = std::move(holdout);
    holder.metric = spec.metric;
    return holder;
}

namespace {

SeedResult run_one_seed(const ExperimentSpec& spec, std::uint64_t seed) {
    HolderSetup holder = build_holder(spec, seed);
    const std::uint64_t opt_seed = SeededRng(seed).child(kOptimizerStream).next_u64();
    const PackedParams packed = pack_parameters(holder.ini_model, holder.selection);
    const bool higher_is_better = holder.metric.orientation()[0] > 0.0;

    SeedResult result;
    result.seed = seed;
    result.ini_support = evaluate(holder.ini_model, holder.support, holder.metric);
    result.ini_holdout = evaluate(holder.ini_model, holder.holdout, holder.metric);

    if (spec.method == Method::ini) {
        result.final_support = result.ini_support;
        result.final_holdout = result.ini_holdout;
        return result;
    }
    if (spec.method == Method::opt) {
        const MlpModel tuned =
            supervised_finetune(holder.ini_model, holder.support, holder.selection, spec.opt_cfg);
        result.final_support = evaluate(tuned, holder.support, holder.metric);
        result.final_holdout = evaluate(tuned, holder.holdout, holder.metric);
        return result;
    }

    FeedbackOracle oracle(holder.ini_model, holder.selection, holder.support, holder.holdout,
                          holder.metric, spec.budget, spec.decimals);
    std::unique_ptr<RemoteChannel> remote;
    FeedbackChannel* channel = &oracle;
    if (!spec.connect_host.empty()) {
        remote = std::make_unique<RemoteChannel>(spec.connect_host, spec.connect_port);
        channel = remote.get();
    }

    OptimResult optim;
    if (spec.method == Method::rs) {
        optim = random_search(packed.theta, *channel, spec.budget, spec.sigma, opt_seed,
                              higher_is_better);
    } else if (spec.method == Method::pps) {
        PpsConfig cfg;
        cfg.budget = spec.budget;
        cfg.batch_size = spec.batch;
        cfg.sigma = spec.sigma;
        cfg.learning_rate = spec.eta;
        cfg.decimals = spec.decimals;
        cfg.seed = opt_seed;
        cfg.higher_is_better = higher_is_better;
        optim = pps_run(packed.theta, *channel, cfg);
    } else if (spec.method == Method::fair_pps) {
        FairnessConfig cfg;
        cfg.budget = spec.budget;
        cfg.batch_size = spec.batch;
        cfg.sigma = spec.sigma;
        cfg.learning_rate = spec.eta;
        cfg.decimals = spec.decimals;
        cfg.seed = opt_seed;
        cfg.rho = spec.rho;
        optim = fairness_pps_run(packed.theta, *channel, cfg);
    } else {
        LcpsConfig cfg;
        cfg.budget = spec.budget;
        cfg.batch_size = spec.batch;
        cfg.sigma = spec.sigma;
        cfg.learning_rate = spec.eta;
        cfg.decimals = spec.decimals;
        cfg.seed = opt_seed;
        cfg.unit_size = spec.unit;
        cfg.beta = spec.beta;
        cfg.gamma = spec.gamma;
        cfg.improvement_scale = spec.improvement_scale;
        cfg.higher_is_better = higher_is_better;
        LcpsResult lcps = lcps_run(packed.theta, packed.partition, *channel, cfg);
        result.layer_queries_total = lcps.trace.layer_queries_total;
        result.layer_queries_stage2 = lcps.trace.layer_queries_stage2;
        result.has_regret = true;
        result.g_max = lcps.ledger.g_max();
        result.g_lcps = lcps.ledger.g_lcps();
        result.regret = lcps.ledger.measured_regret();
        if (lcps.ledger.c > 0.0) {
            result.regret_bound_value =
                regret_bound(lcps.ledger, cfg.beta, lcps.ledger.c, lcps.ledger.layer_count);
        }
        optim = OptimResult{std::move(lcps.best), std::move(lcps.trace)};
    }

    result.queries_spent = optim.trace.queries_spent;
    if (remote) {
        auto [sup, hol] = remote->final_report(optim.best);
        result.final_support = std::move(sup);
        result.final_holdout = std::move(hol);
    } else {
        if (oracle.audit_log().size() != optim.trace.queries_spent ||
            optim.trace.queries_spent > spec.budget) {
            throw std::logic_error("budget accounting mismatch");
        }
        oracle.finish();
        auto [sup, hol] = oracle.final_report(optim.best);
        result.final_support = std::move(sup);
        result.final_holdout = std::move(hol);
    }
    result.trace = std::move(optim.trace);
    return result;
}

void write_trace_csv(const std::string& path, const RunTrace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "iteration,queries_spent,best_support,current_support\n";
    for (const auto& row : trace.rows) {
        out << row.iteration << ',' << row.queries_spent << ',' << format_double(row.best_score)
            << ',' << format_double(row.current_score) << '\n';
    }
}

json summary_to_json(const RunSummary& summary, const ExperimentSpec& spec) {
    json per_seed = json::array();
    for (const auto& r : summary.per_seed) {
        json entry{{"seed", r.seed},
                   {"ini_support", r.ini_support},
                   {"ini_holdout", r.ini_holdout},
                   {"final_support", r.final_support},
                   {"final_holdout", r.final_holdout},
                   {"queries_spent", r.queries_spent}};
        if (!r.layer_queries_total.empty()) {
            entry["layer_queries_total"] = r.layer_queries_total;
            entry["layer_queries_stage2"] = r.layer_queries_stage2;
        }
        if (r.has_regret) {
            entry["g_max"] = r.g_max;
            entry["g_lcps"] = r.g_lcps;
            entry["regret"] = r.regret;
            entry["regret_bound"] = r.regret_bound_value;
        }
        per_seed.push_back(std::move(entry));
    }
    return json{{"scenario", summary.scenario},
                {"method", to_string(summary.method)},
                {"budget", summary.budget},
                {"decimals", spec.decimals},
                {"sigma", spec.sigma},
                {"eta", spec.eta},
                {"mean_ini_support", summary.mean_ini_support},
                {"mean_ini_holdout", summary.mean_ini_holdout},
                {"mean_final_support", summary.mean_final_support},
                {"std_final_support", summary.std_final_support},
                {"mean_final_holdout", summary.mean_final_holdout},
                {"std_final_holdout", summary.std_final_holdout},
                {"per_seed", std::move(per_seed)}};
}

} // namespace

RunSummary run_experiment(const ExperimentSpec& spec) {
    validate(spec);
    RunSummary summary;
    summary.scenario = spec.scenario;
    summary.method = spec.method;
    summary.budget = spec.budget;

    std::vector<double> fin_sup, fin_hol, ini_sup, ini_hol;
    for (const std::uint64_t seed : spec.seeds) {
        SeedResult r = run_one_seed(spec, seed);
        fin_sup.push_back(r.final_support[0]);
        fin_hol.push_back(r.final_holdout[0]);
        ini_sup.push_back(r.ini_support[0]);
        ini_hol.push_back(r.ini_holdout[0]);
        summary.per_seed.push_back(std::move(r));
    }
    summary.mean_final_support = mean_of(fin_sup);
    summary.std_final_support = std_of(fin_sup);
    summary.mean_final_holdout = mean_of(fin_hol);
    summary.std_final_holdout = std_of(fin_hol);
    summary.mean_ini_support = mean_of(ini_sup);
    summary.mean_ini_holdout = mean_of(ini_hol);

    if (!spec.outdir.empty()) {
        std::filesystem::create_directories(spec.outdir);
        for (const auto& r : summary.per_seed) {
            write_trace_csv(spec.outdir + "/trace_seed" + std::to_string(r.seed) + ".csv",
                            r.trace);
        }
        std::ofstream out(spec.outdir + "/summary.json");
        if (!out) throw std::runtime_error("cannot write summary.json under " + spec.outdir);
        out << summary_to_json(summary, spec).dump(2) << '\n';
    }
    return summary;
}

CompareTable compare(const std::vector<ExperimentSpec>& specs) {
    if (specs.empty()) throw std::invalid_argument("compare: no specs");
    for (const auto& spec : specs) {
        if (spec.budget != specs.front().budget) {
            throw std::invalid_argument("compare: all specs must share one budget");
        }
        if (spec.scenario != specs.front().scenario) {
            throw std::invalid_argument("compare: all specs must share one scenario");
        }
    }

    CompareTable table;
    table.budget = specs.front().budget;
    for (const auto& spec : specs) {
        const RunSummary summary = run_experiment(spec);
        std::vector<std::vector<double>> series; // [seed][query]
        for (const auto& r : summary.per_seed) {
            std::vector<double> s = r.trace.raw_best_at_query;
            if (s.empty()) {
                // ini/opt never query; show them as a flat reference line.
                s.assign(table.budget, r.final_support[0]);
            }
            s.resize(table.budget, s.back());
            series.push_back(std::move(s));
        }
        std::vector<double> mean(table.budget), stddev(table.budget);
        std::vector<double> col(series.size());
        for (std::size_t q = 0; q < table.budget; ++q) {
            for (std::size_t s = 0; s < series.size(); ++s) col[s] = series[s][q];
            mean[q] = mean_of(col);
            stddev[q] = std_of(col);
        }
        table.labels.push_back(to_string(spec.method));
        table.mean.push_back(std::move(mean));
        table.stddev.push_back(std::move(stddev));
    }
    return table;
}

void write_compare_csv(const CompareTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "query";
    for (const auto& label : table.labels) out << ',' << label << "_mean," << label << "_std";
    out << '\n';
    for (std::size_t q = 0; q < table.budget; ++q) {
        out << (q + 1);
        for (std::size_t m = 0; m < table.labels.size(); ++m) {
            out << ',' << format_double(table.mean[m][q]) << ','
                << format_double(table.stddev[m][q]);
        }
        out << '\n';
    }
}

namespace {

void apply_json(ExperimentSpec& spec, const json& j) {
    if (j.contains("scenario")) spec.scenario = j.at("scenario").get<std::string>();
    if (j.contains("method")) spec.method = method_from_string(j.at("method").get<std::string>());
    if (j.contains("budget")) spec.budget = j.at("budget").get<std::size_t>();
    if (j.contains("batch")) spec.batch = j.at("batch").get<std::size_t>();
    if (j.contains("sigma")) spec.sigma = j.at("sigma").get<double>();
    if (j.contains("eta")) spec.eta = j.at("eta").get<double>();
    if (j.contains("unit")) spec.unit = j.at("unit").get<std::size_t>();
    if (j.contains("beta")) spec.beta = j.at("beta").get<double>();
    if (j.contains("gamma")) spec.gamma = j.at("gamma").get<double>();
    if (j.contains("rho")) spec.rho = j.at("rho").get<double>();
    if (j.contains("improvement_scale")) {
        spec.improvement_scale = j.at("improvement_scale").get<double>();
    }
    if (j.contains("decimals")) spec.decimals = j.at("decimals").get<int>();
    if (j.contains("split_fraction")) spec.split_fraction = j.at("split_fraction").get<double>();
    if (j.contains("seeds")) spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("outdir")) spec.outdir = j.at("outdir").get<std::string>();
    if (j.contains("hidden")) spec.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    if (j.contains("tunable")) spec.tunable = j.at("tunable").get<std::string>();
    if (j.contains("per_class")) {
        const auto n = j.at("per_class").get<std::size_t>();
        spec.source.per_class = spec.target.per_class = n;
        spec.blobs_source.per_class = spec.blobs_target.per_class = n;
    }
    if (j.contains("source_variance")) {
        const auto v = j.at("source_variance").get<std::vector<double>>();
        if (v.size() != 2) throw std::invalid_argument("source_variance needs two entries");
        spec.source.variance = {v[0], v[1]};
        spec.blobs_source.variance = {v[0], v[1]};
    }
    if (j.contains("target_variance")) {
        const auto v = j.at("target_variance").get<std::vector<double>>();
        if (v.size() != 2) throw std::invalid_argument("target_variance needs two entries");
        spec.target.variance = {v[0], v[1]};
        spec.blobs_target.variance = {v[0], v[1]};
    }
    if (j.contains("source_mean")) {
        const auto v = j.at("source_mean").get<std::vector<double>>();
        if (v.size() != 2) throw std::invalid_argument("source_mean needs two entries");
        spec.source.mean1 = {v[0], v[1]};
        spec.source.mean0 = {-v[0], -v[1]};
    }
    if (j.contains("target_mean")) {
        const auto v = j.at("target_mean").get<std::vector<double>>();
        if (v.size() != 2) throw std::invalid_argument("target_mean needs two entries");
        spec.target.mean1 = {v[0], v[1]};
        spec.target.mean0 = {-v[0], -v[1]};
    }
    if (j.contains("bias_correlation")) {
        spec.bias_correlation = j.at("bias_correlation").get<double>();
    }
    if (j.contains("target_bias_correlation")) {
        spec.target_bias_correlation = j.at("target_bias_correlation").get<double>();
    }
    if (j.contains("sensitive_strength")) {
        spec.sensitive_strength = j.at("sensitive_strength").get<double>();
    }
    if (j.contains("classes")) {
        spec.blobs_source.classes = spec.blobs_target.classes = j.at("classes").get<std::size_t>();
    }
    if (j.contains("metric")) {
        const std::string name = j.at("metric").get<std::string>();
        if (name == "accuracy") {
            spec.metric = MetricSpec::accuracy();
        } else if (name == "pearson") {
            spec.metric = MetricSpec::pearson();
        } else if (name.rfind("top", 0) == 0) {
            spec.metric = MetricSpec::top_k(std::stoi(name.substr(3)));
        } else if (name == "fair") {
            spec.metric = MetricSpec::tuple_of(
                {MetricSpec::accuracy(), MetricSpec::demographic_parity()});
        } else {
            throw std::invalid_argument("unknown metric '" + name + "'");
        }
    }
    if (j.contains("csv_source")) spec.csv_source_path = j.at("csv_source").get<std::string>();
    if (j.contains("csv_target")) spec.csv_target_path = j.at("csv_target").get<std::string>();
    if (j.contains("csv_columns")) {
        for (const auto& [col, role] : j.at("csv_columns").items()) {
            const std::string r = role.get<std::string>();
            ColumnRole parsed;
            if (r == "numeric") parsed = ColumnRole::numeric;
            else if (r == "categorical") parsed = ColumnRole::categorical;
            else if (r == "label") parsed = ColumnRole::label;
            else if (r == "sensitive") parsed = ColumnRole::sensitive;
            else if (r == "ignore") parsed = ColumnRole::ignore;
            else throw std::invalid_argument("unknown column role '" + r + "'");
            spec.csv_schema.roles[col] = parsed;
        }
    }
    if (j.contains("regression_label")) {
        spec.csv_schema.regression_label = j.at("regression_label").get<bool>();
    }
    if (j.contains("pretrain_epochs")) {
        spec.pretrain_cfg.epochs = j.at("pretrain_epochs").get<std::size_t>();
    }
    if (j.contains("pretrain_lr")) spec.pretrain_cfg.learning_rate = j.at("pretrain_lr").get<double>();
    if (j.contains("opt_epochs")) spec.opt_cfg.epochs = j.at("opt_epochs").get<std::size_t>();
    if (j.contains("opt_lr")) spec.opt_cfg.learning_rate = j.at("opt_lr").get<double>();
}

} // namespace

ExperimentSpec spec_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw std::invalid_argument("config " + path + " is not valid JSON");
    ExperimentSpec spec;
    apply_json(spec, j);
    return spec;
}

void apply_json_overrides(ExperimentSpec& spec, const std::string& json_text) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw std::invalid_argument("override text is not valid JSON");
    apply_json(spec, j);
}

} // namespace feedtune
