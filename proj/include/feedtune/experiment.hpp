#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "feedtune/channel.hpp"
#include "feedtune/datasets.hpp"
#include "feedtune/lcps.hpp"
#include "feedtune/metrics.hpp"
#include "feedtune/mlp.hpp"
#include "feedtune/oracle.hpp"
#include "feedtune/pps.hpp"
#include "feedtune/train.hpp"

namespace feedtune {

enum class Method { ini, opt, rs, pps, lcps, fair_pps };

Method method_from_string(const std::string& name);
std::string to_string(Method method);

/// One fully described experiment: scenario data, model, metric, tuning
/// method and its knobs, seeds, output location. Everything is validated
/// before a single query is spent.
struct ExperimentSpec {
    ExperimentSpec() {
        // Variance-shifted target; the class means move toward the
        // low-variance axis so the shift actually bites the deployed model.
        target.variance = {0.1, 1.5};
        target.mean1 = {0.4, 0.45};
        target.mean0 = {-0.4, -0.45};
    }

    std::string scenario = "toy"; // toy | biased | multiclass | csv
    Method method = Method::pps;

    // toy / biased / multiclass dataset knobs
    TwoGaussiansSpec source;
    TwoGaussiansSpec target;
    // The deployed model learns the sensitive shortcut from a strongly
    // correlated source; on the target the correlation is weak, so dropping
    // the shortcut helps accuracy and parity at once.
    double bias_correlation = 0.8;
    double target_bias_correlation = 0.15;
    double sensitive_strength = 2.0;
    GaussianBlobsSpec blobs_source;
    GaussianBlobsSpec blobs_target;

    // csv scenario
    std::string csv_source_path;
    std::string csv_target_path;
    CsvSchema csv_schema;

    std::vector<std::size_t> hidden = {16, 80};
    std::string tunable = "last"; // last | all

    MetricSpec metric = MetricSpec::accuracy();

    std::size_t budget = 80;
    std::size_t batch = 0; // 0 = dimension heuristic
    double sigma = 0.3;
    double eta = 0.25;
    std::size_t unit = 2;
    double beta = 1.0;
    double gamma = 0.0;
    double rho = 0.4;
    double improvement_scale = 1.0;
    int decimals = -1;
    double split_fraction = 0.5;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::string outdir; // empty = keep results in memory only

    TrainConfig pretrain_cfg{200, 0.5};
    TrainConfig opt_cfg{200, 0.5};

    // Remote mode: tune against a served oracle instead of in-process.
    std::string connect_host;
    std::uint16_t connect_port = 0;
};

/// Everything the holder needs for one seed: the deployed model, the tunable
/// surface, the target splits, and the metric. Derivation is deterministic in
/// (spec, seed), which is what makes served and in-process runs agree.
struct HolderSetup {
    MlpModel ini_model;
    TunableSelection selection;
    LabeledDataset support;
    LabeledDataset holdout;
    MetricSpec metric;
};

HolderSetup build_holder(const ExperimentSpec& spec, std::uint64_t seed);

struct SeedResult {
    std::uint64_t seed = 0;
    ScoreTuple ini_support, ini_holdout;
    ScoreTuple final_support, final_holdout;
    std::size_t queries_spent = 0;
    RunTrace trace;
    std::vector<std::uint64_t> layer_queries_total;
    std::vector<std::uint64_t> layer_queries_stage2;
    bool has_regret = false;
    double g_max = 0.0;
    double g_lcps = 0.0;
    double regret = 0.0;
    double regret_bound_value = 0.0;
};

struct RunSummary {
    std::string scenario;
    Method method = Method::ini;
    std::size_t budget = 0;
    std::vector<SeedResult> per_seed;
    double mean_ini_support = 0.0, mean_ini_holdout = 0.0;
    double mean_final_support = 0.0, std_final_support = 0.0;
    double mean_final_holdout = 0.0, std_final_holdout = 0.0;
};

/// Runs every seed (pretrain, split, tune, final report), writes per-seed
/// trace CSVs and a summary JSON when outdir is set, and returns the summary.
RunSummary run_experiment(const ExperimentSpec& spec);

/// Best-so-far primary score aligned on a common 1..Q query grid,
/// mean +- std over seeds, one column pair per spec.
struct CompareTable {
    std::size_t budget = 0;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> mean;   // [spec][query]
    std::vector<std::vector<double>> stddev; // [spec][query]
};

CompareTable compare(const std::vector<ExperimentSpec>& specs);

void write_compare_csv(const CompareTable& table, const std::string& path);

/// JSON config file support; flags are applied on top by the CLI.
ExperimentSpec spec_from_json_file(const std::string& path);
void apply_json_overrides(ExperimentSpec& spec, const std::string& json_text);

} // namespace feedtune
