#pragma once

#include <cstddef>
#include <vector>

#include "feedtune/pps.hpp"

namespace feedtune {

/// Bandit state of the layer scheduler: importance weights alpha, exploration
/// floor gamma, importance step beta. Sampling probabilities follow
/// p_h = (1 - gamma) * softmax(alpha)_h + gamma / H.
struct ImportanceState {
    std::vector<double> alpha;
    std::vector<double> probs;
    double gamma = 0.0;
    double beta = 1.0;

    static ImportanceState uniform(std::size_t layer_count, double gamma, double beta);
};

/// Eq-11 sampling distribution for the given state; softmax is computed with
/// max subtraction so large alphas do not overflow.
std::vector<double> layer_probabilities(const ImportanceState& state);
std::vector<double> layer_probabilities(const std::vector<double>& alpha, double gamma);

/// max{0, mean(unit scores) - e_hat_prev}: how much the unit batch improved
/// on the previously committed model's evaluation.
double average_improvement(const std::vector<double>& unit_scores, double e_hat_prev);

/// alpha_h += beta * improvement (h is 1-based); probabilities recomputed.
ImportanceState update_importance(const ImportanceState& state, std::size_t h,
                                  double improvement, double beta);

/// Regret accounting over one run. Improvements are the re-normalized [0,1]
/// values; g_lcps pairs each iteration's improvements with the stage-2
/// distribution actually used that iteration, g_max takes the hindsight best
/// single layer per iteration.
struct RegretLedger {
    std::size_t layer_count = 0;
    double c = 0.0; // (b - H*u) / u
    std::vector<std::vector<double>> improvements; // [iteration][layer]
    std::vector<std::vector<double>> stage2_probs; // [iteration][layer]

    std::size_t horizon() const { return improvements.size(); }
    double g_max() const;
    double g_lcps() const;
    double measured_regret() const { return g_max() - g_lcps(); }
};

/// Theorem-2 right-hand side: (beta*c*(e-2) + 1) * G_max + (c/beta) * ln H.
/// c == 0 means stage 2 never runs and the bound is meaningless.
double regret_bound(const RegretLedger& ledger, double beta, double c, std::size_t layer_count);

/// Regret-minimizing step from the KKT conditions: sqrt(ln H / ((e-2) G)).
double optimal_beta(std::size_t layer_count, double predicted_gain);

struct LcpsConfig : PpsConfig {
    std::size_t unit_size = 2; // u: queries per unit update, even
    double beta = 1.0;
    double gamma = 0.0;
    /// Metric range used to re-normalize improvements into [0,1] for the
    /// regret ledger; accuracy-like metrics are already in range 1.
    double improvement_scale = 1.0;
    /// Optional per-layer unit sizes; empty means uniform unit_size.
    std::vector<std::size_t> unit_sizes;
};

struct LcpsResult {
    ParameterVector best;
    RunTrace trace;
    RegretLedger ledger;
    ImportanceState importance;
};

/// Layerwise coordinate parameter search. Each iteration runs one u-query
/// antithetic unit update per layer (committing as it goes, one extra query
/// per layer to evaluate the committed model), then reassigns
/// floor((b - H*u)/u) more unit updates by sampling layers from the gamma=0
/// importance distribution.
LcpsResult lcps_run(const ParameterVector& theta0, const LayerPartition& partition,
                    FeedbackChannel& channel, const LcpsConfig& cfg);

} // namespace feedtune
