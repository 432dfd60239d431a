#pragma once

#include <cstdint>

#include "feedtune/channel.hpp"
#include "feedtune/param.hpp"
#include "feedtune/trace.hpp"

namespace feedtune {

/// Batch-size heuristic 4 + floor(3 ln |theta|), rounded up to even so the
/// batch can be antithetic.
std::size_t default_batch_size(std::size_t dim);

struct PpsConfig {
    std::size_t budget = 0;     // Q; 0 means "whatever the channel has left"
    double learning_rate = 1.0; // eta
    std::size_t batch_size = 0; // b; 0 picks the dimension heuristic
    double sigma = 0.1;
    int decimals = -1; // holder-side feedback precision this run assumes (informational)
    std::uint64_t seed = 0;
    bool higher_is_better = true;
};

struct FairnessConfig : PpsConfig {
    double rho = 0.4; // accuracy weight in the rho*E - Gamma objective
};

struct OptimResult {
    ParameterVector best;
    RunTrace trace;
};

/// Performance-guided parameter search: antithetic Gaussian sampling around
/// the iterate, z-normalized feedback, plain gradient ascent. theta0 itself
/// is evaluated first (1 query); each iteration spends exactly b queries and
/// the loop stops once a full batch no longer fits in the budget. Returns the
/// best evaluated candidate (ties to the earliest); the final iterate is kept
/// in the trace.
OptimResult pps_run(const ParameterVector& theta0, FeedbackChannel& channel,
                    const PpsConfig& cfg);

/// Fairness variant over an (accuracy, discrimination) channel: both streams
/// are z-normalized independently, the update ascends rho*E - Gamma, and the
/// best candidate is picked by the raw combined objective.
OptimResult fairness_pps_run(const ParameterVector& theta0, FeedbackChannel& channel,
                             const FairnessConfig& cfg);

/// Baseline: independent perturbations theta0 + sigma*eps, never recentered,
/// best evaluated candidate wins (theta0 included).
OptimResult random_search(const ParameterVector& theta0, FeedbackChannel& channel,
                          std::size_t budget, double sigma, std::uint64_t seed,
                          bool higher_is_better = true);

} // namespace feedtune
