#pragma once

#include <cstdint>
#include <vector>

#include "feedtune/nes.hpp"

namespace feedtune {

/// Estimator quality numbers on a known quadratic/linear landscape.
struct EstimatorDiagnostics {
    std::size_t dim = 0;
    std::size_t batch = 0;
    double sigma = 0.0;
    /// Cosine between the 100-batch-averaged estimate and the true gradient.
    double mean_estimate_cosine = 0.0;
    /// Worst relative error of the paired antithetic estimator on a linear
    /// function (exact up to rounding).
    double antithetic_linear_residual = 0.0;
    std::vector<std::size_t> concentration_batches;
    /// Fraction of trials with the projected-norm ratio inside (1-xi, 1+xi).
    std::vector<double> concentration_fraction;
    double xi = 0.5;
    /// C fitted from the smallest batch via frac = 1 - 2 exp(-C xi^2 b).
    double fitted_c_hat = 0.0;
};

EstimatorDiagnostics run_estimator_diagnostics(std::uint64_t seed);

/// Adversarial multi-armed simulation of the importance scheduler against
/// the hindsight-best arm, wired through the same ledger the optimizer uses.
struct RegretDiagnostics {
    std::size_t arms = 0;
    std::size_t horizon = 0;
    std::size_t seeds_checked = 0;
    std::size_t bound_violations = 0;
    double beta_used = 0.0;
    double worst_slack = 0.0; // min over seeds of bound - measured regret
};

RegretDiagnostics run_regret_diagnostics(std::uint64_t seed, std::size_t seeds = 100);

} // namespace feedtune
