#pragma once

#include <cstddef>
#include <vector>

#include "feedtune/param.hpp"
#include "feedtune/rng.hpp"

namespace feedtune {

/// Isotropic Gaussian search distribution over parameters: N(mean, sigma^2 I).
struct SearchDistribution {
    ParameterVector mean;
    double sigma = 0.0;

    SearchDistribution(ParameterVector m, double s) : mean(std::move(m)), sigma(s) {
        if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
    }
};

/// One antithetic sampling round: b noise directions (second half the exact
/// negation of the first, reversed order) and the b candidate vectors
/// mean + sigma * noise.
struct SampleBatch {
    std::vector<std::vector<double>> noises;
    std::vector<ParameterVector> candidates;
    double sigma = 0.0;
    bool antithetic = true;

    std::size_t batch_size() const { return noises.size(); }
};

/// i.i.d. standard-normal noise vectors, `half_batch` of them, `dim` each.
/// Every vector is filled from its own child stream, so the result is
/// identical whether the fill runs serial or OpenMP-parallel.
std::vector<std::vector<double>> gaussian_batch(SeededRng& rng, std::size_t dim,
                                                std::size_t half_batch);

/// Single-threaded reference with the same child-stream scheme; kept for the
/// kernel-equivalence tests and the benchmark.
std::vector<std::vector<double>> gaussian_batch_serial(SeededRng& rng, std::size_t dim,
                                                       std::size_t half_batch);

/// Antithetic batch of even size b around dist.mean.
SampleBatch draw_batch(const SearchDistribution& dist, std::size_t b, SeededRng& rng);

/// Subtract mean, divide by population standard deviation. A constant batch
/// carries no directional information and comes back as all zeros.
std::vector<double> normalize_feedbacks(const std::vector<double>& scores);

/// (1 / (sigma * b)) * sum_i scores[i] * noises[i]. Scores are expected to be
/// normalized already; the fold runs in fixed index order per coordinate so
/// the result does not depend on evaluation completion order.
ParameterVector estimate_gradient(const SampleBatch& batch,
                                  const std::vector<double>& normalized_scores, double sigma);

struct GradientDiagnostics {
    /// ||M^T grad||^2 / (||grad||^2 * normalizer) where M has columns
    /// ||eps_i|| * eps_i and the normalizer (sum_i ||eps_i||^4 / dim) makes a
    /// complete uniformly-scaled orthonormal basis score exactly 1.
    double projection_matrix_norm_ratio = 0.0;
    /// Cosine between (2/b) * sum_i <grad, eps_i> eps_i and grad.
    double cosine_to_true = 0.0;
    double xi = 0.0;
};

/// How much of the true gradient a batch's random projection preserves.
GradientDiagnostics projection_diagnostic(const ParameterVector& true_grad,
                                          const SampleBatch& batch, double xi);

} // namespace feedtune
