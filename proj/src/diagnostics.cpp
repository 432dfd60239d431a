#include "feedtune/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "feedtune/lcps.hpp"

namespace feedtune {

EstimatorDiagnostics run_estimator_diagnostics(std::uint64_t seed) {
    EstimatorDiagnostics out;
    out.dim = 200;
    out.batch = 64;
    out.sigma = 1e-3;
    out.xi = 0.5;

    SeededRng rng(seed);
    const std::size_t dim = out.dim;

    // Quadratic E(theta) = -||theta - target||^2 around theta = 0.
    std::vector<double> target(dim);
    fill_gaussian(rng, target);
    ParameterVector theta_star(target);
    ParameterVector theta0 = ParameterVector::zeros(dim);
    ParameterVector true_grad = axpy(ParameterVector::zeros(dim), 2.0, theta_star); // -2(0-t*)

    auto quad = [&](const ParameterVector& theta) {
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = theta[d] - theta_star[d];
            s -= diff * diff;
        }
        return s;
    };

    ParameterVector avg_estimate = ParameterVector::zeros(dim);
    const std::size_t rounds = 100;
    for (std::size_t r = 0; r < rounds; ++r) {
        SampleBatch batch = draw_batch(SearchDistribution(theta0, out.sigma), out.batch, rng);
        std::vector<double> scores(out.batch);
        for (std::size_t i = 0; i < out.batch; ++i) scores[i] = quad(batch.candidates[i]);
        const auto normalized = normalize_feedbacks(scores);
        avg_estimate = axpy(avg_estimate, 1.0 / static_cast<double>(rounds),
                            estimate_gradient(batch, normalized, out.sigma));
    }
    out.mean_estimate_cosine =
        dot(avg_estimate, true_grad) / (norm(avg_estimate) * norm(true_grad));

    // Linear function: the paired antithetic estimator is exact.
    std::vector<double> gvec(dim);
    fill_gaussian(rng, gvec);
    const ParameterVector g(gvec);
    auto linear = [&](const ParameterVector& theta) { return dot(g, theta) + 7.5; };
    SampleBatch batch = draw_batch(SearchDistribution(theta0, 0.5), out.batch, rng);
    double worst = 0.0;
    for (std::size_t j = 0; j < out.batch / 2; ++j) {
        const ParameterVector eps(batch.noises[j]);
        const double paired = (linear(batch.candidates[j]) -
                               linear(batch.candidates[out.batch - 1 - j])) /
                              (2.0 * 0.5);
        const double expect = dot(g, eps);
        worst = std::max(worst, std::abs(paired - expect) / std::max(1.0, std::abs(expect)));
    }
    out.antithetic_linear_residual = worst;

    // Projected-norm concentration across batch sizes.
    out.concentration_batches = {8, 16, 32, 64};
    const std::size_t trials = 1000;
    for (const std::size_t b : out.concentration_batches) {
        std::size_t inside = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            SampleBatch fresh = draw_batch(SearchDistribution(theta0, 1.0), b, rng);
            const auto diag = projection_diagnostic(true_grad, fresh, out.xi);
            if (diag.projection_matrix_norm_ratio > 1.0 - out.xi &&
                diag.projection_matrix_norm_ratio < 1.0 + out.xi) {
                ++inside;
            }
        }
        out.concentration_fraction.push_back(static_cast<double>(inside) /
                                             static_cast<double>(trials));
    }
    // Largest C such that frac_b >= 1 - 2 exp(-C xi^2 b) holds for every
    // tested b.
    double c_hat = 10.0;
    for (std::size_t i = 0; i < out.concentration_batches.size(); ++i) {
        const double f = out.concentration_fraction[i];
        if (f >= 1.0) continue;
        const double b = static_cast<double>(out.concentration_batches[i]);
        c_hat = std::min(c_hat, -std::log((1.0 - f) / 2.0) / (out.xi * out.xi * b));
    }
    out.fitted_c_hat = c_hat;
    return out;
}

RegretDiagnostics run_regret_diagnostics(std::uint64_t seed, std::size_t seeds) {
    RegretDiagnostics out;
    out.arms = 4;
    out.horizon = 50;
    out.seeds_checked = seeds;
    const double predicted_gain = static_cast<double>(out.horizon); // I_h <= 1 per round
    out.beta_used = optimal_beta(out.arms, predicted_gain);
    const double c = 6.0; // a representative (b - H*u)/u for the bound

    bool first = true;
    for (std::size_t s = 0; s < seeds; ++s) {
        SeededRng rng(SeededRng(seed).child(s).next_u64());
        RegretLedger ledger;
        ledger.layer_count = out.arms;
        ledger.c = c;
        ImportanceState state = ImportanceState::uniform(out.arms, 0.0, out.beta_used);
        for (std::size_t t = 0; t < out.horizon; ++t) {
            // Adversarial-ish rewards: the paying arm rotates every 5 rounds,
            // the rest pay noise.
            std::vector<double> improvements(out.arms);
            const std::size_t good = (t / 5) % out.arms;
            for (std::size_t h = 0; h < out.arms; ++h) {
                const double base = h == good ? 0.9 : 0.1;
                improvements[h] = std::clamp(base + 0.05 * rng.next_gaussian(), 0.0, 1.0);
            }
            for (std::size_t h = 1; h <= out.arms; ++h) {
                state = update_importance(state, h, improvements[h - 1], out.beta_used);
            }
            ledger.improvements.push_back(improvements);
            ledger.stage2_probs.push_back(layer_probabilities(state.alpha, 0.0));
        }
        const double bound = regret_bound(ledger, out.beta_used, c, out.arms);
        const double slack = bound - ledger.measured_regret();
        if (slack < 0.0) ++out.bound_violations;
        if (first || slack < out.worst_slack) {
            out.worst_slack = slack;
            first = false;
        }
    }
    return out;
}

} // namespace feedtune
