#include "feedtune/nes.hpp"

#include <cmath>
#include <stdexcept>

namespace feedtune {

namespace {

std::vector<std::vector<double>> batch_from_children(std::vector<SeededRng>& children,
                                                     std::size_t dim, bool parallel) {
    std::vector<std::vector<double>> out(children.size());
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(children.size()); ++i) {
        auto& vec = out[static_cast<std::size_t>(i)];
        vec.resize(dim);
        fill_gaussian(children[static_cast<std::size_t>(i)], vec);
    }
    return out;
}

std::vector<SeededRng> make_children(SeededRng& rng, std::size_t half_batch) {
    std::vector<SeededRng> children;
    children.reserve(half_batch);
    for (std::size_t i = 0; i < half_batch; ++i) children.push_back(rng.split());
    return children;
}

} // namespace

std::vector<std::vector<double>> gaussian_batch(SeededRng& rng, std::size_t dim,
                                                std::size_t half_batch) {
    if (dim < 1 || half_batch < 1) {
        throw std::invalid_argument("gaussian_batch: dim and half_batch must be >= 1");
    }
    auto children = make_children(rng, half_batch);
    return batch_from_children(children, dim, true);
}

std::vector<std::vector<double>> gaussian_batch_serial(SeededRng& rng, std::size_t dim,
                                                       std::size_t half_batch) {
    if (dim < 1 || half_batch < 1) {
        throw std::invalid_argument("gaussian_batch: dim and half_batch must be >= 1");
    }
    auto children = make_children(rng, half_batch);
    return batch_from_children(children, dim, false);
}

SampleBatch draw_batch(const SearchDistribution& dist, std::size_t b, SeededRng& rng) {
    if (b < 2 || b % 2 != 0) {
        throw std::invalid_argument("draw_batch: batch size must be even and >= 2");
    }
    const std::size_t half = b / 2;
    const std::size_t dim = dist.mean.size();

    SampleBatch batch;
    batch.sigma = dist.sigma;
    batch.antithetic = true;
    batch.noises.resize(b);

    auto fresh = gaussian_batch(rng, dim, half);
    for (std::size_t j = 0; j < half; ++j) {
        batch.noises[j] = std::move(fresh[j]);
        // eps_{b-j+1} = -eps_j (1-indexed): exact bitwise negation.
        std::vector<double> neg(dim);
        for (std::size_t d = 0; d < dim; ++d) neg[d] = -batch.noises[j][d];
        batch.noises[b - 1 - j] = std::move(neg);
    }

    batch.candidates.reserve(b);
    for (std::size_t i = 0; i < b; ++i) {
        batch.candidates.push_back(
            axpy(dist.mean, dist.sigma, ParameterVector(batch.noises[i])));
    }
    return batch;
}

std::vector<double> normalize_feedbacks(const std::vector<double>& scores) {
    const std::size_t n = scores.size();
    if (n < 2) throw std::invalid_argument("normalize_feedbacks: need at least 2 scores");
    double mean = 0.0;
    for (double s : scores) {
        if (!std::isfinite(s)) throw std::invalid_argument("normalize_feedbacks: non-finite score");
        mean += s;
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    var /= static_cast<double>(n);
    if (var == 0.0) {
        return std::vector<double>(n, 0.0);
    }
    const double inv_std = 1.0 / std::sqrt(var);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (scores[i] - mean) * inv_std;
    return out;
}

ParameterVector estimate_gradient(const SampleBatch& batch,
                                  const std::vector<double>& normalized_scores, double sigma) {
    const std::size_t b = batch.batch_size();
    if (normalized_scores.size() != b) {
        throw dimension_mismatch_error("estimate_gradient: scores/noises length mismatch");
    }
    for (double s : normalized_scores) {
        if (!std::isfinite(s)) throw std::invalid_argument("estimate_gradient: non-finite score");
    }
    if (!(sigma > 0.0)) throw std::invalid_argument("estimate_gradient: sigma must be > 0");
    const std::size_t dim = b == 0 ? 0 : batch.noises[0].size();
    std::vector<double> grad(dim, 0.0);
    const double scale = 1.0 / (sigma * static_cast<double>(b));
#pragma omp parallel for schedule(static) if (dim > 2048)
    for (std::ptrdiff_t d = 0; d < static_cast<std::ptrdiff_t>(dim); ++d) {
        double acc = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            acc += normalized_scores[i] * batch.noises[i][static_cast<std::size_t>(d)];
        }
        grad[static_cast<std::size_t>(d)] = acc * scale;
    }
    return ParameterVector(std::move(grad));
}

GradientDiagnostics projection_diagnostic(const ParameterVector& true_grad,
                                          const SampleBatch& batch, double xi) {
    if (!batch.antithetic || batch.batch_size() < 2) {
        throw std::invalid_argument("projection_diagnostic: antithetic batch required");
    }
    if (!(xi > 0.0 && xi < 1.0)) {
        throw std::invalid_argument("projection_diagnostic: xi must lie in (0,1)");
    }
    const double g2 = dot(true_grad, true_grad);
    if (g2 == 0.0) throw std::invalid_argument("projection_diagnostic: zero true gradient");

    const std::size_t half = batch.batch_size() / 2;
    const std::size_t dim = true_grad.size();

    double mt_norm2 = 0.0;   // ||M^T grad||^2, columns ||eps|| * eps
    double normalizer = 0.0; // sum ||eps||^4 / dim
    std::vector<double> proj(dim, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        const auto& eps = batch.noises[i];
        if (eps.size() != dim) {
            throw dimension_mismatch_error("projection_diagnostic: gradient/noise dim mismatch");
        }
        double e2 = 0.0, ge = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            e2 += eps[d] * eps[d];
            ge += true_grad[d] * eps[d];
        }
        mt_norm2 += e2 * ge * ge;
        normalizer += e2 * e2;
        for (std::size_t d = 0; d < dim; ++d) proj[d] += ge * eps[d];
    }
    normalizer /= static_cast<double>(dim);

    double p2 = 0.0, pg = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        p2 += proj[d] * proj[d];
        pg += proj[d] * true_grad[d];
    }

    GradientDiagnostics diag;
    diag.xi = xi;
    diag.projection_matrix_norm_ratio = mt_norm2 / (g2 * normalizer);
    diag.cosine_to_true = p2 == 0.0 ? 0.0 : pg / std::sqrt(p2 * g2);
    return diag;
}

} // namespace feedtune
