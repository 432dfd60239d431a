#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "feedtune/nes.hpp"

using namespace feedtune;

namespace {

ParameterVector pv(std::initializer_list<double> xs) {
    return ParameterVector(std::vector<double>(xs));
}

SampleBatch batch_from_noises(std::vector<std::vector<double>> half,
                              const ParameterVector& mean, double sigma) {
    SampleBatch batch;
    batch.sigma = sigma;
    batch.antithetic = true;
    const std::size_t b = 2 * half.size();
    batch.noises.resize(b);
    for (std::size_t j = 0; j < half.size(); ++j) {
        std::vector<double> neg(half[j].size());
        for (std::size_t d = 0; d < neg.size(); ++d) neg[d] = -half[j][d];
        batch.noises[j] = half[j];
        batch.noises[b - 1 - j] = std::move(neg);
    }
    for (const auto& eps : batch.noises) {
        batch.candidates.push_back(axpy(mean, sigma, ParameterVector(eps)));
    }
    return batch;
}

} // namespace

TEST_CASE("draw_batch produces exact antithetic pairs") {
    SeededRng rng(3);
    const SampleBatch batch = draw_batch(SearchDistribution(pv({0, 0}), 1.0), 2, rng);
    REQUIRE(batch.batch_size() == 2);
    for (std::size_t d = 0; d < 2; ++d) {
        CHECK(batch.noises[1][d] == -batch.noises[0][d]);
        // candidates mirror about the mean exactly
        CHECK(batch.candidates[0][d] + batch.candidates[1][d] == 0.0);
    }
}

TEST_CASE("sigma must be positive") {
    CHECK_THROWS_AS(SearchDistribution(pv({1, 1}), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(SearchDistribution(pv({1, 1}), -0.5), std::invalid_argument);
}

TEST_CASE("six antithetic noises sum to exactly zero") {
    SeededRng rng(11);
    const SampleBatch batch = draw_batch(SearchDistribution(pv({2, -1, 0.5}), 0.7), 6, rng);
    for (std::size_t d = 0; d < 3; ++d) {
        // pairwise cancellation is exact; accumulate pair by pair
        double sum = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            sum += batch.noises[j][d] + batch.noises[5 - j][d];
        }
        CHECK(sum == 0.0);
    }
}

TEST_CASE("odd batch sizes are rejected") {
    SeededRng rng(1);
    CHECK_THROWS_AS(draw_batch(SearchDistribution(pv({0}), 1.0), 3, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(draw_batch(SearchDistribution(pv({0}), 1.0), 0, rng),
                    std::invalid_argument);
}

TEST_CASE("candidates equal mean plus sigma times noise") {
    SeededRng rng(19);
    const ParameterVector mean = pv({0.3, -0.7, 1.1});
    const SampleBatch batch = draw_batch(SearchDistribution(mean, 0.25), 4, rng);
    for (std::size_t i = 0; i < 4; ++i) {
        const ParameterVector expect = axpy(mean, 0.25, ParameterVector(batch.noises[i]));
        CHECK(batch.candidates[i] == expect);
    }
    // pairwise candidate sums hit 2*mean exactly
    for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t d = 0; d < 3; ++d) {
            CHECK(batch.candidates[j][d] + batch.candidates[3 - j][d] == 2.0 * mean[d]);
        }
    }
}

TEST_CASE("normalize_feedbacks closed-form cases") {
    const auto n = normalize_feedbacks({2, 4, 6});
    CHECK(n[0] == doctest::Approx(-1.2247448714).epsilon(1e-9));
    CHECK(n[1] == doctest::Approx(0.0));
    CHECK(n[2] == doctest::Approx(1.2247448714).epsilon(1e-9));

    CHECK(normalize_feedbacks({5, 5, 5, 5}) == std::vector<double>{0, 0, 0, 0});
    CHECK(normalize_feedbacks({1, -1}) == std::vector<double>{1, -1});
    CHECK_THROWS_AS(normalize_feedbacks({1}), std::invalid_argument);
    CHECK_THROWS_AS(normalize_feedbacks({1, std::nan("")}), std::invalid_argument);
}

TEST_CASE("normalization is idempotent on non-degenerate input") {
    SeededRng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> scores(3 + rng.next_below(20));
        for (double& s : scores) s = 5.0 * rng.next_gaussian();
        const auto once = normalize_feedbacks(scores);
        const auto twice = normalize_feedbacks(once);
        for (std::size_t i = 0; i < once.size(); ++i) {
            CHECK(twice[i] == doctest::Approx(once[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("normalization removes shift and positive scale") {
    const std::vector<double> raw = {0.25, 0.5, 1.0, -0.75};
    const auto base = normalize_feedbacks(raw);

    std::vector<double> shifted = raw, scaled = raw;
    for (double& s : shifted) s += 3.0;
    for (double& s : scaled) s *= 4.0; // power of two: exact in floating point
    const auto n_shift = normalize_feedbacks(shifted);
    const auto n_scale = normalize_feedbacks(scaled);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        CHECK(n_shift[i] == doctest::Approx(base[i]).epsilon(1e-12));
        CHECK(n_scale[i] == base[i]);
    }
}

TEST_CASE("estimate_gradient closed forms") {
    const SampleBatch batch =
        batch_from_noises({{1.0, 0.0}}, ParameterVector::zeros(2), 1.0);
    // noises are (1,0) and (-1,0); scores (1,-1) -> (1/2)(e1 + e1) = e1
    CHECK(estimate_gradient(batch, {1, -1}, 1.0) == pv({1, 0}));
    CHECK(estimate_gradient(batch, {0, 0}, 1.0) == pv({0, 0}));
    CHECK_THROWS_AS(estimate_gradient(batch, {1, 2, 3}, 1.0), dimension_mismatch_error);
    CHECK_THROWS_AS(estimate_gradient(batch, {1, std::nan("")}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(estimate_gradient(batch, {1, -1}, 0.0), std::invalid_argument);
}

// Analytic oracle: E(theta) = -||theta - (3,3)||^2 has gradient (6,6) at the
// origin. The 100-seed averaged estimate must align with it.
TEST_CASE("estimate_gradient tracks the analytic gradient") {
    const ParameterVector theta0 = ParameterVector::zeros(2);
    const ParameterVector truth = pv({6, 6});
    auto score = [](const ParameterVector& th) {
        return -((th[0] - 3) * (th[0] - 3) + (th[1] - 3) * (th[1] - 3));
    };
    SeededRng rng(31);
    ParameterVector avg = ParameterVector::zeros(2);
    const int rounds = 100;
    for (int r = 0; r < rounds; ++r) {
        const SampleBatch batch = draw_batch(SearchDistribution(theta0, 1e-3), 40, rng);
        std::vector<double> scores(40);
        for (std::size_t i = 0; i < 40; ++i) scores[i] = score(batch.candidates[i]);
        avg = axpy(avg, 1.0 / rounds, estimate_gradient(batch, normalize_feedbacks(scores), 1e-3));
    }
    const double cosine = dot(avg, truth) / (norm(avg) * norm(truth));
    CHECK(cosine >= 0.95);
}

TEST_CASE("gradient direction ignores raw-score shift and scale") {
    SeededRng rng(37);
    const SampleBatch batch = draw_batch(SearchDistribution(ParameterVector::zeros(6), 0.5), 8, rng);
    std::vector<double> raw(8);
    for (double& s : raw) s = rng.next_gaussian();
    const auto g0 = estimate_gradient(batch, normalize_feedbacks(raw), 0.5);

    std::vector<double> affine = raw;
    for (double& s : affine) s = 2.0 * s + 7.0;
    const auto g1 = estimate_gradient(batch, normalize_feedbacks(affine), 0.5);
    for (std::size_t d = 0; d < 6; ++d) {
        CHECK(g1[d] == doctest::Approx(g0[d]).epsilon(1e-12));
    }
}

TEST_CASE("antithetic candidate sums recover the mean") {
    SeededRng rng(41);
    const ParameterVector mean = pv({1.5, -2.5, 0.25, 8.0});
    const SampleBatch batch = draw_batch(SearchDistribution(mean, 2.0), 10, rng);
    for (std::size_t d = 0; d < mean.size(); ++d) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
            sum += batch.candidates[j][d] + batch.candidates[9 - j][d];
        }
        CHECK(sum == doctest::Approx(10.0 * mean[d]).epsilon(1e-12));
    }
}

TEST_CASE("projection diagnostic is exactly 1 on a complete scaled basis") {
    const std::size_t dim = 4;
    std::vector<std::vector<double>> half;
    for (std::size_t i = 0; i < dim; ++i) {
        std::vector<double> e(dim, 0.0);
        e[i] = 2.5;
        half.push_back(std::move(e));
    }
    const SampleBatch batch = batch_from_noises(half, ParameterVector::zeros(dim), 1.0);
    const ParameterVector grad = pv({0.3, -1.2, 0.7, 2.2});
    const auto diag = projection_diagnostic(grad, batch, 0.5);
    CHECK(diag.projection_matrix_norm_ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(diag.cosine_to_true == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("projection diagnostic contract errors") {
    SeededRng rng(2);
    const SampleBatch batch = draw_batch(SearchDistribution(ParameterVector::zeros(3), 1.0), 4, rng);
    CHECK_THROWS_AS(projection_diagnostic(ParameterVector::zeros(3), batch, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(projection_diagnostic(pv({1, 0, 0}), batch, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(projection_diagnostic(pv({1, 0, 0}), batch, 1.0), std::invalid_argument);
}

// Monte-Carlo oracle over fresh Gaussian batches: concentration inside
// (1 - xi, 1 + xi) improves with b, and an exponential-in-b bound fitted on
// the smallest batch keeps holding above it.
TEST_CASE("projected-norm concentration improves with batch size") {
    const std::size_t dim = 200;
    const double xi = 0.5;
    SeededRng rng(53);
    std::vector<double> gvec(dim);
    fill_gaussian(rng, gvec);
    const ParameterVector grad(gvec);

    std::vector<std::size_t> batches = {8, 16, 32, 64};
    std::vector<double> fractions;
    std::size_t positive_cosine = 0, trials_total = 0;
    for (const std::size_t b : batches) {
        std::size_t inside = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const SampleBatch batch =
                draw_batch(SearchDistribution(ParameterVector::zeros(dim), 1.0), b, rng);
            const auto diag = projection_diagnostic(grad, batch, xi);
            if (diag.projection_matrix_norm_ratio > 1.0 - xi &&
                diag.projection_matrix_norm_ratio < 1.0 + xi) {
                ++inside;
            }
            if (diag.cosine_to_true > 0.0) ++positive_cosine;
            ++trials_total;
            CHECK(diag.cosine_to_true <= 1.0);
            CHECK(diag.cosine_to_true >= -1.0);
        }
        fractions.push_back(static_cast<double>(inside) / 1000.0);
    }
    CHECK(std::is_sorted(fractions.begin(), fractions.end()));

    // The largest C for which 1 - 2 exp(-C xi^2 b) stays below every
    // measured fraction; it must be strictly positive and the resulting
    // bound must hold across the whole batch range.
    double c_hat = 1e9;
    for (std::size_t i = 0; i < batches.size(); ++i) {
        c_hat = std::min(c_hat, -std::log((1.0 - fractions[i]) / 2.0) /
                                    (xi * xi * static_cast<double>(batches[i])));
    }
    CHECK(c_hat > 0.0);
    for (std::size_t i = 0; i < batches.size(); ++i) {
        const double bound =
            1.0 - 2.0 * std::exp(-c_hat * xi * xi * static_cast<double>(batches[i]));
        CHECK(fractions[i] >= bound);
    }

    // Ascent needs positive correlation with the truth; the pairwise
    // projection sum makes it structural.
    CHECK(static_cast<double>(positive_cosine) / static_cast<double>(trials_total) >= 0.99);
}
