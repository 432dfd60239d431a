#include "feedtune/pps.hpp"

#include <cmath>
#include <stdexcept>

#include "feedtune/nes.hpp"

namespace feedtune {

namespace {

struct BestTracker {
    double objective = 0.0; // oriented; larger is better
    double raw = 0.0;
    ParameterVector params;
    bool set = false;

    void offer(const ParameterVector& candidate, double oriented, double raw_primary) {
        if (!set || oriented > objective) {
            objective = oriented;
            raw = raw_primary;
            params = candidate;
            set = true;
        }
    }
};

std::size_t effective_budget(std::size_t requested, const FeedbackChannel& channel) {
    const std::size_t avail = channel.remaining();
    if (requested == 0) return avail;
    return requested < avail ? requested : avail;
}

void record_query(RunTrace& trace, const BestTracker& tracker) {
    ++trace.queries_spent;
    trace.objective_at_query.push_back(tracker.objective);
    trace.raw_best_at_query.push_back(tracker.raw);
}

std::size_t resolve_batch(std::size_t requested, std::size_t dim) {
    std::size_t b = requested == 0 ? default_batch_size(dim) : requested;
    if (b < 2 || b % 2 != 0) {
        throw std::invalid_argument("batch size must be even and >= 2");
    }
    return b;
}

} // namespace

std::size_t default_batch_size(std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("default_batch_size: empty parameter vector");
    std::size_t b = 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(static_cast<double>(dim))));
    if (b % 2 != 0) ++b;
    return b;
}

OptimResult pps_run(const ParameterVector& theta0, FeedbackChannel& channel,
                    const PpsConfig& cfg) {
    if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("pps: learning rate must be > 0");
    if (!(cfg.sigma > 0.0)) throw std::invalid_argument("pps: sigma must be > 0");
    const std::size_t b = resolve_batch(cfg.batch_size, theta0.size());
    const std::size_t budget = effective_budget(cfg.budget, channel);
    const double orient = cfg.higher_is_better ? 1.0 : -1.0;

    RunTrace trace;
    trace.final_iterate = theta0;
    BestTracker tracker;
    if (budget < 1) {
        return OptimResult{theta0, std::move(trace)};
    }

    trace.initial_scores = channel.submit(theta0);
    tracker.offer(theta0, orient * trace.initial_scores[0], trace.initial_scores[0]);
    record_query(trace, tracker);

    SeededRng rng(cfg.seed);
    ParameterVector theta = theta0;
    std::size_t iteration = 0;
    std::vector<double> oriented(b);
    while (trace.queries_spent + b <= budget) {
        SampleBatch batch = draw_batch(SearchDistribution(theta, cfg.sigma), b, rng);
        double raw_sum = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            const double raw = channel.submit(batch.candidates[i])[0];
            oriented[i] = orient * raw;
            raw_sum += raw;
            tracker.offer(batch.candidates[i], oriented[i], raw);
            record_query(trace, tracker);
        }
        const auto normalized = normalize_feedbacks(oriented);
        const ParameterVector grad = estimate_gradient(batch, normalized, cfg.sigma);
        theta = axpy(theta, cfg.learning_rate, grad);
        ++iteration;
        trace.rows.push_back(TraceRow{iteration, trace.queries_spent, tracker.raw,
                                      raw_sum / static_cast<double>(b), param_digest(theta)});
    }
    trace.final_iterate = theta;
    return OptimResult{tracker.params, std::move(trace)};
}

OptimResult fairness_pps_run(const ParameterVector& theta0, FeedbackChannel& channel,
                             const FairnessConfig& cfg) {
    if (channel.arity() != 2) {
        throw std::invalid_argument("fairness_pps: channel must return (accuracy, parity) tuples");
    }
    if (!(cfg.rho >= 0.0)) throw std::invalid_argument("fairness_pps: rho must be >= 0");
    if (!(cfg.learning_rate > 0.0)) {
        throw std::invalid_argument("fairness_pps: learning rate must be > 0");
    }
    if (!(cfg.sigma > 0.0)) throw std::invalid_argument("fairness_pps: sigma must be > 0");
    const std::size_t b = resolve_batch(cfg.batch_size, theta0.size());
    const std::size_t budget = effective_budget(cfg.budget, channel);

    RunTrace trace;
    trace.final_iterate = theta0;
    BestTracker tracker;
    if (budget < 1) {
        return OptimResult{theta0, std::move(trace)};
    }

    trace.initial_scores = channel.submit(theta0);
    const double combined0 = cfg.rho * trace.initial_scores[0] - trace.initial_scores[1];
    tracker.offer(theta0, combined0, combined0);
    record_query(trace, tracker);

    SeededRng rng(cfg.seed);
    ParameterVector theta = theta0;
    std::size_t iteration = 0;
    std::vector<double> acc(b), parity(b), combined(b);
    while (trace.queries_spent + b <= budget) {
        SampleBatch batch = draw_batch(SearchDistribution(theta, cfg.sigma), b, rng);
        double combined_sum = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            const ScoreTuple scores = channel.submit(batch.candidates[i]);
            acc[i] = scores[0];
            parity[i] = scores[1];
            const double raw_combined = cfg.rho * acc[i] - parity[i];
            combined_sum += raw_combined;
            tracker.offer(batch.candidates[i], raw_combined, raw_combined);
            record_query(trace, tracker);
        }
        const auto acc_n = normalize_feedbacks(acc);
        const auto parity_n = normalize_feedbacks(parity);
        for (std::size_t i = 0; i < b; ++i) combined[i] = cfg.rho * acc_n[i] - parity_n[i];
        const ParameterVector grad = estimate_gradient(batch, combined, cfg.sigma);
        theta = axpy(theta, cfg.learning_rate, grad);
        ++iteration;
        trace.rows.push_back(TraceRow{iteration, trace.queries_spent, tracker.raw,
                                      combined_sum / static_cast<double>(b), param_digest(theta)});
    }
    trace.final_iterate = theta;
    return OptimResult{tracker.params, std::move(trace)};
}

OptimResult random_search(const ParameterVector& theta0, FeedbackChannel& channel,
                          std::size_t budget, double sigma, std::uint64_t seed,
                          bool higher_is_better) {
    if (sigma < 0.0) throw std::invalid_argument("random_search: sigma must be >= 0");
    const std::size_t q = effective_budget(budget, channel);
    const double orient = higher_is_better ? 1.0 : -1.0;

    RunTrace trace;
    trace.final_iterate = theta0;
    BestTracker tracker;
    if (q < 1) {
        return OptimResult{theta0, std::move(trace)};
    }

    trace.initial_scores = channel.submit(theta0);
    tracker.offer(theta0, orient * trace.initial_scores[0], trace.initial_scores[0]);
    record_query(trace, tracker);
    trace.rows.push_back(TraceRow{0, trace.queries_spent, tracker.raw, trace.initial_scores[0],
                                  param_digest(theta0)});

    SeededRng rng(seed);
    for (std::size_t i = 1; i < q; ++i) {
        const auto eps = gaussian_batch(rng, theta0.size(), 1);
        const ParameterVector candidate = axpy(theta0, sigma, ParameterVector(eps[0]));
        const double raw = channel.submit(candidate)[0];
        tracker.offer(candidate, orient * raw, raw);
        record_query(trace, tracker);
        trace.rows.push_back(
            TraceRow{i, trace.queries_spent, tracker.raw, raw, param_digest(candidate)});
    }
    return OptimResult{tracker.params, std::move(trace)};
}

} // namespace feedtune
