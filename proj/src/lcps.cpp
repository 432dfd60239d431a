#include "feedtune/lcps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "feedtune/nes.hpp"

namespace feedtune {

ImportanceState ImportanceState::uniform(std::size_t layer_count, double gamma, double beta) {
    if (layer_count < 1) throw std::invalid_argument("importance state needs >= 1 layer");
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must lie in [0,1]");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    ImportanceState state;
    state.alpha.assign(layer_count, 0.0);
    state.gamma = gamma;
    state.beta = beta;
    state.probs = layer_probabilities(state.alpha, gamma);
    return state;
}

std::vector<double> layer_probabilities(const std::vector<double>& alpha, double gamma) {
    if (alpha.empty()) throw std::invalid_argument("layer_probabilities: empty alpha");
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must lie in [0,1]");
    const std::size_t h_count = alpha.size();
    const double a_max = *std::max_element(alpha.begin(), alpha.end());
    double z = 0.0;
    std::vector<double> p(h_count);
    for (std::size_t h = 0; h < h_count; ++h) {
        p[h] = std::exp(alpha[h] - a_max);
        z += p[h];
    }
    const double floor = gamma / static_cast<double>(h_count);
    for (double& v : p) v = (1.0 - gamma) * (v / z) + floor;
    return p;
}

std::vector<double> layer_probabilities(const ImportanceState& state) {
    return layer_probabilities(state.alpha, state.gamma);
}

double average_improvement(const std::vector<double>& unit_scores, double e_hat_prev) {
    if (unit_scores.empty()) throw std::invalid_argument("average_improvement: no scores");
    double mean = 0.0;
    for (double s : unit_scores) mean += s;
    mean /= static_cast<double>(unit_scores.size());
    return std::max(0.0, mean - e_hat_prev);
}

ImportanceState update_importance(const ImportanceState& state, std::size_t h,
                                  double improvement, double beta) {
    if (h < 1 || h > state.alpha.size()) {
        throw std::out_of_range("update_importance: layer index out of range");
    }
    if (improvement < 0.0) throw std::invalid_argument("update_importance: improvement < 0");
    ImportanceState next = state;
    next.alpha[h - 1] += beta * improvement;
    next.probs = layer_probabilities(next.alpha, next.gamma);
    return next;
}

double RegretLedger::g_max() const {
    double total = 0.0;
    for (const auto& row : improvements) {
        total += *std::max_element(row.begin(), row.end());
    }
    return total;
}

double RegretLedger::g_lcps() const {
    double total = 0.0;
    for (std::size_t t = 0; t < improvements.size(); ++t) {
        for (std::size_t h = 0; h < improvements[t].size(); ++h) {
            total += stage2_probs[t][h] * improvements[t][h];
        }
    }
    return total;
}

double regret_bound(const RegretLedger& ledger, double beta, double c,
                    std::size_t layer_count) {
    if (!(c > 0.0)) {
        throw std::invalid_argument("regret_bound: c must be > 0 (stage 2 is empty otherwise)");
    }
    if (!(beta > 0.0)) throw std::invalid_argument("regret_bound: beta must be > 0");
    if (layer_count < 1) throw std::invalid_argument("regret_bound: layer count must be >= 1");
    const double e = std::exp(1.0);
    return (beta * c * (e - 2.0) + 1.0) * ledger.g_max() +
           (c / beta) * std::log(static_cast<double>(layer_count));
}

double optimal_beta(std::size_t layer_count, double predicted_gain) {
    if (layer_count < 2) {
        throw std::invalid_argument("optimal_beta: needs >= 2 layers (ln 1 = 0 degenerates)");
    }
    if (!(predicted_gain > 0.0)) throw std::invalid_argument("optimal_beta: gain must be > 0");
    const double e = std::exp(1.0);
    return std::sqrt(std::log(static_cast<double>(layer_count)) / ((e - 2.0) * predicted_gain));
}

namespace {

std::size_t sample_layer(const std::vector<double>& probs, SeededRng& rng) {
    const double x = rng.next_double();
    double acc = 0.0;
    for (std::size_t h = 0; h < probs.size(); ++h) {
        acc += probs[h];
        if (x < acc) return h + 1;
    }
    return probs.size();
}

} // namespace

LcpsResult lcps_run(const ParameterVector& theta0, const LayerPartition& partition,
                    FeedbackChannel& channel, const LcpsConfig& cfg) {
    const std::size_t h_count = partition.layer_count();
    if (partition.total_dim() != theta0.size()) {
        throw dimension_mismatch_error("lcps: partition does not cover theta0");
    }
    if (!(cfg.sigma > 0.0)) throw std::invalid_argument("lcps: sigma must be > 0");
    if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("lcps: learning rate must be > 0");
    if (!(cfg.improvement_scale > 0.0)) {
        throw std::invalid_argument("lcps: improvement scale must be > 0");
    }

    std::vector<std::size_t> unit(h_count, cfg.unit_size);
    if (!cfg.unit_sizes.empty()) {
        if (cfg.unit_sizes.size() != h_count) {
            throw std::invalid_argument("lcps: per-layer unit sizes must match layer count");
        }
        unit = cfg.unit_sizes;
    }
    std::size_t stage1_units = 0;
    for (std::size_t u : unit) {
        if (u < 2 || u % 2 != 0) throw std::invalid_argument("lcps: unit sizes must be even >= 2");
        stage1_units += u;
    }

    // Default batch leaves room for the H committed-model evaluations plus at
    // least one stage-2 unit.
    const std::size_t b = cfg.batch_size == 0
                              ? std::max(default_batch_size(theta0.size()),
                                         stage1_units + h_count + cfg.unit_size)
                              : cfg.batch_size;
    if (b < stage1_units) {
        throw std::invalid_argument("lcps: batch size smaller than one stage-1 sweep");
    }
    const std::size_t stage2_count = (b - stage1_units) / cfg.unit_size;

    const double orient = cfg.higher_is_better ? 1.0 : -1.0;
    const std::size_t budget =
        cfg.budget == 0 ? channel.remaining() : std::min(cfg.budget, channel.remaining());

    LcpsResult result;
    result.ledger.layer_count = h_count;
    result.ledger.c = (static_cast<double>(b) - static_cast<double>(stage1_units)) /
                      static_cast<double>(cfg.unit_size);

    RunTrace& trace = result.trace;
    trace.layer_queries_total.assign(h_count, 0);
    trace.layer_queries_stage2.assign(h_count, 0);
    trace.final_iterate = theta0;

    ImportanceState state = ImportanceState::uniform(h_count, cfg.gamma, cfg.beta);
    if (budget < 1) {
        result.best = theta0;
        result.importance = std::move(state);
        return result;
    }

    ParameterVector best = theta0;
    double best_objective = 0.0;
    double best_raw = 0.0;
    SeededRng rng(cfg.seed);
    ParameterVector theta = theta0;

    auto left = [&] { return budget - trace.queries_spent; };
    auto submit_tracked = [&](const ParameterVector& candidate, std::size_t layer, bool stage2) {
        const double raw = channel.submit(candidate)[0];
        const double oriented = orient * raw;
        if (oriented > best_objective) {
            best_objective = oriented;
            best_raw = raw;
            best = candidate;
        }
        ++trace.queries_spent;
        trace.objective_at_query.push_back(best_objective);
        trace.raw_best_at_query.push_back(best_raw);
        if (layer > 0) {
            ++trace.layer_queries_total[layer - 1];
            if (stage2) ++trace.layer_queries_stage2[layer - 1];
        }
        return oriented;
    };

    // One committed antithetic gradient step on layer h; returns the mean
    // oriented score of its u candidates.
    auto unit_update = [&](std::size_t h, std::size_t u, bool stage2) {
        const ParameterVector layer_theta = layer_view(theta, partition, h);
        SampleBatch batch = draw_batch(SearchDistribution(layer_theta, cfg.sigma), u, rng);
        std::vector<double> oriented(u);
        double sum = 0.0;
        for (std::size_t i = 0; i < u; ++i) {
            ParameterVector candidate = theta;
            write_layer(candidate, partition, h, batch.candidates[i]);
            oriented[i] = submit_tracked(candidate, h, stage2);
            sum += oriented[i];
        }
        const auto normalized = normalize_feedbacks(oriented);
        const ParameterVector grad = estimate_gradient(batch, normalized, cfg.sigma);
        write_layer(theta, partition, h, axpy(layer_theta, cfg.learning_rate, grad));
        return sum / static_cast<double>(u);
    };

    trace.initial_scores = channel.submit(theta0);
    best_raw = trace.initial_scores[0];
    best_objective = orient * best_raw;
    ++trace.queries_spent;
    trace.objective_at_query.push_back(best_objective);
    trace.raw_best_at_query.push_back(best_raw);
    // Latest committed-model evaluation, reported per iteration in the trace.
    double committed_eval = best_objective;

    std::size_t iteration = 0;
    bool out_of_budget = false;
    while (!out_of_budget) {
        std::vector<double> improvements(h_count, 0.0);
        // Stage 1: deterministic least update, one unit per layer, committed
        // immediately and evaluated once (1 query). The improvement signal
        // is the committed model's score against the unit's own candidate
        // mean, so a layer earns importance only when its own update moved
        // the score; a signal-free layer scores an exact zero.
        for (std::size_t h = 1; h <= h_count && !out_of_budget; ++h) {
            if (left() < unit[h - 1] + 1) {
                out_of_budget = true;
                break;
            }
            const double batch_mean = unit_update(h, unit[h - 1], false);
            const double e_hat = submit_tracked(theta, h, false);
            const double raw_improvement = std::max(0.0, e_hat - batch_mean);
            improvements[h - 1] = std::min(1.0, raw_improvement / cfg.improvement_scale);
            state = update_importance(state, h, improvements[h - 1], cfg.beta);
            committed_eval = e_hat;
        }
        if (out_of_budget) break;

        // Stage 2: reassign the leftover units by importance, gamma = 0.
        const std::vector<double> p2 = layer_probabilities(state.alpha, 0.0);
        result.ledger.improvements.push_back(improvements);
        result.ledger.stage2_probs.push_back(p2);
        for (std::size_t j = 0; j < stage2_count && !out_of_budget; ++j) {
            const std::size_t h = sample_layer(p2, rng);
            if (left() < unit[h - 1]) {
                out_of_budget = true;
                break;
            }
            unit_update(h, unit[h - 1], true);
        }
        ++iteration;
        trace.rows.push_back(TraceRow{iteration, trace.queries_spent, best_raw,
                                      orient * committed_eval, param_digest(theta)});
    }

    trace.final_iterate = theta;
    result.best = std::move(best);
    result.importance = std::move(state);
    return result;
}

} // namespace feedtune
