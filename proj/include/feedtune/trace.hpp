#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "feedtune/param.hpp"

namespace feedtune {

struct TraceRow {
    std::size_t iteration = 0;
    std::size_t queries_spent = 0;
    double best_score = 0.0;    // raw primary score of the best candidate so far
    double current_score = 0.0; // mean raw primary score of this iteration's batch
    std::uint64_t iterate_digest = 0;
};

/// Per-run history. `objective_at_query[q]` is the best oriented objective
/// after the (q+1)-th channel call, so query-resolution curves and
/// queries-to-threshold come straight off the trace.
struct RunTrace {
    std::vector<TraceRow> rows;
    std::vector<double> objective_at_query;
    std::vector<double> raw_best_at_query;
    std::size_t queries_spent = 0;
    std::vector<double> initial_scores; // scores of theta0, raw
    ParameterVector final_iterate;
    // LCPS only: queries charged per layer, total and stage-2 share.
    std::vector<std::uint64_t> layer_queries_total;
    std::vector<std::uint64_t> layer_queries_stage2;
};

} // namespace feedtune
