#include "feedtune/oracle.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "feedtune/errors.hpp"
#include "feedtune/rng.hpp"

namespace feedtune {

namespace {

std::uint64_t now_ns() {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count());
}

} // namespace

FeedbackOracle::FeedbackOracle(MlpModel template_model, TunableSelection selection,
                               LabeledDataset support, LabeledDataset holdout, MetricSpec metric,
                               std::size_t budget, int decimals)
    : template_(std::move(template_model)),
      selection_(std::move(selection)),
      support_(std::move(support)),
      holdout_(std::move(holdout)),
      metric_(std::move(metric)),
      budget_(budget),
      remaining_(budget),
      decimals_(decimals) {
    tunable_dim_ = pack_parameters(template_, selection_).theta.size();
    if (support_.size() == 0 || holdout_.size() == 0) {
        throw std::invalid_argument("oracle: both splits must be non-empty");
    }
}

std::size_t FeedbackOracle::remaining() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return remaining_;
}

ScoreTuple FeedbackOracle::submit(const ParameterVector& candidate) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (candidate.size() != tunable_dim_) {
        throw dimension_mismatch_error("oracle: candidate has dimension " +
                                       std::to_string(candidate.size()) + ", expected " +
                                       std::to_string(tunable_dim_));
    }
    if (remaining_ == 0) throw budget_exhausted_error();
    const MlpModel model = unpack_parameters(template_, selection_, candidate);
    ScoreTuple scores = evaluate(model, support_, metric_);
    for (double& s : scores) s = quantize_feedback(s, decimals_);
    --remaining_;
    log_.push_back(FeedbackRecord{static_cast<std::uint64_t>(log_.size()),
                                  param_digest(candidate), scores, now_ns()});
    return scores;
}

void FeedbackOracle::finish() {
    std::lock_guard<std::mutex> lock(mutex_);
    finished_ = true;
}

std::pair<ScoreTuple, ScoreTuple> FeedbackOracle::final_report(const ParameterVector& candidate) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!finished_ && remaining_ > 0) {
        throw std::logic_error("final_report: run still in progress (holdout stays sealed)");
    }
    if (reported_) throw std::logic_error("final_report: already reported for this run");
    if (candidate.size() != tunable_dim_) {
        throw dimension_mismatch_error("final_report: candidate dimension mismatch");
    }
    reported_ = true;
    const MlpModel model = unpack_parameters(template_, selection_, candidate);
    return {evaluate(model, support_, metric_), evaluate(model, holdout_, metric_)};
}

std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& data,
                                                        double support_fraction,
                                                        std::uint64_t seed) {
    if (!(support_fraction > 0.0 && support_fraction < 1.0)) {
        throw std::invalid_argument("split_dataset: fraction must lie in (0,1)");
    }
    const std::size_t n = data.size();
    const std::size_t n_support =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * support_fraction));
    if (n_support == 0 || n_support == n) {
        throw std::invalid_argument("split_dataset: degenerate split (one side empty)");
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    SeededRng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(order[i - 1], order[j]);
    }

    auto take = [&](std::size_t begin, std::size_t end) {
        LabeledDataset out;
        out.regression = data.regression;
        out.class_count = data.class_count;
        out.features = Matrix(end - begin, data.features.cols);
        out.targets.resize(end - begin);
        if (data.has_sensitive()) out.sensitive.resize(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t src = order[i];
            for (std::size_t c = 0; c < data.features.cols; ++c) {
                out.features.at(i - begin, c) = data.features.at(src, c);
            }
            out.targets[i - begin] = data.targets[src];
            if (data.has_sensitive()) out.sensitive[i - begin] = data.sensitive[src];
        }
        return out;
    };
    return {take(0, n_support), take(n_support, n)};
}

} // namespace feedtune
