#pragma once

#include <cstdint>
#include <mutex>
#include <utility>
#include <vector>

#include "feedtune/channel.hpp"
#include "feedtune/metrics.hpp"
#include "feedtune/mlp.hpp"

namespace feedtune {

struct FeedbackRecord {
    std::uint64_t query_id = 0;
    std::uint64_t candidate_digest = 0;
    ScoreTuple scores; // post-quantization, as sent to the provider
    std::uint64_t timestamp_ns = 0;
};

/// The data holder: evaluates submitted candidates on the support split,
/// quantizes, charges the budget, and keeps an audit log. The holdout split
/// is reachable only through final_report, once, after the run is over.
class FeedbackOracle final : public FeedbackChannel {
public:
    FeedbackOracle(MlpModel template_model, TunableSelection selection, LabeledDataset support,
                   LabeledDataset holdout, MetricSpec metric, std::size_t budget,
                   int decimals = -1);

    std::size_t remaining() const override;
    std::size_t arity() const override { return metric_.arity(); }
    ScoreTuple submit(const ParameterVector& candidate) override;

    /// Marks the run finished so final_report may be called with budget left.
    void finish();

    /// (support scores, holdout scores) for the delivered candidate,
    /// un-quantized. Does not consume budget; allowed once, and only after
    /// the budget is spent or finish() was called.
    std::pair<ScoreTuple, ScoreTuple> final_report(const ParameterVector& candidate);

    const std::vector<FeedbackRecord>& audit_log() const { return log_; }
    std::size_t tunable_dim() const { return tunable_dim_; }
    std::size_t budget() const { return budget_; }
    int decimals() const { return decimals_; }

private:
    MlpModel template_;
    TunableSelection selection_;
    LabeledDataset support_;
    LabeledDataset holdout_;
    MetricSpec metric_;
    std::size_t budget_;
    std::size_t remaining_;
    int decimals_;
    std::size_t tunable_dim_;
    bool finished_ = false;
    bool reported_ = false;
    std::vector<FeedbackRecord> log_;
    mutable std::mutex mutex_;
};

/// Seed-deterministic shuffle-then-cut into (support, holdout).
std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& data,
                                                        double support_fraction,
                                                        std::uint64_t seed);

} // namespace feedtune
