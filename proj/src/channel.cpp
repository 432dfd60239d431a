#include "feedtune/channel.hpp"

#include "feedtune/errors.hpp"
#include "feedtune/metrics.hpp"

namespace feedtune {

FunctionChannel::FunctionChannel(ScoreFn fn, std::size_t arity, std::size_t budget, int decimals)
    : fn_(std::move(fn)), arity_(arity), remaining_(budget), decimals_(decimals) {}

FunctionChannel FunctionChannel::scalar(std::function<double(const ParameterVector&)> fn,
                                        std::size_t budget, int decimals) {
    return FunctionChannel(
        [f = std::move(fn)](const ParameterVector& theta) { return ScoreTuple{f(theta)}; }, 1,
        budget, decimals);
}

ScoreTuple FunctionChannel::submit(const ParameterVector& candidate) {
    if (remaining_ == 0) throw budget_exhausted_error();
    ScoreTuple scores = fn_(candidate);
    if (scores.size() != arity_) {
        throw protocol_error("channel returned wrong score arity");
    }
    for (double& s : scores) s = quantize_feedback(s, decimals_);
    --remaining_;
    ++calls_;
    return scores;
}

} // namespace feedtune
