#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "feedtune/param.hpp"

namespace feedtune {

using ScoreTuple = std::vector<double>;

/// The provider's only view of the holder: submit a candidate, get scores.
/// Implementations charge exactly one query per successful submit and throw
/// budget_exhausted_error once the budget is spent (without charging).
class FeedbackChannel {
public:
    virtual ~FeedbackChannel() = default;

    virtual std::size_t remaining() const = 0;
    virtual std::size_t arity() const = 0;
    virtual ScoreTuple submit(const ParameterVector& candidate) = 0;
};

/// In-process channel over an arbitrary score function; the workhorse for
/// synthetic tasks and property tests. Optionally quantizes scores the way a
/// real holder would, before the provider ever sees them.
class FunctionChannel final : public FeedbackChannel {
public:
    using ScoreFn = std::function<ScoreTuple(const ParameterVector&)>;

    FunctionChannel(ScoreFn fn, std::size_t arity, std::size_t budget, int decimals = -1);

    /// Scalar convenience wrapper.
    static FunctionChannel scalar(std::function<double(const ParameterVector&)> fn,
                                  std::size_t budget, int decimals = -1);

    std::size_t remaining() const override { return remaining_; }
    std::size_t arity() const override { return arity_; }
    ScoreTuple submit(const ParameterVector& candidate) override;

    std::size_t calls() const { return calls_; }

private:
    ScoreFn fn_;
    std::size_t arity_;
    std::size_t remaining_;
    int decimals_;
    std::size_t calls_ = 0;
};

} // namespace feedtune
