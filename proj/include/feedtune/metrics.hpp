#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "feedtune/linalg.hpp"
#include "feedtune/mlp.hpp"

namespace feedtune {

enum class MetricKind { accuracy, top_k, pearson, demographic_parity, tuple };

struct MetricSpec {
    MetricKind kind = MetricKind::accuracy;
    int k = 1;                     // top_k only
    std::vector<MetricSpec> parts; // tuple only
    bool higher_is_better = true;

    static MetricSpec accuracy();
    static MetricSpec top_k(int k); // reported as top-K error, lower is better
    static MetricSpec pearson();
    static MetricSpec demographic_parity(); // lower is better
    static MetricSpec tuple_of(std::vector<MetricSpec> parts);

    std::size_t arity() const;
    /// Orientation sign per tuple slot: +1 if higher is better, else -1.
    std::vector<double> orientation() const;
};

struct LabeledDataset {
    Matrix features;
    std::vector<double> targets; // class ids (as doubles) or regression targets
    bool regression = false;
    int class_count = 2;
    std::vector<std::uint8_t> sensitive; // empty unless a fairness metric is used

    std::size_t size() const { return features.rows; }
    int label(std::size_t i) const { return static_cast<int>(targets[i]); }
    bool has_sensitive() const { return !sensitive.empty(); }
};

/// Evaluates the metric on the dataset; one value per tuple slot.
/// accuracy, top-K error and demographic parity land in [0,1]; Pearson in [-1,1].
std::vector<double> evaluate(const MlpModel& model, const LabeledDataset& data,
                             const MetricSpec& metric);

/// Rounds half away from zero to `decimals` places; decimals < 0 means full
/// precision (identity).
double quantize_feedback(double score, int decimals);

} // namespace feedtune
