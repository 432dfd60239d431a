#include "feedtune/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace feedtune {

MetricSpec MetricSpec::accuracy() {
    return MetricSpec{MetricKind::accuracy, 1, {}, true};
}

MetricSpec MetricSpec::top_k(int k) {
    if (k < 1) throw std::invalid_argument("top_k: K must be >= 1");
    return MetricSpec{MetricKind::top_k, k, {}, false};
}

MetricSpec MetricSpec::pearson() {
    return MetricSpec{MetricKind::pearson, 1, {}, true};
}

MetricSpec MetricSpec::demographic_parity() {
    return MetricSpec{MetricKind::demographic_parity, 1, {}, false};
}

MetricSpec MetricSpec::tuple_of(std::vector<MetricSpec> parts) {
    if (parts.empty()) throw std::invalid_argument("tuple_of: empty tuple");
    MetricSpec spec;
    spec.kind = MetricKind::tuple;
    spec.parts = std::move(parts);
    return spec;
}

std::size_t MetricSpec::arity() const {
    if (kind != MetricKind::tuple) return 1;
    std::size_t n = 0;
    for (const auto& p : parts) n += p.arity();
    return n;
}

std::vector<double> MetricSpec::orientation() const {
    if (kind != MetricKind::tuple) return {higher_is_better ? 1.0 : -1.0};
    std::vector<double> out;
    for (const auto& p : parts) {
        auto sub = p.orientation();
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

namespace {

double accuracy_of(const Matrix& scores, const LabeledDataset& data) {
    const std::vector<int> pred = predict_classes(scores);
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (pred[i] == data.label(i)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

double top_k_error_of(const Matrix& scores, const LabeledDataset& data, int k) {
    if (scores.cols < 2) {
        throw std::invalid_argument("top_k: needs per-class scores");
    }
    if (k > static_cast<int>(scores.cols)) {
        throw std::invalid_argument("top_k: K exceeds class count");
    }
    std::int64_t misses = 0;
    std::vector<std::size_t> order(scores.cols);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double* row = scores.row(i);
        for (std::size_t c = 0; c < scores.cols; ++c) order[c] = c;
        // Ties at the K-th score resolve toward the lower class index.
        std::stable_sort(order.begin(), order.end(),
                         [row](std::size_t a, std::size_t b) { return row[a] > row[b]; });
        const auto label = static_cast<std::size_t>(data.label(i));
        bool hit = false;
        for (int j = 0; j < k; ++j) {
            if (order[static_cast<std::size_t>(j)] == label) {
                hit = true;
                break;
            }
        }
        if (!hit) ++misses;
    }
    return static_cast<double>(misses) / static_cast<double>(data.size());
}

double pearson_of(const Matrix& scores, const LabeledDataset& data) {
    if (scores.cols != 1) throw std::invalid_argument("pearson: needs a single output");
    const std::size_t n = data.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += scores.at(i, 0);
        my += data.targets[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = scores.at(i, 0) - mx;
        const double dy = data.targets[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("pearson: zero-variance predictions");
    if (syy == 0.0) throw std::invalid_argument("pearson: zero-variance targets");
    return sxy / std::sqrt(sxx * syy);
}

double demographic_parity_of(const Matrix& scores, const LabeledDataset& data) {
    if (!data.has_sensitive()) {
        throw std::invalid_argument("demographic_parity: dataset has no sensitive attribute");
    }
    const std::vector<int> pred = predict_classes(scores);
    std::int64_t n1 = 0, n0 = 0, pos1 = 0, pos0 = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.sensitive[i]) {
            ++n1;
            if (pred[i] == 1) ++pos1;
        } else {
            ++n0;
            if (pred[i] == 1) ++pos0;
        }
    }
    if (n0 == 0 || n1 == 0) {
        throw std::invalid_argument("demographic_parity: one sensitive group is empty");
    }
    return std::abs(static_cast<double>(pos1) / static_cast<double>(n1) -
                    static_cast<double>(pos0) / static_cast<double>(n0));
}

void collect(const Matrix& scores, const LabeledDataset& data, const MetricSpec& metric,
             std::vector<double>& out) {
    switch (metric.kind) {
        case MetricKind::accuracy:
            out.push_back(accuracy_of(scores, data));
            break;
        case MetricKind::top_k:
            out.push_back(top_k_error_of(scores, data, metric.k));
            break;
        case MetricKind::pearson:
            out.push_back(pearson_of(scores, data));
            break;
        case MetricKind::demographic_parity:
            out.push_back(demographic_parity_of(scores, data));
            break;
        case MetricKind::tuple:
            for (const auto& p : metric.parts) collect(scores, data, p, out);
            break;
    }
}

} // namespace

std::vector<double> evaluate(const MlpModel& model, const LabeledDataset& data,
                             const MetricSpec& metric) {
    if (data.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
    const Matrix scores = forward(model, data.features);
    std::vector<double> out;
    collect(scores, data, metric, out);
    return out;
}

double quantize_feedback(double score, int decimals) {
    if (decimals < 0) return score;
    if (decimals > 12) throw std::invalid_argument("quantize_feedback: decimals out of range");
    double scale = 1.0;
    for (int i = 0; i < decimals; ++i) scale *= 10.0;
    return std::round(score * scale) / scale;
}

} // namespace feedtune
