#include "feedtune/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace feedtune {

namespace {

void forward_row(const MlpModel& model, const double* x, std::size_t in_dim, double* out,
                 std::vector<double>& scratch_a, std::vector<double>& scratch_b) {
    const double* cur = x;
    std::size_t cur_dim = in_dim;
    std::vector<double>* front = &scratch_a;
    std::vector<double>* back = &scratch_b;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const DenseLayer& layer = model.layers[l];
        const std::size_t out_dim = layer.weights.cols;
        const bool last = l + 1 == model.layers.size();
        double* dst = last ? out : (front->resize(out_dim), front->data());
        for (std::size_t j = 0; j < out_dim; ++j) dst[j] = layer.bias[j];
        for (std::size_t k = 0; k < cur_dim; ++k) {
            const double xk = cur[k];
            const double* wrow = layer.weights.row(k);
            for (std::size_t j = 0; j < out_dim; ++j) dst[j] += xk * wrow[j];
        }
        if (layer.activation == Activation::relu) {
            for (std::size_t j = 0; j < out_dim; ++j) dst[j] = dst[j] > 0.0 ? dst[j] : 0.0;
        }
        cur = dst;
        cur_dim = out_dim;
        std::swap(front, back);
    }
}

Matrix forward_impl(const MlpModel& model, const Matrix& features, bool parallel) {
    if (model.layers.empty()) throw std::invalid_argument("forward: empty model");
    if (features.cols != model.input_dim()) {
        throw dimension_mismatch_error("forward: feature dim " + std::to_string(features.cols) +
                                       " does not match input dim " +
                                       std::to_string(model.input_dim()));
    }
    for (std::size_t l = 1; l < model.layers.size(); ++l) {
        if (model.layers[l].weights.rows != model.layers[l - 1].weights.cols) {
            throw dimension_mismatch_error("forward: layer shapes do not compose");
        }
    }
    Matrix out(features.rows, model.output_dim());
#pragma omp parallel if (parallel)
    {
        std::vector<double> sa, sb;
#pragma omp for schedule(static)
        for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(features.rows); ++r) {
            forward_row(model, features.row(static_cast<std::size_t>(r)), features.cols,
                        out.row(static_cast<std::size_t>(r)), sa, sb);
        }
    }
    return out;
}

} // namespace

MlpModel make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                  std::size_t output_dim, bool regression, SeededRng rng) {
    MlpModel model;
    model.regression = regression;
    std::size_t in = input_dim;
    std::vector<std::size_t> widths = hidden;
    widths.push_back(output_dim);
    for (std::size_t l = 0; l < widths.size(); ++l) {
        DenseLayer layer;
        layer.weights = Matrix(in, widths[l]);
        layer.bias.assign(widths[l], 0.0);
        const double scale = std::sqrt(2.0 / static_cast<double>(in));
        for (double& w : layer.weights.data) w = scale * rng.next_gaussian();
        layer.activation = (l + 1 == widths.size()) ? Activation::identity : Activation::relu;
        model.layers.push_back(std::move(layer));
        in = widths[l];
    }
    return model;
}

Matrix forward(const MlpModel& model, const Matrix& features) {
    return forward_impl(model, features, true);
}

Matrix forward_serial(const MlpModel& model, const Matrix& features) {
    return forward_impl(model, features, false);
}

std::vector<int> predict_classes(const Matrix& scores) {
    std::vector<int> out(scores.rows);
    for (std::size_t r = 0; r < scores.rows; ++r) {
        if (scores.cols == 1) {
            out[r] = scores.at(r, 0) > 0.0 ? 1 : 0;
        } else {
            std::size_t best = 0;
            for (std::size_t c = 1; c < scores.cols; ++c) {
                if (scores.at(r, c) > scores.at(r, best)) best = c;
            }
            out[r] = static_cast<int>(best);
        }
    }
    return out;
}

TunableSelection TunableSelection::last_layer_weights(const MlpModel& model) {
    TunableSelection sel;
    sel.entries.push_back({model.layers.size() - 1, true, false});
    return sel;
}

TunableSelection TunableSelection::all(const MlpModel& model) {
    TunableSelection sel;
    for (std::size_t l = 0; l < model.layers.size(); ++l) sel.entries.push_back({l, true, true});
    return sel;
}

PackedParams pack_parameters(const MlpModel& model, const TunableSelection& selection) {
    if (selection.entries.empty()) {
        throw std::invalid_argument("pack_parameters: empty tunable selection");
    }
    std::vector<double> flat;
    std::vector<LayerSegment> segments;
    for (const auto& entry : selection.entries) {
        if (entry.layer >= model.layers.size()) {
            throw std::out_of_range("pack_parameters: layer index out of range");
        }
        if (!entry.weights && !entry.bias) {
            throw std::invalid_argument("pack_parameters: selection entry selects nothing");
        }
        const DenseLayer& layer = model.layers[entry.layer];
        const std::size_t offset = flat.size();
        if (entry.weights) {
            flat.insert(flat.end(), layer.weights.data.begin(), layer.weights.data.end());
        }
        if (entry.bias) {
            flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
        }
        segments.push_back(
            LayerSegment{"layer" + std::to_string(entry.layer), offset, flat.size() - offset});
    }
    return PackedParams{ParameterVector(std::move(flat)), LayerPartition(std::move(segments))};
}

MlpModel unpack_parameters(const MlpModel& model, const TunableSelection& selection,
                           const ParameterVector& theta) {
    MlpModel out = model;
    std::size_t pos = 0;
    for (const auto& entry : selection.entries) {
        DenseLayer& layer = out.layers.at(entry.layer);
        if (entry.weights) {
            for (double& w : layer.weights.data) w = theta[pos++];
        }
        if (entry.bias) {
            for (double& b : layer.bias) b = theta[pos++];
        }
    }
    if (pos != theta.size()) {
        throw dimension_mismatch_error("unpack_parameters: vector size " +
                                       std::to_string(theta.size()) + " does not match selection " +
                                       std::to_string(pos));
    }
    return out;
}

} // namespace feedtune
