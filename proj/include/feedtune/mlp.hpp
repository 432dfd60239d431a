#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "feedtune/linalg.hpp"
#include "feedtune/param.hpp"
#include "feedtune/rng.hpp"

namespace feedtune {

enum class Activation { relu, identity };

struct DenseLayer {
    Matrix weights; // in x out
    std::vector<double> bias;
    Activation activation = Activation::identity;
};

/// Plain feed-forward network. A single output unit is read as a binary
/// logit (class 1 iff logit > 0); multiple outputs as per-class scores.
struct MlpModel {
    std::vector<DenseLayer> layers;
    bool regression = false;

    std::size_t input_dim() const { return layers.front().weights.rows; }
    std::size_t output_dim() const { return layers.back().weights.cols; }
    std::size_t class_count() const { return output_dim() == 1 ? 2 : output_dim(); }
};

/// Relu-friendly random init, deterministic under the seed.
MlpModel make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                  std::size_t output_dim, bool regression, SeededRng rng);

/// Forward pass, one output row per input row. OpenMP-parallel over rows.
Matrix forward(const MlpModel& model, const Matrix& features);

/// Single-threaded reference forward pass; bit-identical to forward().
Matrix forward_serial(const MlpModel& model, const Matrix& features);

/// Hard class prediction per row: argmax, or logit > 0 for one output unit.
std::vector<int> predict_classes(const Matrix& scores);

/// Which tensors of which model layers the black-box tuner may touch.
struct TunableSelection {
    struct Entry {
        std::size_t layer = 0; // model layer index
        bool weights = true;
        bool bias = false;
    };
    std::vector<Entry> entries;

    static TunableSelection last_layer_weights(const MlpModel& model);
    static TunableSelection all(const MlpModel& model);
};

struct PackedParams {
    ParameterVector theta;
    LayerPartition partition; // one segment per selected model layer
};

/// Flattens the selected tensors into one vector with a per-layer partition.
PackedParams pack_parameters(const MlpModel& model, const TunableSelection& selection);

/// Writes `theta` back into a copy of `model`; unselected tensors untouched.
MlpModel unpack_parameters(const MlpModel& model, const TunableSelection& selection,
                           const ParameterVector& theta);

} // namespace feedtune
