#pragma once

#include "feedtune/metrics.hpp"
#include "feedtune/mlp.hpp"

namespace feedtune {

struct TrainConfig {
    std::size_t epochs = 300;
    double learning_rate = 0.5;
};

/// Full-batch gradient descent on a smooth surrogate (softmax/logistic
/// cross-entropy for classification, squared error for regression). No
/// minibatch noise, so results are bit-reproducible. Throws if the loss goes
/// non-finite.
MlpModel pretrain(const MlpModel& init, const LabeledDataset& data, const TrainConfig& cfg);

/// Same descent but stepping only the selected tensors; the supervised upper
/// reference for the black-box methods, searching the same space they do.
MlpModel supervised_finetune(const MlpModel& init, const LabeledDataset& data,
                             const TunableSelection& selection, const TrainConfig& cfg);

} // namespace feedtune
