#include "feedtune/train.hpp"

#include <cmath>
#include <stdexcept>

namespace feedtune {

namespace {

Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            double* orow = out.row(i);
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) { // a^T * b
    Matrix out(a.cols, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        const double* brow = b.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            double* orow = out.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) { // a * b^T
    Matrix out(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < b.rows; ++j) {
            double s = 0.0;
            const double* arow = a.row(i);
            const double* brow = b.row(j);
            for (std::size_t k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
            out.at(i, j) = s;
        }
    }
    return out;
}

} // namespace

MlpModel supervised_finetune(const MlpModel& init, const LabeledDataset& data,
                             const TunableSelection& selection, const TrainConfig& cfg) {
    if (cfg.learning_rate < 0.0) throw std::invalid_argument("train: learning rate must be >= 0");
    if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
    if (data.features.cols != init.input_dim()) {
        throw dimension_mismatch_error("train: feature dim does not match model input");
    }
    if (!data.regression && !init.regression && init.output_dim() > 1 &&
        data.class_count > static_cast<int>(init.output_dim())) {
        throw std::invalid_argument("train: more classes than output units");
    }

    MlpModel model = init;
    const std::size_t depth = model.layers.size();
    const std::size_t n = data.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<bool> step_w(depth, false), step_b(depth, false);
    for (const auto& e : selection.entries) {
        step_w[e.layer] = e.weights;
        step_b[e.layer] = e.bias;
    }

    std::vector<Matrix> acts(depth + 1); // acts[0] = X, acts[l] = output of layer l
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        acts[0] = data.features;
        for (std::size_t l = 0; l < depth; ++l) {
            Matrix z = matmul(acts[l], model.layers[l].weights);
            for (std::size_t r = 0; r < z.rows; ++r) {
                double* row = z.row(r);
                for (std::size_t c = 0; c < z.cols; ++c) row[c] += model.layers[l].bias[c];
            }
            if (model.layers[l].activation == Activation::relu) {
                for (double& v : z.data) v = v > 0.0 ? v : 0.0;
            }
            acts[l + 1] = std::move(z);
        }

        // Loss gradient at the output.
        Matrix delta = acts[depth];
        double loss = 0.0;
        if (model.regression) {
            for (std::size_t r = 0; r < n; ++r) {
                const double d = delta.at(r, 0) - data.targets[r];
                loss += d * d;
                delta.at(r, 0) = 2.0 * d * inv_n;
            }
            loss *= inv_n;
        } else if (delta.cols == 1) {
            for (std::size_t r = 0; r < n; ++r) {
                const double z = delta.at(r, 0);
                const double p = 1.0 / (1.0 + std::exp(-z));
                const double y = static_cast<double>(data.label(r));
                loss -= y * std::log(std::max(p, 1e-300)) +
                        (1.0 - y) * std::log(std::max(1.0 - p, 1e-300));
                delta.at(r, 0) = (p - y) * inv_n;
            }
            loss *= inv_n;
        } else {
            for (std::size_t r = 0; r < n; ++r) {
                double* row = delta.row(r);
                double zmax = row[0];
                for (std::size_t c = 1; c < delta.cols; ++c) zmax = std::max(zmax, row[c]);
                double zsum = 0.0;
                for (std::size_t c = 0; c < delta.cols; ++c) {
                    row[c] = std::exp(row[c] - zmax);
                    zsum += row[c];
                }
                const auto y = static_cast<std::size_t>(data.label(r));
                loss -= std::log(std::max(row[y] / zsum, 1e-300));
                for (std::size_t c = 0; c < delta.cols; ++c) {
                    row[c] = (row[c] / zsum - (c == y ? 1.0 : 0.0)) * inv_n;
                }
            }
            loss *= inv_n;
        }
        if (!std::isfinite(loss)) {
            throw std::invalid_argument("train: loss diverged, try a smaller learning rate");
        }

        for (std::size_t l = depth; l-- > 0;) {
            const Matrix dw = matmul_at_b(acts[l], delta);
            Matrix prev_delta;
            if (l > 0) {
                prev_delta = matmul_a_bt(delta, model.layers[l].weights);
                if (model.layers[l - 1].activation == Activation::relu) {
                    for (std::size_t idx = 0; idx < prev_delta.data.size(); ++idx) {
                        if (acts[l].data[idx] <= 0.0) prev_delta.data[idx] = 0.0;
                    }
                }
            }
            if (step_w[l]) {
                for (std::size_t idx = 0; idx < dw.data.size(); ++idx) {
                    model.layers[l].weights.data[idx] -= cfg.learning_rate * dw.data[idx];
                }
            }
            if (step_b[l]) {
                for (std::size_t c = 0; c < delta.cols; ++c) {
                    double g = 0.0;
                    for (std::size_t r = 0; r < delta.rows; ++r) g += delta.at(r, c);
                    model.layers[l].bias[c] -= cfg.learning_rate * g;
                }
            }
            if (l > 0) delta = std::move(prev_delta);
        }
    }
    return model;
}

MlpModel pretrain(const MlpModel& init, const LabeledDataset& data, const TrainConfig& cfg) {
    return supervised_finetune(init, data, TunableSelection::all(init), cfg);
}

} // namespace feedtune
