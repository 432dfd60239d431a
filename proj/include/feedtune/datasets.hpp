#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "feedtune/metrics.hpp"

namespace feedtune {

/// Two 2-d Gaussian classes. The source/target pair for the toy adaptation
/// task differs only in the per-axis variances; the means are fixed anchors,
/// not values from any reference setup.
struct TwoGaussiansSpec {
    std::array<double, 2> mean0{-1.0, -1.0};
    std::array<double, 2> mean1{1.0, 1.0};
    std::array<double, 2> variance{0.7, 0.7};
    std::size_t per_class = 200;
    std::uint64_t seed = 0;
};

LabeledDataset gen_two_gaussians(const TwoGaussiansSpec& spec);

/// Separable binary task with a sensitive attribute z correlated with the
/// label, exposed to the model as an extra feature column. A classifier that
/// leans on that column is accurate on-distribution and demographically
/// biased, which is exactly the trade-off fairness tuning has to navigate.
struct BiasedBinarySpec {
    TwoGaussiansSpec base;
    double correlation = 0.8;        // Pr(z=1|y=1) - Pr(z=1|y=0)
    double sensitive_strength = 1.0; // scale of the +-z feature column
};

LabeledDataset gen_biased_binary(const BiasedBinarySpec& spec);

/// Ring of Gaussian blobs for multi-class metrics.
struct GaussianBlobsSpec {
    std::size_t classes = 10;
    std::size_t per_class = 60;
    double radius = 2.0;
    std::array<double, 2> variance{0.6, 0.6};
    std::uint64_t seed = 0;
};

LabeledDataset gen_gaussian_blobs(const GaussianBlobsSpec& spec);

/// Linear-plus-noise regression data; keeps the Pearson metric exercised
/// without any text model.
struct SyntheticRegressionSpec {
    std::size_t samples = 200;
    std::size_t dim = 4;
    double noise = 0.1;
    std::uint64_t seed = 0;
};

LabeledDataset gen_regression(const SyntheticRegressionSpec& spec);

enum class ColumnRole { numeric, categorical, label, sensitive, ignore };

/// Column roles plus the fitted encoding state (vocabularies, standardization
/// statistics). Loading with an already-fitted schema reproduces identical
/// encodings; unseen categories one-hot to all zeros.
struct CsvSchema {
    std::map<std::string, ColumnRole> roles;
    bool regression_label = false;

    bool fitted = false;
    std::map<std::string, std::vector<std::string>> vocab; // categorical col -> sorted categories
    std::map<std::string, std::pair<double, double>> standardize; // numeric col -> (mean, std)
    std::vector<std::string> label_vocab;                         // sorted class names
};

/// Header-row, comma-separated, UTF-8. Fits the schema on first use.
LabeledDataset load_csv(const std::string& path, CsvSchema& schema);

/// Writes a dataset as CSV (numeric feature columns f0..fn, label, optional
/// sensitive column); mainly to fabricate tabular test files.
void write_csv(const std::string& path, const LabeledDataset& data);

} // namespace feedtune
