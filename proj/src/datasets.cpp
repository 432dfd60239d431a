#include "feedtune/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "feedtune/rng.hpp"

namespace feedtune {

LabeledDataset gen_two_gaussians(const TwoGaussiansSpec& spec) {
    if (!(spec.variance[0] > 0.0 && spec.variance[1] > 0.0)) {
        throw std::invalid_argument("two_gaussians: variances must be > 0");
    }
    if (spec.per_class < 1) throw std::invalid_argument("two_gaussians: per_class must be >= 1");
    const std::size_t n = 2 * spec.per_class;
    LabeledDataset data;
    data.features = Matrix(n, 2);
    data.targets.resize(n);
    data.class_count = 2;
    SeededRng rng(spec.seed);
    const double sd0 = std::sqrt(spec.variance[0]);
    const double sd1 = std::sqrt(spec.variance[1]);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i < spec.per_class ? 0 : 1;
        const auto& mean = label == 0 ? spec.mean0 : spec.mean1;
        data.features.at(i, 0) = mean[0] + sd0 * rng.next_gaussian();
        data.features.at(i, 1) = mean[1] + sd1 * rng.next_gaussian();
        data.targets[i] = label;
    }
    return data;
}

LabeledDataset gen_biased_binary(const BiasedBinarySpec& spec) {
    if (spec.correlation < 0.0 || spec.correlation > 1.0) {
        throw std::invalid_argument("biased_binary: correlation must lie in [0,1]");
    }
    LabeledDataset base = gen_two_gaussians(spec.base);
    const std::size_t n = base.size();
    LabeledDataset data;
    data.targets = base.targets;
    data.class_count = 2;
    data.features = Matrix(n, 3);
    data.sensitive.resize(n);
    SeededRng rng(SeededRng(spec.base.seed).child(0x5a5a));
    for (std::size_t i = 0; i < n; ++i) {
        data.features.at(i, 0) = base.features.at(i, 0);
        data.features.at(i, 1) = base.features.at(i, 1);
        const double p_z1 = base.label(i) == 1 ? 0.5 + spec.correlation / 2.0
                                               : 0.5 - spec.correlation / 2.0;
        const bool z = rng.next_double() < p_z1;
        data.sensitive[i] = z ? 1 : 0;
        data.features.at(i, 2) = spec.sensitive_strength * (z ? 1.0 : -1.0);
    }
    return data;
}

LabeledDataset gen_gaussian_blobs(const GaussianBlobsSpec& spec) {
    if (spec.classes < 2) throw std::invalid_argument("blobs: need >= 2 classes");
    const std::size_t n = spec.classes * spec.per_class;
    LabeledDataset data;
    data.features = Matrix(n, 2);
    data.targets.resize(n);
    data.class_count = static_cast<int>(spec.classes);
    SeededRng rng(spec.seed);
    const double sd0 = std::sqrt(spec.variance[0]);
    const double sd1 = std::sqrt(spec.variance[1]);
    const double two_pi = 2.0 * 3.14159265358979323846;
    std::size_t i = 0;
    for (std::size_t c = 0; c < spec.classes; ++c) {
        const double angle = two_pi * static_cast<double>(c) / static_cast<double>(spec.classes);
        const double cx = spec.radius * std::cos(angle);
        const double cy = spec.radius * std::sin(angle);
        for (std::size_t k = 0; k < spec.per_class; ++k, ++i) {
            data.features.at(i, 0) = cx + sd0 * rng.next_gaussian();
            data.features.at(i, 1) = cy + sd1 * rng.next_gaussian();
            data.targets[i] = static_cast<double>(c);
        }
    }
    return data;
}

LabeledDataset gen_regression(const SyntheticRegressionSpec& spec) {
    LabeledDataset data;
    data.regression = true;
    data.features = Matrix(spec.samples, spec.dim);
    data.targets.resize(spec.samples);
    SeededRng rng(spec.seed);
    std::vector<double> w(spec.dim);
    for (double& v : w) v = rng.next_gaussian();
    for (std::size_t i = 0; i < spec.samples; ++i) {
        double y = 0.0;
        for (std::size_t d = 0; d < spec.dim; ++d) {
            const double x = rng.next_gaussian();
            data.features.at(i, d) = x;
            y += w[d] * x;
        }
        data.targets[i] = y + spec.noise * rng.next_gaussian();
    }
    return data;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // Trim ASCII whitespace and a trailing CR from DOS line endings.
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t start = 0;
        while (start < cell.size() && cell[start] == ' ') ++start;
        out.push_back(cell.substr(start));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_number(const std::string& cell, const std::string& col) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw std::invalid_argument("csv: column '" + col + "' has non-numeric cell '" + cell +
                                    "'");
    }
    return value;
}

} // namespace

LabeledDataset load_csv(const std::string& path, CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("csv: empty file " + path);
    const std::vector<std::string> header = split_line(line);

    std::vector<ColumnRole> roles(header.size(), ColumnRole::ignore);
    int label_col = -1, sensitive_col = -1;
    std::set<std::string> seen;
    for (std::size_t c = 0; c < header.size(); ++c) {
        auto it = schema.roles.find(header[c]);
        if (it == schema.roles.end()) continue;
        seen.insert(header[c]);
        roles[c] = it->second;
        if (it->second == ColumnRole::label) label_col = static_cast<int>(c);
        if (it->second == ColumnRole::sensitive) sensitive_col = static_cast<int>(c);
    }
    for (const auto& [name, role] : schema.roles) {
        if (role != ColumnRole::ignore && !seen.count(name)) {
            throw std::invalid_argument("csv: missing column '" + name + "'");
        }
    }
    if (label_col < 0) throw std::invalid_argument("csv: no label column in schema");

    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw std::invalid_argument("csv: row with " + std::to_string(cells.size()) +
                                        " cells, header has " + std::to_string(header.size()));
        }
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw std::invalid_argument("csv: no data rows in " + path);

    if (!schema.fitted) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (roles[c] == ColumnRole::categorical || roles[c] == ColumnRole::sensitive) {
                std::set<std::string> cats;
                for (const auto& row : rows) cats.insert(row[c]);
                if (roles[c] == ColumnRole::sensitive && cats.size() > 2) {
                    throw std::invalid_argument("csv: sensitive column '" + header[c] +
                                                "' must be binary");
                }
                schema.vocab[header[c]] = std::vector<std::string>(cats.begin(), cats.end());
            } else if (roles[c] == ColumnRole::numeric) {
                double mean = 0.0;
                for (const auto& row : rows) mean += parse_number(row[c], header[c]);
                mean /= static_cast<double>(rows.size());
                double var = 0.0;
                for (const auto& row : rows) {
                    const double d = parse_number(row[c], header[c]) - mean;
                    var += d * d;
                }
                var /= static_cast<double>(rows.size());
                schema.standardize[header[c]] = {mean, std::sqrt(var)};
            }
        }
        if (!schema.regression_label) {
            std::set<std::string> labels;
            for (const auto& row : rows) labels.insert(row[static_cast<std::size_t>(label_col)]);
            schema.label_vocab = std::vector<std::string>(labels.begin(), labels.end());
        }
        schema.fitted = true;
    }

    std::size_t feature_dim = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (roles[c] == ColumnRole::numeric) feature_dim += 1;
        if (roles[c] == ColumnRole::categorical) feature_dim += schema.vocab.at(header[c]).size();
    }
    if (feature_dim == 0) throw std::invalid_argument("csv: schema selects no feature columns");

    LabeledDataset data;
    data.regression = schema.regression_label;
    data.class_count = schema.regression_label
                           ? 0
                           : static_cast<int>(std::max<std::size_t>(2, schema.label_vocab.size()));
    data.features = Matrix(rows.size(), feature_dim);
    data.targets.resize(rows.size());
    if (sensitive_col >= 0) data.sensitive.resize(rows.size());

    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::size_t f = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            const std::string& cell = rows[r][c];
            switch (roles[c]) {
                case ColumnRole::numeric: {
                    const auto& [mean, sd] = schema.standardize.at(header[c]);
                    const double x = parse_number(cell, header[c]);
                    data.features.at(r, f++) = sd > 0.0 ? (x - mean) / sd : 0.0;
                    break;
                }
                case ColumnRole::categorical: {
                    const auto& vocab = schema.vocab.at(header[c]);
                    const auto it = std::lower_bound(vocab.begin(), vocab.end(), cell);
                    const bool known = it != vocab.end() && *it == cell;
                    for (std::size_t v = 0; v < vocab.size(); ++v) {
                        data.features.at(r, f + v) = 0.0;
                    }
                    if (known) {
                        data.features.at(r, f + static_cast<std::size_t>(it - vocab.begin())) =
                            1.0;
                    }
                    f += vocab.size();
                    break;
                }
                case ColumnRole::label: {
                    if (schema.regression_label) {
                        data.targets[r] = parse_number(cell, header[c]);
                    } else {
                        const auto it = std::lower_bound(schema.label_vocab.begin(),
                                                         schema.label_vocab.end(), cell);
                        if (it == schema.label_vocab.end() || *it != cell) {
                            throw std::invalid_argument("csv: unknown label '" + cell + "'");
                        }
                        data.targets[r] =
                            static_cast<double>(it - schema.label_vocab.begin());
                    }
                    break;
                }
                case ColumnRole::sensitive: {
                    // Binary by sorted vocabulary: the second category is z=1
                    // ("1" > "0", "male" > "female", "true" > "false").
                    const auto& vocab = schema.vocab.at(header[c]);
                    data.sensitive[r] = vocab.size() == 2 && cell == vocab[1] ? 1 : 0;
                    break;
                }
                case ColumnRole::ignore:
                    break;
            }
        }
    }
    return data;
}

void write_csv(const std::string& path, const LabeledDataset& data) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("csv: cannot write " + path);
    for (std::size_t c = 0; c < data.features.cols; ++c) out << "f" << c << ",";
    out << "label";
    if (data.has_sensitive()) out << ",sensitive";
    out << "\n";
    out.precision(17);
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (std::size_t c = 0; c < data.features.cols; ++c) out << data.features.at(r, c) << ",";
        out << data.targets[r];
        if (data.has_sensitive()) out << "," << static_cast<int>(data.sensitive[r]);
        out << "\n";
    }
}

} // namespace feedtune
