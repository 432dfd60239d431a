#include <doctest.h>

#include <cmath>

#include "feedtune/metrics.hpp"
#include "feedtune/mlp.hpp"

using namespace feedtune;

namespace {

MlpModel identity_model(std::size_t dim) {
    MlpModel model;
    DenseLayer layer;
    layer.weights = Matrix(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) layer.weights.at(i, i) = 1.0;
    layer.bias.assign(dim, 0.0);
    layer.activation = Activation::identity;
    model.layers.push_back(std::move(layer));
    return model;
}

Matrix row_matrix(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.begin()->size());
    std::size_t r = 0;
    for (const auto& row : rows) {
        std::size_t c = 0;
        for (double v : row) m.at(r, c++) = v;
        ++r;
    }
    return m;
}

LabeledDataset tiny_dataset(Matrix features, std::vector<double> targets, int classes = 2) {
    LabeledDataset data;
    data.features = std::move(features);
    data.targets = std::move(targets);
    data.class_count = classes;
    return data;
}

} // namespace

TEST_CASE("identity network forwards its input") {
    const Matrix x = row_matrix({{1.5, -2.0}, {0.0, 3.0}});
    const Matrix y = forward(identity_model(2), x);
    CHECK(y == x);
}

TEST_CASE("all-zero relu network emits zeros") {
    MlpModel model;
    DenseLayer layer;
    layer.weights = Matrix(3, 4);
    layer.bias.assign(4, 0.0);
    layer.activation = Activation::relu;
    model.layers.push_back(layer);
    const Matrix y = forward(model, row_matrix({{1, 2, 3}}));
    for (double v : y.data) CHECK(v == 0.0);
}

// Straight-line recomputation oracle: the same fixed 3-layer chain written
// out by hand, no shared code with forward().
TEST_CASE("forward matches a hand-computed chain") {
    const MlpModel model = make_mlp(2, {3, 2}, 1, false, SeededRng(77));
    const Matrix x = row_matrix({{0.4, -1.1}});
    const Matrix got = forward(model, x);

    double h1[3];
    for (int j = 0; j < 3; ++j) {
        double z = model.layers[0].bias[j];
        z += 0.4 * model.layers[0].weights.at(0, j);
        z += -1.1 * model.layers[0].weights.at(1, j);
        h1[j] = z > 0 ? z : 0;
    }
    double h2[2];
    for (int j = 0; j < 2; ++j) {
        double z = model.layers[1].bias[j];
        for (int k = 0; k < 3; ++k) z += h1[k] * model.layers[1].weights.at(k, j);
        h2[j] = z > 0 ? z : 0;
    }
    double out = model.layers[2].bias[0];
    for (int k = 0; k < 2; ++k) out += h2[k] * model.layers[2].weights.at(k, 0);

    CHECK(got.at(0, 0) == doctest::Approx(out).epsilon(1e-15));
}

TEST_CASE("openmp forward equals the serial reference bitwise") {
    const MlpModel model = make_mlp(5, {16, 8}, 3, false, SeededRng(5));
    SeededRng rng(6);
    Matrix x(97, 5);
    fill_gaussian(rng, x.data);
    CHECK(forward(model, x) == forward_serial(model, x));
}

TEST_CASE("forward validates shapes") {
    const MlpModel model = make_mlp(4, {8}, 2, false, SeededRng(1));
    CHECK_THROWS_AS(forward(model, Matrix(3, 5)), dimension_mismatch_error);
}

TEST_CASE("pack/unpack round trip and locality") {
    const MlpModel model = make_mlp(2, {16, 80}, 1, false, SeededRng(9));

    SUBCASE("last-layer weights of the 80-unit head pack to 80 parameters") {
        const auto packed = pack_parameters(model, TunableSelection::last_layer_weights(model));
        CHECK(packed.theta.size() == 80);
        CHECK(packed.partition.layer_count() == 1);
    }
    SUBCASE("select-all counts every tensor element") {
        const auto packed = pack_parameters(model, TunableSelection::all(model));
        std::size_t expect = 0;
        for (const auto& layer : model.layers) {
            expect += layer.weights.data.size() + layer.bias.size();
        }
        CHECK(packed.theta.size() == expect);
        CHECK(packed.partition.layer_count() == model.layers.size());
    }
    SUBCASE("unpack(pack(m)) == m and perturbation stays local") {
        const TunableSelection sel = TunableSelection::all(model);
        const auto packed = pack_parameters(model, sel);
        const MlpModel same = unpack_parameters(model, sel, packed.theta);
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            CHECK(same.layers[l].weights == model.layers[l].weights);
            CHECK(same.layers[l].bias == model.layers[l].bias);
        }

        ParameterVector theta = packed.theta;
        const auto& seg = packed.partition.segment(2);
        theta[seg.offset] += 0.5; // poke one entry of layer 2's tensor block
        const MlpModel poked = unpack_parameters(model, sel, theta);
        CHECK(poked.layers[0].weights == model.layers[0].weights);
        CHECK(poked.layers[2].weights == model.layers[2].weights);
        CHECK(poked.layers[1].weights != model.layers[1].weights);
    }
    SUBCASE("empty selection errors") {
        CHECK_THROWS_AS(pack_parameters(model, TunableSelection{}), std::invalid_argument);
    }
}

TEST_CASE("accuracy on binary and multi-class heads") {
    // Single logit: class 1 iff logit > 0.
    MlpModel model = identity_model(1);
    const auto data =
        tiny_dataset(row_matrix({{1.0}, {-1.0}, {2.0}, {0.5}}), {1, 0, 1, 0});
    const auto acc = evaluate(model, data, MetricSpec::accuracy());
    CHECK(acc[0] == doctest::Approx(0.75)); // last row predicted 1, labeled 0

    const auto all_right =
        tiny_dataset(row_matrix({{1.0}, {-1.0}}), {1, 0});
    CHECK(evaluate(model, all_right, MetricSpec::accuracy())[0] == 1.0);
}

TEST_CASE("top-K error definition and monotonicity") {
    const MlpModel id4 = identity_model(4);
    const auto data = tiny_dataset(
        row_matrix({{0.9, 0.1, 0.0, 0.0}, {0.1, 0.2, 0.3, 0.4}, {0.5, 0.5, 0.0, 0.0}}),
        {0, 0, 1}, 4);
    // K = class count: the true label is always inside the full set.
    CHECK(evaluate(id4, data, MetricSpec::top_k(4))[0] == 0.0);
    // top-1: row1 correct; row2 predicts 3; row3 ties at 0.5 -> lower index 0 wins.
    CHECK(evaluate(id4, data, MetricSpec::top_k(1))[0] == doctest::Approx(2.0 / 3));
    // accuracy + top-1 error = 1 on a multi-class head
    const double acc = evaluate(id4, data, MetricSpec::accuracy())[0];
    const double err1 = evaluate(id4, data, MetricSpec::top_k(1))[0];
    CHECK(acc + err1 == doctest::Approx(1.0));

    // errors shrink (weakly) as K grows
    double prev = 1.0;
    for (int k = 1; k <= 4; ++k) {
        const double e = evaluate(id4, data, MetricSpec::top_k(k))[0];
        CHECK(e <= prev);
        prev = e;
    }
    CHECK_THROWS_AS(evaluate(id4, data, MetricSpec::top_k(5)), std::invalid_argument);
}

TEST_CASE("demographic parity from group positive rates") {
    const MlpModel id1 = identity_model(1);
    // Predictions: +,+,+,-,-  (positive iff feature > 0)
    LabeledDataset data = tiny_dataset(
        row_matrix({{1.0}, {1.0}, {1.0}, {-1.0}, {-1.0}}), {1, 1, 1, 0, 0});
    // Groups: z=1 for rows 0-2 and 4 -> rate 3/4; z=0 row 3 -> rate 0.
    data.sensitive = {1, 1, 1, 0, 1};
    const double gamma = evaluate(id1, data, MetricSpec::demographic_parity())[0];
    CHECK(gamma == doctest::Approx(0.75));

    // Swapping group labels leaves the absolute gap unchanged.
    for (auto& z : data.sensitive) z = z ? 0 : 1;
    CHECK(evaluate(id1, data, MetricSpec::demographic_parity())[0] == doctest::Approx(gamma));

    data.sensitive = {1, 1, 1, 1, 1};
    CHECK_THROWS_AS(evaluate(id1, data, MetricSpec::demographic_parity()),
                    std::invalid_argument);
}

TEST_CASE("parity rates 0.6 vs 0.2 give gamma 0.4") {
    const MlpModel id1 = identity_model(1);
    Matrix x(10, 1);
    std::vector<double> y(10, 0.0);
    // z=1 group: 5 rows, 3 positive; z=0 group: 5 rows, 1 positive.
    LabeledDataset data = tiny_dataset(Matrix(10, 1), std::vector<double>(10, 0.0));
    data.sensitive.assign(10, 0);
    for (int i = 0; i < 5; ++i) data.sensitive[i] = 1;
    for (int i = 0; i < 3; ++i) data.features.at(i, 0) = 1.0;  // z=1 positives
    for (int i = 3; i < 5; ++i) data.features.at(i, 0) = -1.0;
    data.features.at(5, 0) = 1.0;                              // z=0 positive
    for (int i = 6; i < 10; ++i) data.features.at(i, 0) = -1.0;
    CHECK(evaluate(id1, data, MetricSpec::demographic_parity())[0] == doctest::Approx(0.4));
}

TEST_CASE("pearson correlation") {
    MlpModel id1 = identity_model(1);
    id1.regression = true;
    LabeledDataset data = tiny_dataset(row_matrix({{1.0}, {2.0}, {3.0}}), {1.0, 2.0, 3.0});
    data.regression = true;
    CHECK(evaluate(id1, data, MetricSpec::pearson())[0] == doctest::Approx(1.0));

    LabeledDataset flat = tiny_dataset(row_matrix({{1.0}, {1.0}}), {1.0, 2.0});
    flat.regression = true;
    CHECK_THROWS_AS(evaluate(id1, flat, MetricSpec::pearson()), std::invalid_argument);
}

TEST_CASE("tuple metrics concatenate components") {
    const MlpModel id1 = identity_model(1);
    LabeledDataset data = tiny_dataset(row_matrix({{1.0}, {-1.0}}), {1, 0});
    data.sensitive = {1, 0};
    const MetricSpec spec =
        MetricSpec::tuple_of({MetricSpec::accuracy(), MetricSpec::demographic_parity()});
    CHECK(spec.arity() == 2);
    const auto scores = evaluate(id1, data, spec);
    REQUIRE(scores.size() == 2);
    CHECK(scores[0] == 1.0);
    CHECK(scores[1] == 1.0);
    CHECK(spec.orientation() == std::vector<double>{1.0, -1.0});
}

TEST_CASE("evaluate is bit-stable across calls") {
    const MlpModel model = make_mlp(3, {12}, 4, false, SeededRng(15));
    SeededRng rng(16);
    LabeledDataset data;
    data.features = Matrix(50, 3);
    fill_gaussian(rng, data.features.data);
    data.targets.resize(50);
    for (auto& t : data.targets) t = static_cast<double>(rng.next_below(4));
    data.class_count = 4;
    const auto a = evaluate(model, data, MetricSpec::top_k(2));
    const auto b = evaluate(model, data, MetricSpec::top_k(2));
    CHECK(a == b);
}

TEST_CASE("quantize feedback") {
    CHECK(quantize_feedback(0.87654, 2) == doctest::Approx(0.88));
    CHECK(quantize_feedback(0.5, 0) == 1.0);   // half away from zero
    CHECK(quantize_feedback(-0.5, 0) == -1.0);
    CHECK(quantize_feedback(0.123456, -1) == 0.123456);

    SeededRng rng(44);
    for (int d = 0; d <= 3; ++d) {
        double scale = std::pow(10.0, d);
        for (int trial = 0; trial < 200; ++trial) {
            const double x = 2.0 * rng.next_double() - 1.0;
            const double q = quantize_feedback(x, d);
            CHECK(std::abs(q - x) <= 0.5 / scale + 1e-15);
            CHECK(quantize_feedback(q, d) == q); // idempotent at fixed d
        }
    }
}
