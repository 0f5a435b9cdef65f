#include "thermoguard/cnnmodel.hpp"
#include "thermoguard/errors.hpp"

#include "fixtures.hpp"
#include "gradcheck.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace thermoguard;
using fixtures::gradient_check;
using fixtures::random_windows;
using fixtures::single_window;

namespace {

CnnConfig tiny(Activation act) {
    CnnConfig c;
    c.n_filter = {3, 2};
    c.s_filter = {2, 3};
    c.dilation = {2, 1};
    c.dropout = {0.0, 0.0};
    c.seq_len = 7;
    c.n_inputs = 4;
    c.activation = act;
    return c;
}

/// Loss sum(pred .* weights) so d loss / d pred = weights.
double weighted_output(const CnnModel& m, const WindowSet& w, const Matrix& weights) {
    const auto idx = all_indices(w);
    return (forward(m, w, idx, false, 0).array() * weights.array()).sum();
}

}  // namespace

TEST(CnnModel, DefaultLayoutShapes) {
    const CnnModel m = init_cnn(CnnConfig{}, 1);
    const auto shapes = parameter_shapes(m);
    ASSERT_EQ(shapes.size(), 4u);
    EXPECT_EQ(shapes[0], (std::vector<Index>{125, 27, 2}));
    EXPECT_EQ(shapes[1], (std::vector<Index>{5, 125, 2}));
    EXPECT_EQ(shapes[2], (std::vector<Index>{125, 5, 2}));
    EXPECT_EQ(shapes[3], (std::vector<Index>{3, 125}));
    const Index expected = (125 * 27 * 2 + 125) + (5 * 125 * 2 + 5) + (125 * 5 * 2 + 125) + (3 * 125 + 3);
    CnnParams p = m.params;
    EXPECT_EQ(parameter_count(p), expected);
    EXPECT_EQ(static_cast<Index>(flatten(p).size()), expected);
}

TEST(CnnModel, ReceptiveFields) {
    EXPECT_EQ(receptive_field(CnnConfig{}), 6);
    CnnConfig pointwise;
    pointwise.s_filter = {1, 1, 1};
    EXPECT_EQ(receptive_field(pointwise), 1);
    CnnConfig wide;
    wide.s_filter = {3, 2, 2};
    wide.dilation = {2, 1, 1};
    EXPECT_EQ(receptive_field(wide), 7);
    CnnConfig too_short;
    too_short.seq_len = 5;
    EXPECT_THROW(too_short.validate(), ConfigError);
    too_short.seq_len = 6;
    EXPECT_NO_THROW(too_short.validate());
}

TEST(CnnModel, HandComputedConvolution) {
    CnnConfig c;
    c.n_filter = {1};
    c.s_filter = {2};
    c.dilation = {1};
    c.dropout = {0.0};
    c.seq_len = 3;
    c.n_inputs = 1;
    c.n_outputs = 1;
    c.activation = Activation::identity;
    CnnModel m = init_cnn(c, 1);
    m.params.layers[0].taps[0].setConstant(1.0);
    m.params.layers[0].taps[1].setConstant(1.0);
    m.params.layers[0].bias.setZero();
    m.params.head_w.setConstant(1.0);
    m.params.head_b.setZero();
    const double a = 0.7, b = -1.3, cc = 2.9;
    Matrix x(3, 1);
    x << a, b, cc;
    const auto acts = layer_activations(m, x);
    ASSERT_EQ(acts.size(), 1u);
    EXPECT_DOUBLE_EQ(acts[0](0, 0), a);
    EXPECT_DOUBLE_EQ(acts[0](1, 0), a + b);
    EXPECT_DOUBLE_EQ(acts[0](2, 0), b + cc);
    EXPECT_NEAR(forward_window(m, x)(0), (2 * a + 2 * b + cc) / 3.0, 1e-15);
}

TEST(CnnModel, DefaultConfigIsCausal) {
    const CnnModel m = init_cnn(CnnConfig{}, 3);
    WindowSet w = random_windows(1, 100, 27, 4);
    Matrix x = w.window(0);
    const auto before = layer_activations(m, x);
    const Index t0 = 60;
    x.row(t0).array() += 5.0;
    const auto after = layer_activations(m, x);
    for (std::size_t l = 0; l < before.size(); ++l) {
        EXPECT_EQ(before[l].topRows(t0), after[l].topRows(t0)) << "layer " << l;
    }
    EXPECT_NE(before[0].row(t0), after[0].row(t0));
    // the last output is unaffected by inputs older than the receptive field
    Matrix y = w.window(0);
    const auto base = layer_activations(m, y).back().row(99);
    y.row(99 - 6).array() += 5.0;
    EXPECT_EQ(layer_activations(m, y).back().row(99), base);
}

class CnnGradient : public ::testing::TestWithParam<Activation> {};

TEST_P(CnnGradient, MatchesFiniteDifferences) {
    CnnModel m = init_cnn(tiny(GetParam()), 5);
    for (auto& layer : m.params.layers) layer.bias.setConstant(0.05);
    const WindowSet w = random_windows(3, 7, 4, 6);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix weights(3, kTargetCount);
    for (Index k = 0; k < weights.size(); ++k) weights.data()[k] = n(rng);

    CnnCache cache;
    const auto idx = all_indices(w);
    forward(m, w, idx, true, 0, &cache);
    CnnParams grads = backward(m, cache, weights);
    const auto analytic = flatten(grads);
    const auto result = gradient_check(parameter_pointers(m.params), analytic,
                                       [&] { return weighted_output(m, w, weights); });
    EXPECT_EQ(result.checked, analytic.size());
    EXPECT_LT(result.worst_relative, 1e-5);
}

INSTANTIATE_TEST_SUITE_P(Activations, CnnGradient, ::testing::Values(Activation::relu, Activation::identity),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(CnnModel, DropoutIsUnbiasedForLinearNetworks) {
    CnnConfig c = tiny(Activation::identity);
    c.dropout = {0.3, 0.2};
    const CnnModel m = init_cnn(c, 8);
    const WindowSet w = random_windows(1, 7, 4, 9);
    const auto idx = all_indices(w);
    const Matrix clean = forward(m, w, idx, false, 0);
    Matrix mean = Matrix::Zero(1, kTargetCount);
    const int draws = 20000;
    for (int s = 0; s < draws; ++s) mean += forward(m, w, idx, true, static_cast<std::uint64_t>(s));
    mean /= draws;
    EXPECT_LT((mean - clean).cwiseAbs().maxCoeff(), 0.02);
    EXPECT_NE(forward(m, w, idx, true, 1), clean);
    EXPECT_EQ(forward(m, w, idx, true, 1), forward(m, w, idx, true, 1));
}

TEST(CnnModel, IdentityNetworkIsAffine) {
    const CnnModel m = init_cnn(tiny(Activation::identity), 10);
    const WindowSet a = random_windows(1, 7, 4, 11);
    const WindowSet b = random_windows(1, 7, 4, 12);
    const Matrix xa = a.window(0), xb = b.window(0);
    const Vector mix = forward_window(m, 0.25 * xa + 0.75 * xb);
    const Vector expected = 0.25 * forward_window(m, xa) + 0.75 * forward_window(m, xb);
    EXPECT_LT((mix - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CnnModel, StaleCacheIsRejected) {
    CnnModel m = init_cnn(tiny(Activation::relu), 13);
    const WindowSet w = random_windows(2, 7, 4, 14);
    CnnCache cache;
    const auto idx = all_indices(w);
    forward(m, w, idx, true, 0, &cache);
    const Matrix d = Matrix::Ones(2, kTargetCount);
    const CnnParams g = backward(m, cache, d);
    apply_update(m, g, 0.01);
    EXPECT_THROW(backward(m, cache, d), StaleCacheError);
    EXPECT_THROW(backward(m, CnnCache{}, d), StaleCacheError);
}

TEST(CnnModel, InitIsDeterministic) {
    CnnParams a = init_cnn(tiny(Activation::relu), 1).params;
    CnnParams b = init_cnn(tiny(Activation::relu), 1).params;
    CnnParams c = init_cnn(tiny(Activation::relu), 2).params;
    EXPECT_EQ(flatten(a), flatten(b));
    EXPECT_NE(flatten(a), flatten(c));
    // weights lie within the fan-in bound, biases start at zero
    const double bound = 1.0 / std::sqrt(4.0 * 2.0);
    EXPECT_LE(a.layers[0].taps[0].cwiseAbs().maxCoeff(), bound);
    EXPECT_EQ(a.layers[0].bias.cwiseAbs().maxCoeff(), 0.0);
}

TEST(CnnModel, ShapeErrors) {
    const CnnModel m = init_cnn(tiny(Activation::relu), 1);
    EXPECT_THROW(forward_window(m, Matrix::Zero(7, 5)), ShapeError);
    EXPECT_THROW(forward_window(m, Matrix::Zero(6, 4)), ShapeError);
}
