#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "sphembed/layers.hpp"

#include "test_util.hpp"

using namespace sphembed;
using testutil::check_layer_gradients;
using testutil::random_tensor;

TEST_SUITE_BEGIN("layers");

TEST_CASE("dense with identity weights passes input through") {
    Rng rng(1);
    DenseLayer layer(2, 2, false, rng);
    layer.weight().value = Tensor({2, 2}, {1, 0, 0, 1});
    const Tensor out = layer.forward(Tensor({1, 2}, {3, 4}), Mode::Training);
    CHECK(out.at2(0, 0) == 3.0);
    CHECK(out.at2(0, 1) == 4.0);
}

TEST_CASE("dense with zero weights outputs the bias per row") {
    Rng rng(1);
    DenseLayer layer(3, 2, true, rng);
    layer.weight().value.fill(0.0);
    layer.bias()->value = Tensor({2}, {1, 1});
    const Tensor out =
        layer.forward(Tensor({2, 3}, {5, 6, 7, -1, 0, 2}), Mode::Training);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(out.at2(i, j) == 1.0);
}

TEST_CASE("dense rejects mismatched input width") {
    Rng rng(1);
    DenseLayer layer(3, 2, true, rng);
    CHECK_THROWS_AS(layer.forward(Tensor({1, 4}), Mode::Training),
                    contract_error);
}

TEST_CASE("dense gradients match finite differences") {
    Rng rng(2);
    for (int trial = 0; trial < 3; ++trial) {
        DenseLayer layer(4, 3, trial % 2 == 0, rng);
        check_layer_gradients(layer, random_tensor(rng, {5, 4}), rng);
    }
}

TEST_CASE("relu gradients and clamping") {
    Rng rng(3);
    ReluLayer layer;
    const Tensor out =
        layer.forward(Tensor({1, 4}, {-2, -0.5, 0.5, 2}), Mode::Training);
    CHECK(out.at2(0, 0) == 0.0);
    CHECK(out.at2(0, 3) == 2.0);
    check_layer_gradients(layer, random_tensor(rng, {3, 6}), rng);
}

TEST_CASE("dropout identity contracts") {
    Rng rng(4);
    const Tensor x = random_tensor(rng, {2, 8});
    DropoutLayer zero_rate(0.0);
    Tensor out = zero_rate.forward(x, Mode::Training, &rng);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(out[i] == x[i]);
    DropoutLayer d(0.2);
    out = d.forward(x, Mode::Inference);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(out[i] == x[i]);
}

TEST_CASE("inverted dropout preserves the expectation") {
    Rng rng(5);
    DropoutLayer d(0.2);
    const Tensor ones = Tensor::full({100000}, 1.0);
    const Tensor out = d.forward(ones, Mode::Training, &rng);
    double mean = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i)
        mean += out[i];
    mean /= static_cast<double>(out.size());
    CHECK(std::abs(mean - 1.0) < 0.02);
}

TEST_CASE("dropout backward uses the forward mask") {
    Rng rng(6);
    DropoutLayer d(0.5);
    const Tensor x = Tensor::full({1, 64}, 1.0);
    const Tensor out = d.forward(x, Mode::Training, &rng);
    const Tensor grad = d.backward(Tensor::full({1, 64}, 1.0));
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(grad[i] == out[i]); // mask applied identically
}

TEST_CASE("dropout rejects rate 1 and missing rng") {
    CHECK_THROWS_AS(DropoutLayer(1.0), contract_error);
    DropoutLayer d(0.3);
    CHECK_THROWS_AS(d.forward(Tensor({1, 2}), Mode::Training, nullptr),
                    contract_error);
}

TEST_CASE("batch norm with neutral running statistics is the identity") {
    BatchNormLayer bn(3, 0.0); // epsilon 0 so the identity is exact
    Rng rng(7);
    const Tensor x = random_tensor(rng, {4, 3});
    const Tensor out = bn.forward(x, Mode::Inference);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(out[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("batch norm training normalizes to beta/gamma moments") {
    BatchNormLayer bn(2);
    Rng rng(8);
    const Tensor x = random_tensor(rng, {64, 2}, 3.0);
    const Tensor out = bn.forward(x, Mode::Training);
    for (std::size_t j = 0; j < 2; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 64; ++i)
            mean += out.at2(i, j);
        mean /= 64.0;
        double var = 0.0;
        for (std::size_t i = 0; i < 64; ++i)
            var += (out.at2(i, j) - mean) * (out.at2(i, j) - mean);
        var /= 64.0;
        CHECK(std::abs(mean) < 1e-6);                 // beta = 0
        CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-4); // gamma = 1, epsilon
    }
}

TEST_CASE("batch norm rejects single-sample training batches") {
    BatchNormLayer bn(2);
    CHECK_THROWS_AS(bn.forward(Tensor({1, 2}), Mode::Training),
                    contract_error);
}

TEST_CASE("batch norm gradients match finite differences") {
    Rng rng(9);
    for (int trial = 0; trial < 3; ++trial) {
        BatchNormLayer bn(4);
        check_layer_gradients(bn, random_tensor(rng, {6, 4}), rng);
    }
}

TEST_CASE("global average pool examples") {
    GlobalAvgPoolLayer gap;
    Tensor constant = Tensor::full({1, 3, 5, 2}, 7.0);
    Tensor out = gap.forward(constant, Mode::Training);
    CHECK(out.at2(0, 0) == doctest::Approx(7.0));
    CHECK(out.at2(0, 1) == doctest::Approx(7.0));

    Tensor grid({1, 2, 2, 1}, {1, 2, 3, 4});
    out = gap.forward(grid, Mode::Training);
    CHECK(out.at2(0, 0) == doctest::Approx(2.5));

    const Tensor grad = gap.backward(Tensor({1, 1}, {8.0}));
    for (std::size_t i = 0; i < grad.size(); ++i)
        CHECK(grad[i] == doctest::Approx(2.0)); // 8 / (2·2)
}

TEST_CASE("global average pool gradients match finite differences") {
    Rng rng(10);
    GlobalAvgPoolLayer gap;
    check_layer_gradients(gap, random_tensor(rng, {2, 3, 4, 2}), rng);
}

TEST_CASE("he initialization hits the target stddev") {
    Rng rng(11);
    const Tensor big = he_initialize(rng, 50, {100000});
    double mean = 0.0;
    for (std::size_t i = 0; i < big.size(); ++i)
        mean += big[i];
    mean /= static_cast<double>(big.size());
    double var = 0.0;
    for (std::size_t i = 0; i < big.size(); ++i)
        var += (big[i] - mean) * (big[i] - mean);
    var /= static_cast<double>(big.size());
    const double target = 0.2; // sqrt(2/50)
    CHECK(std::abs(std::sqrt(var) - target) < 0.02 * target);
    CHECK(std::sqrt(2.0 / 2.0) == doctest::Approx(1.0));
    CHECK(std::sqrt(2.0 / 8.0) == doctest::Approx(0.5));
}

TEST_CASE("depthwise 1x1 of ones with identity pointwise is the identity") {
    Rng rng(12);
    DepthwiseSeparableConvLayer conv(3, 3, 1, 1, rng);
    auto params = conv.params();
    params[0]->value.fill(1.0); // depthwise 1×1×C of ones
    params[1]->value.fill(0.0);
    params[2]->value.fill(0.0);
    for (std::size_t c = 0; c < 3; ++c)
        params[2]->value.at2(c, c) = 1.0; // pointwise identity
    params[3]->value.fill(0.0);
    const Tensor x = random_tensor(rng, {2, 4, 5, 3});
    const Tensor out = conv.forward(x, Mode::Training);
    REQUIRE(out.same_shape(x));
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(out[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("3x3 all-ones depthwise sums 9c on interior pixels") {
    Rng rng(13);
    DepthwiseSeparableConvLayer conv(1, 1, 3, 1, rng);
    auto params = conv.params();
    params[0]->value.fill(1.0);
    params[1]->value.fill(0.0);
    params[2]->value = Tensor({1, 1}, {1.0});
    params[3]->value.fill(0.0);
    const double c = 0.7;
    const Tensor x = Tensor::full({1, 5, 5, 1}, c);
    const Tensor out = conv.forward(x, Mode::Training);
    for (std::size_t i = 1; i < 4; ++i)
        for (std::size_t j = 1; j < 4; ++j)
            CHECK(out.at4(0, i, j, 0) == doctest::Approx(9.0 * c));
}

TEST_CASE("depthwise-separable parameter count formula") {
    Rng rng(14);
    const std::size_t k = 3, c_in = 4, c_out = 6;
    DepthwiseSeparableConvLayer conv(c_in, c_out, k, 1, rng);
    CHECK(conv.param_count() == k * k * c_in + c_in * c_out + c_in + c_out);
    // strictly fewer than a standard conv with biases
    CHECK(conv.param_count() < k * k * c_in * c_out + c_out);
}

TEST_CASE("conv contract checks") {
    Rng rng(15);
    CHECK_THROWS_AS(DepthwiseSeparableConvLayer(2, 2, 2, 1, rng),
                    contract_error);
    CHECK_THROWS_AS(DepthwiseSeparableConvLayer(2, 2, 3, 3, rng),
                    contract_error);
    DepthwiseSeparableConvLayer conv(2, 4, 3, 1, rng);
    CHECK_THROWS_AS(conv.forward(Tensor({1, 4, 4, 3}), Mode::Training),
                    contract_error);
}

TEST_CASE("conv gradients match finite differences") {
    Rng rng(16);
    for (std::size_t stride : {std::size_t{1}, std::size_t{2}}) {
        DepthwiseSeparableConvLayer conv(2, 3, 3, stride, rng);
        check_layer_gradients(conv, random_tensor(rng, {2, 5, 4, 2}), rng);
    }
}

TEST_CASE("backward without forward is rejected") {
    Rng rng(17);
    DenseLayer layer(2, 2, false, rng);
    CHECK_THROWS_AS(layer.backward(Tensor({1, 2})), contract_error);
}

TEST_CASE("inference forward is a pure function") {
    Rng rng(18);
    Model model;
    model.embedding_dim = 4;
    model.layers.push_back(std::make_unique<DenseLayer>(3, 8, true, rng));
    model.layers.push_back(std::make_unique<ReluLayer>());
    model.layers.push_back(std::make_unique<DropoutLayer>(0.2));
    model.layers.push_back(std::make_unique<DenseLayer>(8, 4, false, rng));
    model.layers.push_back(std::make_unique<BatchNormLayer>(4));
    const Tensor x = random_tensor(rng, {5, 3});
    const Tensor a = model.forward(x, Mode::Inference);
    const Tensor b = model.forward(x, Mode::Inference);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i] == b[i]);
}

TEST_CASE("checkpoint round-trip restores parameters and buffers") {
    Rng rng(19);
    Model model;
    model.embedding_dim = 4;
    model.layers.push_back(std::make_unique<DenseLayer>(3, 8, true, rng));
    model.layers.push_back(std::make_unique<ReluLayer>());
    model.layers.push_back(std::make_unique<DenseLayer>(8, 4, false, rng));
    model.layers.push_back(std::make_unique<BatchNormLayer>(4));
    // push the running stats off their defaults
    model.forward(random_tensor(rng, {16, 3}), Mode::Training, &rng);

    const auto dir =
        std::filesystem::temp_directory_path() / "sphembed_ckpt_test";
    model.save(dir);
    Model restored = Model::load(dir);
    CHECK(restored.embedding_dim == 4);
    CHECK(restored.layers.size() == model.layers.size());

    const Tensor x = random_tensor(rng, {6, 3});
    const Tensor a = model.forward(x, Mode::Inference);
    const Tensor b = restored.forward(x, Mode::Inference);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i] == b[i]);
    std::filesystem::remove_all(dir);
}

TEST_SUITE_END();
