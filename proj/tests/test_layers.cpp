#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "grasplab/layers.hpp"

using namespace grasplab;

namespace {

Layer make_layer(std::vector<std::size_t> wshape, std::vector<double> w, std::vector<double> b,
                 Activation act) {
    Layer l;
    l.weight = Tensor(std::move(wshape), std::move(w));
    l.bias = Tensor({l.weight.dim(0)}, std::move(b));
    l.act = act;
    return l;
}

}  // namespace

TEST_CASE("identity layer reproduces its input") {
    LayerStack stack;
    stack.layers.push_back(
        make_layer({2, 2}, {1, 0, 0, 1}, {0, 0}, Activation::identity));
    const Tensor x({2}, {3.5, -1.25});
    const auto acts = eval_layer_stack(x, stack);
    REQUIRE(acts.size() == 2);
    CHECK(acts[0] == x);
    CHECK(acts[1] == x);
}

TEST_CASE("relu layer: W=[[1,1]], b=[0.5], x=[1,-2] gives [0]") {
    LayerStack stack;
    stack.layers.push_back(make_layer({1, 2}, {1, 1}, {0.5}, Activation::relu));
    const auto acts = eval_layer_stack(Tensor({2}, {1.0, -2.0}), stack);
    // pre-activation 1 - 2 + 0.5 = -0.5, relu clips to 0
    CHECK(acts[1].numel() == 1);
    CHECK(acts[1][0] == 0.0);
}

TEST_CASE("final softmax output sums to one") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-4.0, 4.0);
    LayerStack stack;
    std::vector<double> w(12), b(4);
    for (auto& v : w) v = dist(rng);
    for (auto& v : b) v = dist(rng);
    stack.layers.push_back(make_layer({4, 3}, w, b, Activation::softmax));
    for (int trial = 0; trial < 10; ++trial) {
        Tensor x({3}, {dist(rng), dist(rng), dist(rng)});
        const auto acts = eval_layer_stack(x, stack);
        double total = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(acts[1][i] > 0.0);
            total += acts[1][i];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("activation dims follow the stack and mismatches name the layer") {
    LayerStack stack;
    stack.layers.push_back(make_layer({3, 2}, {1, 0, 0, 1, 1, 1}, {0, 0, 0}, Activation::relu));
    stack.layers.push_back(make_layer({2, 3}, {1, 0, 0, 0, 1, 0}, {0, 0}, Activation::identity));
    const auto acts = eval_layer_stack(Tensor({2}, {1.0, 2.0}), stack);
    CHECK(acts[1].numel() == 3);
    CHECK(acts[2].numel() == 2);

    try {
        eval_layer_stack(Tensor({3}, {1, 2, 3}), stack);
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
    }

    LayerStack bad;
    bad.layers.push_back(make_layer({2, 2}, {1, 0, 0, 1}, {0, 0}, Activation::softmax));
    bad.layers.push_back(make_layer({2, 2}, {1, 0, 0, 1}, {0, 0}, Activation::identity));
    CHECK_THROWS_AS(eval_layer_stack(Tensor({2}, {1, 2}), bad), ConfigError);
}

TEST_CASE("eval_layer_stack is deterministic") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    LayerStack stack;
    std::vector<double> w(20), b(5);
    for (auto& v : w) v = dist(rng);
    for (auto& v : b) v = dist(rng);
    stack.layers.push_back(make_layer({5, 4}, w, b, Activation::relu));
    Tensor x({4}, {dist(rng), dist(rng), dist(rng), dist(rng)});
    const auto a1 = eval_layer_stack(x, stack);
    const auto a2 = eval_layer_stack(x, stack);
    CHECK(a1[1] == a2[1]);
}

TEST_CASE("conv_feature_map hand cases") {
    SUBCASE("all-ones image and kernel") {
        const Tensor img = Tensor::full({1, 3, 3}, 1.0);
        const Tensor kern = Tensor::full({1, 1, 2, 2}, 1.0);
        const Tensor out = conv_feature_map(img, kern, 1, {PoolSpec::Kind::none, 0, 0});
        CHECK(out.shape() == std::vector<std::size_t>{1, 2, 2});
        for (std::size_t i = 0; i < 4; ++i) CHECK(out[i] == 4.0);
    }
    SUBCASE("zero kernel annihilates") {
        const Tensor img = Tensor::full({1, 4, 4}, 3.0);
        const Tensor kern = Tensor({2, 1, 2, 2});
        const Tensor out = conv_feature_map(img, kern, 1, {PoolSpec::Kind::none, 0, 0});
        for (std::size_t i = 0; i < out.numel(); ++i) CHECK(out[i] == 0.0);
    }
    SUBCASE("max-pool 2x2 over [[1,2],[3,4]]") {
        const Tensor img({1, 3, 3}, {0, 0, 0, 0, 1, 2, 0, 3, 4});
        // 2x2 identity-ish kernel picking the bottom-right of each window
        const Tensor kern({1, 1, 2, 2}, {0, 0, 0, 1});
        const Tensor out = conv_feature_map(img, kern, 1, {PoolSpec::Kind::max, 2, 2});
        CHECK(out.shape() == std::vector<std::size_t>{1, 1, 1});
        CHECK(out[0] == 4.0);
    }
    SUBCASE("kernel larger than image errors") {
        CHECK_THROWS_AS(conv_feature_map(Tensor({1, 2, 2}), Tensor({1, 1, 3, 3}), 1,
                                         {PoolSpec::Kind::none, 0, 0}),
                        DimensionError);
    }
    SUBCASE("pool window must divide the feature map") {
        const Tensor img = Tensor::full({1, 4, 4}, 1.0);
        const Tensor kern = Tensor::full({1, 1, 2, 2}, 1.0);  // 3x3 map
        CHECK_THROWS_AS(conv_feature_map(img, kern, 1, {PoolSpec::Kind::max, 2, 2}),
                        DimensionError);
    }
    SUBCASE("mean pooling") {
        const Tensor img({1, 2, 2}, {1, 2, 3, 4});
        const Tensor kern({1, 1, 1, 1}, {1});
        const Tensor out = conv_feature_map(img, kern, 1, {PoolSpec::Kind::mean, 2, 2});
        CHECK(out[0] == 2.5);
    }
}
