#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grasplab/adam.hpp"

using namespace grasplab;

TEST_CASE("defaults follow the reported settings") {
    AdamConfig cfg;
    CHECK(cfg.lr == 0.001);
    CHECK(cfg.beta1 == 0.9);
    CHECK(cfg.beta2 == 0.999);
}

TEST_CASE("first step with unit gradient moves by about -lr") {
    std::vector<Tensor> params{Tensor({1})};
    AdamState state = AdamState::for_params(params);
    const Tensor g({1}, {1.0});
    adam_step(params, {&g}, state, AdamConfig{});
    // bias-corrected mhat = vhat = 1, so the step is lr/(1 + eps)
    CHECK(params[0][0] == doctest::Approx(-0.001).epsilon(1e-7));
    CHECK(state.step == 1);
}

TEST_CASE("zero gradient on fresh state leaves the parameter unchanged") {
    std::vector<Tensor> params{Tensor({3}, {1.0, -2.0, 0.5})};
    AdamState state = AdamState::for_params(params);
    const Tensor g({3});
    adam_step(params, {&g}, state, AdamConfig{});
    CHECK(params[0] == Tensor({3}, {1.0, -2.0, 0.5}));
}

TEST_CASE("parameters without gradients stay untouched, moments included") {
    std::vector<Tensor> params{Tensor({2}, {1.0, 1.0}), Tensor({2}, {2.0, 2.0})};
    AdamState state = AdamState::for_params(params);
    const Tensor g({2}, {1.0, -1.0});
    adam_step(params, {&g, nullptr}, state, AdamConfig{});
    CHECK(params[1] == Tensor({2}, {2.0, 2.0}));
    CHECK(state.m[1] == Tensor({2}));
    CHECK(params[0][0] < 1.0);
    CHECK(params[0][1] > 1.0);
}

TEST_CASE("two steps accumulate momentum consistently with the closed form") {
    std::vector<Tensor> params{Tensor({1})};
    AdamState state = AdamState::for_params(params);
    const Tensor g({1}, {2.0});
    const AdamConfig cfg;
    adam_step(params, {&g}, state, cfg);
    adam_step(params, {&g}, state, cfg);
    // m2 = 0.1*2*(1+0.9) = 0.38; v2 = 0.001*4*(1+0.999) = 0.0079960
    // mhat = 0.38/(1-0.81) = 2; vhat = 0.0079960/(1-0.998001) = 4.0
    const double expected_step2 = 0.001 * 2.0 / (std::sqrt(4.0) + cfg.eps);
    const double after_step1 = -0.001 * 1.0 / (1.0 + cfg.eps);
    CHECK(params[0][0] == doctest::Approx(after_step1 - expected_step2).epsilon(1e-9));
}

TEST_CASE("shape mismatches are rejected") {
    std::vector<Tensor> params{Tensor({2})};
    AdamState state = AdamState::for_params(params);
    const Tensor g({3});
    CHECK_THROWS_AS(adam_step(params, {&g}, state, AdamConfig{}), DimensionError);
    CHECK_THROWS_AS(adam_step(params, {}, state, AdamConfig{}), DimensionError);
}
