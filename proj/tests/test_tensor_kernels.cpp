#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>

#include "grasplab/kernels.hpp"
#include "grasplab/tensor.hpp"

using namespace grasplab;
namespace gk = grasplab::kernels;

TEST_CASE("tensor shape/value invariants") {
    Tensor t({2, 3});
    CHECK(t.numel() == 6);
    CHECK(t.shape_str() == "(2,3)");
    CHECK_THROWS_AS(Tensor({2, 3}, {1.0, 2.0}), DimensionError);

    CHECK(verification_mode());
    CHECK_THROWS_AS(Tensor({2}, {1.0, std::nan("")}), ContractError);
    CHECK_THROWS_AS(Tensor::full({2}, std::numeric_limits<double>::infinity()), ContractError);

    set_verification_mode(false);
    Tensor loose({1}, {std::numeric_limits<double>::infinity()});
    CHECK(std::isinf(loose[0]));
    set_verification_mode(true);
}

TEST_CASE("gemm matches hand arithmetic and transposes") {
    // A = [[1,2],[3,4]], B = [[5,6],[7,8]]
    const std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7, 8};
    std::vector<double> c(4);
    gk::gemm(a.data(), b.data(), c.data(), 2, 2, 2);
    CHECK(c == std::vector<double>{19, 22, 43, 50});

    gk::gemm(a.data(), b.data(), c.data(), 2, 2, 2, true, false);  // A^T B
    CHECK(c == std::vector<double>{26, 30, 38, 44});

    gk::gemm(a.data(), b.data(), c.data(), 2, 2, 2, false, true);  // A B^T
    CHECK(c == std::vector<double>{17, 23, 39, 53});
}

TEST_CASE("parallel kernels equal the serial reference bit-for-bit") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t m = 17 + trial, k = 23, n = 11;
        std::vector<double> a(m * k), b(k * n), c1(m * n), c2(m * n);
        for (auto& x : a) x = dist(rng);
        for (auto& x : b) x = dist(rng);
        gk::gemm(a.data(), b.data(), c1.data(), m, k, n);
        gk::serial::gemm(a.data(), b.data(), c2.data(), m, k, n);
        CHECK(std::memcmp(c1.data(), c2.data(), c1.size() * sizeof(double)) == 0);
    }

    const std::size_t C = 3, H = 20, W = 18, OC = 4, K = 3;
    std::vector<double> in(C * H * W), kern(OC * C * K * K), bias(OC);
    for (auto& x : in) x = dist(rng);
    for (auto& x : kern) x = dist(rng);
    for (auto& x : bias) x = dist(rng);
    const std::size_t OH = H - K + 1, OW = W - K + 1;
    std::vector<double> o1(OC * OH * OW), o2(o1.size());
    gk::conv2d(in.data(), kern.data(), bias.data(), o1.data(), C, H, W, OC, K, K, 1);
    gk::serial::conv2d(in.data(), kern.data(), bias.data(), o2.data(), C, H, W, OC, K, K, 1);
    CHECK(std::memcmp(o1.data(), o2.data(), o1.size() * sizeof(double)) == 0);

    std::vector<double> p1(C * (H / 2) * (W / 2)), p2(p1.size());
    std::vector<std::size_t> am1(p1.size()), am2(p1.size());
    gk::maxpool2d(in.data(), p1.data(), am1.data(), C, H, W, 2, 2);
    gk::serial::maxpool2d(in.data(), p2.data(), am2.data(), C, H, W, 2, 2);
    CHECK(p1 == p2);
    CHECK(am1 == am2);

    std::vector<double> s1(64), s2(64), logits(64);
    for (auto& x : logits) x = dist(rng) * 10.0;
    gk::softmax(logits.data(), s1.data(), logits.size());
    gk::serial::softmax(logits.data(), s2.data(), logits.size());
    CHECK(std::memcmp(s1.data(), s2.data(), s1.size() * sizeof(double)) == 0);
}

TEST_CASE("softmax is stabilized and normalized for large logits") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1e3, 1e3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> logits(6), probs(6);
        for (auto& x : logits) x = dist(rng);
        gk::softmax(logits.data(), probs.data(), 6);
        double total = 0.0;
        for (double p : probs) {
            CHECK(p > 0.0);
            CHECK(p < 1.0 + 1e-12);
            total += p;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("conv2d with stride matches direct enumeration") {
    // 1x5x5 ramp image, 1 kernel 2x2 of ones, stride 2 -> 2x2 window sums
    std::vector<double> in(25);
    for (std::size_t i = 0; i < 25; ++i) in[i] = static_cast<double>(i);
    const std::vector<double> kern{1, 1, 1, 1};
    std::vector<double> out(4);
    gk::conv2d(in.data(), kern.data(), nullptr, out.data(), 1, 5, 5, 1, 2, 2, 2);
    // windows at (0,0),(0,2),(2,0),(2,2): sums 0+1+5+6, 2+3+7+8, 10+11+15+16, 12+13+17+18
    CHECK(out == std::vector<double>{12, 20, 52, 60});
}

TEST_CASE("pooling forward/backward bookkeeping") {
    const std::vector<double> in{1, 2, 3, 4};
    std::vector<double> out(1);
    std::vector<std::size_t> argmax(1);
    gk::maxpool2d(in.data(), out.data(), argmax.data(), 1, 2, 2, 2, 2);
    CHECK(out[0] == 4.0);
    CHECK(argmax[0] == 3);

    std::vector<double> din(4);
    const std::vector<double> dout{5.0};
    gk::maxpool2d_grad(dout.data(), argmax.data(), din.data(), 1, 2, 2, 2, 2);
    CHECK(din == std::vector<double>{0, 0, 0, 5});

    gk::meanpool2d(in.data(), out.data(), 1, 2, 2, 2, 2);
    CHECK(out[0] == 2.5);
    gk::meanpool2d_grad(dout.data(), din.data(), 1, 2, 2, 2, 2);
    CHECK(din == std::vector<double>{1.25, 1.25, 1.25, 1.25});
}
