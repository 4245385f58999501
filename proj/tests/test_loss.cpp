#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "grasplab/loss.hpp"
#include "grasplab/verify.hpp"

using namespace grasplab;

namespace {

// Brute-force conditional-probability oracle: nested map counting plus long
// double normalization, independent of estimate_cond_matrix's layout.
Tensor oracle_w_hat(const std::vector<LabelPair>& labels, std::size_t l_o, std::size_t l_g,
                    std::vector<std::size_t>* fallback_rows) {
    Tensor w({l_o, l_g});
    for (std::size_t i = 0; i < l_o; ++i) {
        long double row_total = 0.0L;
        std::vector<long double> row(l_g, 0.0L);
        for (const auto& [cat, grasp] : labels) {
            if (cat == i && grasp.has_value()) {
                row[*grasp] += 1.0L;
                row_total += 1.0L;
            }
        }
        if (row_total == 0.0L) {
            if (fallback_rows) fallback_rows->push_back(i);
            for (std::size_t j = 0; j < l_g; ++j) {
                w.at2(i, j) = 1.0 / static_cast<double>(l_g);
            }
        } else {
            for (std::size_t j = 0; j < l_g; ++j) {
                w.at2(i, j) = static_cast<double>(row[j] / row_total);
            }
        }
    }
    return w;
}

std::vector<double> oracle_batch_std(const Tensor& gammas) {
    const std::size_t H = gammas.dim(0), L = gammas.dim(1);
    std::vector<double> out(L);
    for (std::size_t i = 0; i < L; ++i) {
        long double mean = 0.0L;
        for (std::size_t h = 0; h < H; ++h) mean += gammas.at2(h, i);
        mean /= H;
        long double var = 0.0L;
        for (std::size_t h = 0; h < H; ++h) {
            const long double d = gammas.at2(h, i) - mean;
            var += d * d;
        }
        out[i] = static_cast<double>(std::sqrt(var / H));
    }
    return out;
}

}  // namespace

TEST_CASE("conditional matrix hand cases") {
    SUBCASE("counts [[2,2],[0,4]]") {
        std::vector<LabelPair> labels;
        labels.emplace_back(0, 0);
        labels.emplace_back(0, 0);
        labels.emplace_back(0, 1);
        labels.emplace_back(0, 1);
        for (int i = 0; i < 4; ++i) labels.emplace_back(1, 1);
        const auto w = estimate_cond_matrix(labels, 2, 2);
        CHECK(w.w_hat.at2(0, 0) == 0.5);
        CHECK(w.w_hat.at2(0, 1) == 0.5);
        CHECK(w.w_hat.at2(1, 0) == 0.0);
        CHECK(w.w_hat.at2(1, 1) == 1.0);
        CHECK(w.counts == std::vector<std::int64_t>{2, 2, 0, 4});
        CHECK(w.uniform_rows.empty());
    }
    SUBCASE("degenerate one category, one grasp") {
        const auto w = estimate_cond_matrix({{0, 0}}, 1, 1);
        CHECK(w.w_hat.at2(0, 0) == 1.0);
    }
    SUBCASE("unlabeled samples are not counted") {
        std::vector<LabelPair> labels{{0, 0}, {0, 1}, {1, 1}, {0, std::nullopt},
                                      {1, std::nullopt}};
        const auto w = estimate_cond_matrix(labels, 2, 2);
        CHECK(w.counts == std::vector<std::int64_t>{1, 1, 0, 1});
    }
    SUBCASE("zero-count rows fall back to uniform with a record") {
        const auto w = estimate_cond_matrix({{0, 1}}, 2, 3);
        CHECK(w.uniform_rows == std::vector<std::size_t>{1});
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(w.w_hat.at2(1, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        }
    }
    SUBCASE("config errors") {
        CHECK_THROWS_AS(estimate_cond_matrix({{0, 0}}, 0, 2), ConfigError);
        CHECK_THROWS_AS(estimate_cond_matrix({}, 2, 2), ConfigError);
    }
}

TEST_CASE("conditional matrix equals the brute-force oracle on 1000 random datasets") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        std::uniform_int_distribution<std::size_t> lo(1, 5), lg(1, 4), n(1, 30);
        const std::size_t l_o = lo(rng), l_g = lg(rng);
        std::uniform_int_distribution<std::size_t> cat(0, l_o - 1), grasp(0, l_g - 1);
        std::bernoulli_distribution missing(0.25);
        std::vector<LabelPair> labels;
        const std::size_t count = n(rng);
        for (std::size_t i = 0; i < count; ++i) {
            labels.emplace_back(cat(rng), missing(rng)
                                              ? std::optional<std::size_t>{}
                                              : std::optional<std::size_t>{grasp(rng)});
        }
        const auto w = estimate_cond_matrix(labels, l_o, l_g);
        std::vector<std::size_t> oracle_fallback;
        const Tensor expected = oracle_w_hat(labels, l_o, l_g, &oracle_fallback);
        for (std::size_t i = 0; i < l_o * l_g; ++i) {
            REQUIRE(std::fabs(w.w_hat[i] - expected[i]) <= 1e-12);
        }
        CHECK(w.uniform_rows == oracle_fallback);
        for (std::size_t i = 0; i < l_o; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < l_g; ++j) row += w.w_hat.at2(i, j);
            REQUIRE(std::fabs(row - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("gamma residual hand cases and linearity") {
    CondProbMatrix w;
    w.num_categories = 2;
    w.num_grasps = 2;
    w.w_hat = Tensor({2, 2}, {0.5, 0.5, 0.5, 0.5});

    SUBCASE("uniform rows") {
        const Tensor g = gamma(Tensor({2}, {0.9, 0.1}), Tensor({2}, {0.3, 0.7}), w);
        CHECK(g[0] == doctest::Approx(0.4).epsilon(1e-15));
        CHECK(g[1] == doctest::Approx(-0.4).epsilon(1e-15));
    }
    SUBCASE("identity matrix") {
        w.w_hat = Tensor({2, 2}, {1, 0, 0, 1});
        const Tensor g = gamma(Tensor({2}, {0.3, 0.7}), Tensor({2}, {0.2, 0.8}), w);
        CHECK(g[0] == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(g[1] == doctest::Approx(-0.1).epsilon(1e-12));
    }
    SUBCASE("consistent predictions zero out") {
        w.w_hat = Tensor({2, 2}, {0.25, 0.75, 0.6, 0.4});
        const Tensor f_g({2}, {0.5, 0.5});
        Tensor f_o({2});
        for (std::size_t i = 0; i < 2; ++i) {
            f_o[i] = w.w_hat.at2(i, 0) * f_g[0] + w.w_hat.at2(i, 1) * f_g[1];
        }
        const Tensor g = gamma(f_o, f_g, w);
        CHECK(std::fabs(g[0]) <= 1e-15);
        CHECK(std::fabs(g[1]) <= 1e-15);
    }
    SUBCASE("linearity: gamma(a f_o, f_g) - a gamma(f_o, f_g) == (a-1) W f_g") {
        // with gamma = f_o - W f_g the residual of scaling f_o is (a-1) * (W f_g)
        std::mt19937_64 rng(88);
        std::uniform_real_distribution<double> dist(0.05, 1.0);
        for (int trial = 0; trial < 200; ++trial) {
            w.w_hat = Tensor({2, 2});
            for (std::size_t i = 0; i < 2; ++i) {
                const double p = dist(rng);
                w.w_hat.at2(i, 0) = p / (p + dist(rng));
                w.w_hat.at2(i, 1) = 1.0 - w.w_hat.at2(i, 0);
            }
            Tensor f_o({2}, {dist(rng), dist(rng)});
            Tensor f_g({2}, {dist(rng), dist(rng)});
            const double a = dist(rng) * 3.0;
            Tensor af_o({2}, {a * f_o[0], a * f_o[1]});
            const Tensor lhs_a = gamma(af_o, f_g, w);
            const Tensor lhs_b = gamma(f_o, f_g, w);
            for (std::size_t i = 0; i < 2; ++i) {
                const double wf = w.w_hat.at2(i, 0) * f_g[0] + w.w_hat.at2(i, 1) * f_g[1];
                const double expected = (a - 1.0) * wf;
                REQUIRE(std::fabs((lhs_a[i] - a * lhs_b[i]) - expected) <= 1e-12);
            }
        }
    }
    SUBCASE("linearity in f_g: gamma(f_o, a f_g) - a gamma(f_o, f_g) == (1-a) f_o") {
        std::mt19937_64 rng(89);
        std::uniform_real_distribution<double> dist(0.05, 1.0);
        w.w_hat = Tensor({2, 2}, {0.7, 0.3, 0.2, 0.8});
        for (int trial = 0; trial < 200; ++trial) {
            Tensor f_o({2}, {dist(rng), dist(rng)});
            Tensor f_g({2}, {dist(rng), dist(rng)});
            const double a = dist(rng) * 2.0;
            Tensor af_g({2}, {a * f_g[0], a * f_g[1]});
            const Tensor lhs_a = gamma(f_o, af_g, w);
            const Tensor lhs_b = gamma(f_o, f_g, w);
            for (std::size_t i = 0; i < 2; ++i) {
                REQUIRE(std::fabs((lhs_a[i] - a * lhs_b[i]) - (1.0 - a) * f_o[i]) <= 1e-12);
            }
        }
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(gamma(Tensor({3}), Tensor({2}), w), DimensionError);
    }
}

TEST_CASE("joint cross-entropy") {
    SUBCASE("perfect predictions give zero") {
        CHECK(jce_loss(one_hot(0, 2), one_hot(1, 2), Tensor({2}, {1.0, 0.0}),
                       Tensor({2}, {0.0, 1.0})) == 0.0);
    }
    SUBCASE("hand value -ln 0.5 - ln 0.75") {
        const double v = jce_loss(one_hot(0, 2), one_hot(1, 2), Tensor({2}, {0.5, 0.5}),
                                  Tensor({2}, {0.25, 0.75}));
        CHECK(v == doctest::Approx(0.980829253).epsilon(1e-9));
    }
    SUBCASE("missing grasp label contributes only the category term") {
        const double v = jce_loss(one_hot(0, 2), zero_label(2), Tensor({2}, {0.5, 0.5}),
                                  Tensor({2}, {0.25, 0.75}));
        CHECK(v == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
    }
    SUBCASE("both labels zero gives exactly zero") {
        CHECK(jce_loss(zero_label(3), zero_label(2), Tensor({3}, {0.2, 0.3, 0.5}),
                       Tensor({2}, {0.5, 0.5})) == 0.0);
    }
    SUBCASE("probabilities outside [0,1] are rejected") {
        CHECK_THROWS_AS(jce_loss(one_hot(0, 2), one_hot(0, 2), Tensor({2}, {1.5, -0.5}),
                                 Tensor({2}, {0.5, 0.5})),
                        ContractError);
    }
    SUBCASE("zero probability is clamped, not infinite") {
        const double v = jce_loss(one_hot(0, 2), zero_label(2), Tensor({2}, {0.0, 1.0}),
                                  Tensor({2}, {0.5, 0.5}));
        CHECK(v == doctest::Approx(-std::log(kProbClamp)));
    }
}

TEST_CASE("regularizer weight") {
    SigmaState s = SigmaState::initial(2);
    CHECK(regularizer_weight(s) == 0.0);  // sigma = +inf

    s.sigma = {1.0, 1.0};
    CHECK(regularizer_weight(s) == doctest::Approx(0.5).epsilon(1e-15));
    s.sigma = {0.5, 2.0};
    CHECK(regularizer_weight(s) == doctest::Approx(0.5).epsilon(1e-15));

    s.sigma = {1e-5, 1e-5};
    CHECK(regularizer_weight(s) == kDefaultLambdaMax);  // clamped
    CHECK(regularizer_weight(s, 7.0) == 7.0);

    // log-space evaluation survives many tiny or huge coordinates
    s.sigma.assign(400, 1e-3);
    CHECK(regularizer_weight(s) == kDefaultLambdaMax);
    s.sigma.assign(400, 1e3);
    CHECK(regularizer_weight(s) >= 0.0);
    CHECK(regularizer_weight(s) < 1e-300 + 1.0);

    s.sigma = {1.0, -0.5};
    CHECK_THROWS_AS(regularizer_weight(s), ContractError);
}

TEST_CASE("jcear loss composition") {
    CondProbMatrix w;
    w.num_categories = 2;
    w.num_grasps = 2;
    w.w_hat = Tensor({2, 2}, {1, 0, 0, 1});

    const Tensor c_o = one_hot(0, 2), c_g = one_hot(1, 2);
    const Tensor f_o({2}, {0.5, 0.5}), f_g({2}, {0.25, 0.75});
    // gamma = f_o - f_g = [0.25, -0.25]

    SUBCASE("sigma at infinity reduces to pure JCE") {
        const auto lb = jcear_loss(c_o, c_g, f_o, f_g, w, SigmaState::initial(2));
        CHECK(lb.lambda == 0.0);
        CHECK(lb.total == lb.jce);
        CHECK(lb.penalty == doctest::Approx(0.125).epsilon(1e-12));
    }
    SUBCASE("hand-composed total") {
        // gamma [0.1,-0.1] via W rows [0.5,0.5]
        CondProbMatrix wu = w;
        wu.w_hat = Tensor({2, 2}, {0.5, 0.5, 0.5, 0.5});
        const Tensor f_o2({2}, {0.6, 0.4});
        // W f_g = [0.5, 0.5]; gamma = [0.1, -0.1]; penalty = 0.02
        SigmaState s = SigmaState::initial(2);
        s.sigma = {1.0, 1.0};
        const auto lb = jcear_loss(c_o, c_g, f_o2, f_g, wu, s);
        CHECK(lb.lambda == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(lb.penalty == doctest::Approx(0.02).epsilon(1e-12));
        CHECK(lb.total == doctest::Approx(lb.jce + 0.01).epsilon(1e-12));
        CHECK(lb.total >= 0.0);
    }
    SUBCASE("totals are non-negative for random probability inputs") {
        std::mt19937_64 rng(4123);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        SigmaState s = SigmaState::initial(2);
        s.sigma = {0.3, 0.8};
        for (int trial = 0; trial < 100; ++trial) {
            double a = dist(rng), b = dist(rng);
            Tensor fo({2}, {a, 1.0 - a}), fg({2}, {b, 1.0 - b});
            const auto lb = jcear_loss(one_hot(trial % 2, 2), one_hot((trial / 2) % 2, 2), fo,
                                       fg, w, s);
            REQUIRE(lb.total >= 0.0);
            REQUIRE(lb.total ==
                    doctest::Approx(lb.jce + lb.lambda * lb.penalty).epsilon(1e-12));
        }
    }
}

TEST_CASE("sigma batch statistics") {
    SUBCASE("constant residual has zero deviation") {
        // dyadic values keep the mean exact, so the deviation is exactly zero
        Tensor g({3, 2});
        for (std::size_t h = 0; h < 3; ++h) {
            g.at2(h, 0) = 0.75;
            g.at2(h, 1) = -0.25;
        }
        const auto s = sigma_batch_stat(g);
        CHECK(s[0] == 0.0);
        CHECK(s[1] == 0.0);
    }
    SUBCASE("values {0,2} give sigma 1") {
        Tensor g({2, 1}, {0.0, 2.0});
        CHECK(sigma_batch_stat(g)[0] == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("values {1,2,3} give sqrt(2/3)") {
        Tensor g({3, 1}, {1.0, 2.0, 3.0});
        CHECK(sigma_batch_stat(g)[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    }
    SUBCASE("empty batch rejected") {
        CHECK_THROWS_AS(sigma_batch_stat(Tensor({0, 2})), ContractError);
    }
    SUBCASE("matches long-double oracle on 1000 random batches") {
        std::mt19937_64 rng(555);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::uniform_int_distribution<std::size_t> hs(1, 12), ls(1, 5);
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t H = hs(rng), L = ls(rng);
            Tensor g({H, L});
            for (std::size_t i = 0; i < g.numel(); ++i) g[i] = dist(rng);
            const auto got = sigma_batch_stat(g);
            const auto expected = oracle_batch_std(g);
            for (std::size_t i = 0; i < L; ++i) {
                REQUIRE(std::fabs(got[i] - expected[i]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("sigma epoch update") {
    SigmaState s = SigmaState::initial(2);

    SUBCASE("single batch passes through, floored") {
        const auto next = sigma_epoch_update({{0.5, 0.0}}, s);
        CHECK(next.sigma[0] == 0.5);
        CHECK(next.sigma[1] == s.floor);
        CHECK(next.t == 1);
    }
    SUBCASE("mean of batch stats") {
        const auto next = sigma_epoch_update({{1.0, 1.0}, {3.0, 2.0}}, s);
        CHECK(next.sigma[0] == doctest::Approx(2.0));
        CHECK(next.sigma[1] == doctest::Approx(1.5));
    }
    SUBCASE("all-zero stats land on the floor") {
        const auto next = sigma_epoch_update({{0.0, 0.0}, {0.0, 0.0}}, s);
        CHECK(next.sigma[0] == kDefaultSigmaFloor);
        CHECK(next.sigma[1] == kDefaultSigmaFloor);
    }
    SUBCASE("length mismatch rejected") {
        CHECK_THROWS_AS(sigma_epoch_update({{1.0, 2.0, 3.0}}, s), DimensionError);
        CHECK_THROWS_AS(sigma_epoch_update({}, s), ContractError);
    }
    SUBCASE("repeated updates keep every coordinate above the floor") {
        SigmaState cur = SigmaState::initial(3);
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> dist(0.0, 0.4);
        for (int t = 0; t < 10; ++t) {
            std::vector<std::vector<double>> stats;
            for (int k = 0; k < 4; ++k) stats.push_back({dist(rng), 0.0, dist(rng)});
            cur = sigma_epoch_update(stats, cur);
            for (double v : cur.sigma) REQUIRE(v >= cur.floor);
        }
        CHECK(cur.t == 10);
    }
}

TEST_CASE("full-loss autodiff gradients track finite differences") {
    const auto result = jcear_gradcheck(123, 6, 1e-5);
    CHECK(result.max_rel <= 1e-4);
}

TEST_CASE("w_hat exports as csv with a grasp-name header") {
    std::vector<LabelPair> labels{{0, 0}, {0, 1}, {1, 1}};
    const auto w = estimate_cond_matrix(labels, 2, 2);
    std::ostringstream os;
    write_w_hat_csv(w, os, {"pinch", "tripod"});
    const std::string text = os.str();
    CHECK(text.find("pinch,tripod\n") == 0);
    CHECK(text.find("0.5,0.5") != std::string::npos);
    CHECK(text.find("0,1") != std::string::npos);

    std::ostringstream os2;
    write_w_hat_csv(w, os2);
    CHECK(os2.str().find("grasp_0,grasp_1\n") == 0);
}
