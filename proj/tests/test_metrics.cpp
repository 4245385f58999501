#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "grasplab/metrics.hpp"
#include "grasplab/tensor.hpp"

using namespace grasplab;

namespace {

// Independent oracle: tallies tp/fp/fn straight from the pair lists.
MetricsReport oracle_metrics(const std::vector<std::size_t>& preds,
                             const std::vector<std::size_t>& labels, std::size_t L) {
    MetricsReport r;
    r.recall.assign(L, 0.0);
    r.precision.assign(L, 0.0);
    r.f1.assign(L, 0.0);
    r.support.assign(L, 0);
    long double recall_sum = 0.0L, f1_sum = 0.0L;
    std::size_t supported = 0, hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == labels[i]) ++hits;
    }
    for (std::size_t c = 0; c < L; ++c) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            if (labels[i] == c && preds[i] == c) ++tp;
            if (labels[i] != c && preds[i] == c) ++fp;
            if (labels[i] == c && preds[i] != c) ++fn;
        }
        r.support[c] = static_cast<std::int64_t>(tp + fn);
        r.recall[c] = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
        r.precision[c] = (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
        r.f1[c] = (r.precision[c] + r.recall[c] > 0)
                      ? 2 * r.precision[c] * r.recall[c] / (r.precision[c] + r.recall[c])
                      : 0.0;
        if (tp + fn > 0) {
            ++supported;
            recall_sum += r.recall[c];
            f1_sum += r.f1[c];
        }
    }
    r.ga = static_cast<double>(hits) / static_cast<double>(preds.size());
    r.mrc = supported ? static_cast<double>(recall_sum / supported) : 0.0;
    r.mf1 = supported ? static_cast<double>(f1_sum / supported) : 0.0;
    return r;
}

}  // namespace

TEST_CASE("confusion matrix construction") {
    SUBCASE("perfect predictions are diagonal") {
        const std::vector<std::size_t> labels{0, 1, 2, 1, 0};
        const auto cm = confusion_matrix(labels, labels, 3);
        CHECK(cm.at(0, 0) == 2);
        CHECK(cm.at(1, 1) == 2);
        CHECK(cm.at(2, 2) == 1);
        CHECK(cm.total() == 5);
        for (std::size_t t = 0; t < 3; ++t)
            for (std::size_t p = 0; p < 3; ++p)
                if (t != p) CHECK(cm.at(t, p) == 0);
    }
    SUBCASE("hand-built [[5,0],[2,3]]") {
        std::vector<std::size_t> labels, preds;
        for (int i = 0; i < 5; ++i) { labels.push_back(0); preds.push_back(0); }
        for (int i = 0; i < 2; ++i) { labels.push_back(1); preds.push_back(0); }
        for (int i = 0; i < 3; ++i) { labels.push_back(1); preds.push_back(1); }
        const auto cm = confusion_matrix(preds, labels, 2);
        CHECK(cm.at(0, 0) == 5);
        CHECK(cm.at(0, 1) == 0);
        CHECK(cm.at(1, 0) == 2);
        CHECK(cm.at(1, 1) == 3);
        CHECK(cm.total() == static_cast<std::int64_t>(labels.size()));
    }
    SUBCASE("index out of range names the position") {
        try {
            confusion_matrix({0, 5}, {0, 1}, 2);
            FAIL("expected ContractError");
        } catch (const ContractError& e) {
            CHECK(std::string(e.what()).find("position 1") != std::string::npos);
        }
        CHECK_THROWS_AS(confusion_matrix({0}, {0, 1}, 2), ContractError);
    }
}

TEST_CASE("metrics on [[5,0],[2,3]]") {
    ConfusionMatrix cm;
    cm.num_classes = 2;
    cm.counts = {5, 0, 2, 3};
    const auto r = compute_metrics(cm);
    CHECK(r.ga == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(r.mrc == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(r.f1[0] == doctest::Approx(10.0 / 12.0).epsilon(1e-12));
    CHECK(r.f1[1] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(r.mf1 == doctest::Approx((10.0 / 12.0 + 0.75) / 2.0).epsilon(1e-12));
}

TEST_CASE("perfect diagonal gives all ones") {
    ConfusionMatrix cm;
    cm.num_classes = 3;
    cm.counts = {4, 0, 0, 0, 2, 0, 0, 0, 9};
    const auto r = compute_metrics(cm);
    CHECK(r.ga == 1.0);
    CHECK(r.mrc == 1.0);
    CHECK(r.mf1 == 1.0);
}

TEST_CASE("zero-support classes are excluded from macro averages") {
    // class 2 never appears as a true label
    ConfusionMatrix cm;
    cm.num_classes = 3;
    cm.counts = {3, 1, 0, 1, 3, 0, 0, 0, 0};
    const auto r = compute_metrics(cm);
    CHECK(r.support[2] == 0);
    CHECK(r.ga == doctest::Approx(6.0 / 8.0));
    CHECK(r.mrc == doctest::Approx(0.75));  // mean of 0.75, 0.75 over two classes
    // adding predicted-only counts for class 2 changes GA but not the exclusion
    cm.counts = {3, 1, 1, 1, 3, 0, 0, 0, 0};
    const auto r2 = compute_metrics(cm);
    CHECK(r2.mrc == doctest::Approx((0.6 + 0.75) / 2.0));
}

TEST_CASE("empty matrix is rejected") {
    ConfusionMatrix cm;
    cm.num_classes = 2;
    cm.counts = {0, 0, 0, 0};
    CHECK_THROWS_AS(compute_metrics(cm), ContractError);
}

TEST_CASE("matches the brute-force oracle on 1000 random instances") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 1000; ++trial) {
        std::uniform_int_distribution<std::size_t> ls(2, 6), ns(1, 40);
        const std::size_t L = ls(rng), n = ns(rng);
        std::uniform_int_distribution<std::size_t> cls(0, L - 1);
        std::vector<std::size_t> labels(n), preds(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = cls(rng);
            preds[i] = cls(rng);
        }
        const auto got = compute_metrics(confusion_matrix(preds, labels, L));
        const auto expected = oracle_metrics(preds, labels, L);
        REQUIRE(std::fabs(got.ga - expected.ga) <= 1e-12);
        REQUIRE(std::fabs(got.mrc - expected.mrc) <= 1e-12);
        REQUIRE(std::fabs(got.mf1 - expected.mf1) <= 1e-12);
        REQUIRE(got.ga >= 0.0);
        REQUIRE(got.ga <= 1.0);
        REQUIRE(got.mrc >= 0.0);
        REQUIRE(got.mrc <= 1.0);
        REQUIRE(got.mf1 >= 0.0);
        REQUIRE(got.mf1 <= 1.0);
    }
}

TEST_CASE("GA is invariant under simultaneous class permutation") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::size_t> cls(0, 3);
    std::vector<std::size_t> labels(60), preds(60);
    for (std::size_t i = 0; i < 60; ++i) {
        labels[i] = cls(rng);
        preds[i] = cls(rng);
    }
    const auto base = compute_metrics(confusion_matrix(preds, labels, 4));
    const std::vector<std::size_t> perm{2, 0, 3, 1};
    std::vector<std::size_t> plabels(60), ppreds(60);
    for (std::size_t i = 0; i < 60; ++i) {
        plabels[i] = perm[labels[i]];
        ppreds[i] = perm[preds[i]];
    }
    const auto permuted = compute_metrics(confusion_matrix(ppreds, plabels, 4));
    CHECK(base.ga == doctest::Approx(permuted.ga).epsilon(1e-15));
    CHECK(base.mrc == doctest::Approx(permuted.mrc).epsilon(1e-12));
    CHECK(base.mf1 == doctest::Approx(permuted.mf1).epsilon(1e-12));
}

TEST_CASE("serialization helpers") {
    ConfusionMatrix cm;
    cm.num_classes = 2;
    cm.counts = {5, 0, 2, 3};
    const auto r = compute_metrics(cm);
    const std::string j = metrics_to_json(r, "grasp");
    CHECK(j.find("\"task\": \"grasp\"") != std::string::npos);
    CHECK(j.find("\"ga\": 0.8") != std::string::npos);
    const std::string row = metrics_csv_row(r, "grasp");
    CHECK(row.substr(0, 6) == "grasp,");
}
