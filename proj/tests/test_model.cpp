#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "grasplab/model.hpp"

using namespace grasplab;

namespace {

ArchConfig tiny_mlp_arch() {
    ArchConfig cfg;
    cfg.in_channels = 1;
    cfg.in_height = 4;
    cfg.in_width = 4;
    cfg.category_extractor = ExtractorKind::mlp;
    cfg.grasp_extractor = ExtractorKind::mlp;
    cfg.category_extractor_fc = {8};
    cfg.category_classifier_fc = {};
    cfg.grasp_extractor_fc = {6};
    cfg.grasp_classifier_fc = {5};
    cfg.num_categories = 4;
    cfg.num_grasps = 3;
    cfg.seed = 42;
    return cfg;
}

Tensor random_image(const ArchConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 255.0);
    Tensor x({cfg.in_channels, cfg.in_height, cfg.in_width});
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = dist(rng);
    return x;
}

}  // namespace

TEST_CASE("init_model is seed-deterministic") {
    const ArchConfig cfg = tiny_mlp_arch();
    const ModelParams a = init_model(cfg);
    const ModelParams b = init_model(cfg);
    REQUIRE(a.theta1.tensors.size() == b.theta1.tensors.size());
    for (std::size_t i = 0; i < a.theta1.tensors.size(); ++i) {
        CHECK(a.theta1.tensors[i] == b.theta1.tensors[i]);
    }
    for (std::size_t i = 0; i < a.theta4.tensors.size(); ++i) {
        CHECK(a.theta4.tensors[i] == b.theta4.tensors[i]);
    }

    ArchConfig other = cfg;
    other.seed = 43;
    const ModelParams c = init_model(other);
    CHECK_FALSE(a.theta1.tensors[0] == c.theta1.tensors[0]);
}

TEST_CASE("parameter count: mlp extractor 16->8 plus classifier 8->4 is 172") {
    ArchConfig cfg;
    cfg.in_channels = 1;
    cfg.in_height = 4;
    cfg.in_width = 4;  // flat 16
    cfg.category_extractor = ExtractorKind::mlp;
    cfg.grasp_extractor = ExtractorKind::mlp;
    cfg.category_extractor_fc = {8};
    cfg.category_classifier_fc = {};
    cfg.grasp_extractor_fc = {2};
    cfg.grasp_classifier_fc = {};
    cfg.num_categories = 4;
    cfg.num_grasps = 2;
    const ModelParams p = init_model(cfg);
    CHECK(p.theta1.total_params() == 16 * 8 + 8);
    CHECK(p.theta2.total_params() == 8 * 4 + 4);
    CHECK(p.theta1.total_params() + p.theta2.total_params() == 172);
}

TEST_CASE("biases start at zero, weights within the init bound") {
    const ArchConfig cfg = tiny_mlp_arch();
    const ModelParams p = init_model(cfg);
    // theta1 = [fc0.w, fc0.b]; bound sqrt(6/(16+8))
    const double bound = std::sqrt(6.0 / (16.0 + 8.0));
    const Tensor& w = p.theta1.tensors[0];
    for (std::size_t i = 0; i < w.numel(); ++i) {
        CHECK(std::fabs(w[i]) <= bound);
    }
    const Tensor& b = p.theta1.tensors[1];
    for (std::size_t i = 0; i < b.numel(); ++i) CHECK(b[i] == 0.0);
}

TEST_CASE("config errors: zero dims rejected") {
    ArchConfig cfg = tiny_mlp_arch();
    cfg.category_extractor_fc = {8, 0};
    CHECK_THROWS_AS(init_model(cfg), ConfigError);

    cfg = tiny_mlp_arch();
    cfg.num_categories = 0;
    CHECK_THROWS_AS(init_model(cfg), ConfigError);

    cfg = tiny_mlp_arch();
    cfg.category_extractor = ExtractorKind::smallcnn;
    cfg.pool_window = 5;  // does not divide the 2x2 conv output... kernel too big anyway
    CHECK_THROWS_AS(init_model(cfg), ConfigError);
}

TEST_CASE("forward probabilities sum to one and are deterministic") {
    const ArchConfig cfg = tiny_mlp_arch();
    const ModelParams p = init_model(cfg);
    const Tensor x = random_image(cfg, 7);
    const ForwardTrace t = forward_trace(x, cfg, p);
    double so = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < t.f_o.numel(); ++i) so += t.f_o[i];
    for (std::size_t i = 0; i < t.f_g.numel(); ++i) sg += t.f_g[i];
    CHECK(so == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sg == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.i_concat.numel() == t.i_grasp.numel() + t.i_category.numel());

    const ForwardTrace t2 = forward_trace(x, cfg, p);
    CHECK(t.f_o == t2.f_o);
    CHECK(t.f_g == t2.f_g);
}

TEST_CASE("hand-set single-pixel model produces exact softmax outputs") {
    ArchConfig cfg;
    cfg.in_channels = 1;
    cfg.in_height = 1;
    cfg.in_width = 1;
    cfg.category_extractor = ExtractorKind::mlp;
    cfg.grasp_extractor = ExtractorKind::mlp;
    cfg.category_extractor_fc = {};
    cfg.category_classifier_fc = {};
    cfg.grasp_extractor_fc = {};
    cfg.grasp_classifier_fc = {};
    cfg.num_categories = 2;
    cfg.num_grasps = 2;
    ModelParams p = init_model(cfg);

    // I_category = x/255 = [1]; category logits = [ln 3, 0] -> f_o = [0.75, 0.25]
    p.theta2.tensors[0] = Tensor({2, 1}, {std::log(3.0), 0.0});
    p.theta2.tensors[1] = Tensor({2});
    // single constant pixel: grasp normalization collapses to zeros, so
    // I_grasp = [0] and I = [0, 1]; grasp logits = [0, ln 3] -> f_g = [0.25, 0.75]
    p.theta4.tensors[0] = Tensor({2, 2}, {0.0, 0.0, 0.0, std::log(3.0)});
    p.theta4.tensors[1] = Tensor({2});

    const Tensor x({1, 1, 1}, {255.0});
    const ForwardTrace t = forward_trace(x, cfg, p);
    CHECK(t.i_category[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t.i_grasp[0] == 0.0);
    CHECK(t.f_o[0] == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(t.f_o[1] == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(t.f_g[0] == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(t.f_g[1] == doctest::Approx(0.75).epsilon(1e-10));

    const auto [cat, grasp] = predict(x, cfg, p);
    CHECK(cat == 0);
    CHECK(grasp == 1);
}

TEST_CASE("parameter groups are isolated") {
    const ArchConfig cfg = tiny_mlp_arch();
    ModelParams p = init_model(cfg);
    const Tensor x = random_image(cfg, 11);
    const auto [i_cat_before, f_o_before] = forward_category(x, cfg, p.theta1, p.theta2);

    // clobber theta3/theta4: f_o must stay bit-identical
    for (auto& t : p.theta3.tensors) t.fill(0.123);
    for (auto& t : p.theta4.tensors) t.fill(-0.5);
    const auto [i_cat_after, f_o_after] = forward_category(x, cfg, p.theta1, p.theta2);
    CHECK(f_o_before == f_o_after);
    CHECK(i_cat_before == i_cat_after);

    // f_g depends on theta1 through I_category
    ModelParams q = init_model(cfg);
    const ForwardTrace t1 = forward_trace(x, cfg, q);
    q.theta1.tensors[0][0] += 0.25;
    const ForwardTrace t2 = forward_trace(x, cfg, q);
    CHECK_FALSE(t1.f_g == t2.f_g);
}

TEST_CASE("graph forward equals the no-grad forward bit-for-bit") {
    for (ExtractorKind kind : {ExtractorKind::mlp, ExtractorKind::smallcnn}) {
        ArchConfig cfg = tiny_mlp_arch();
        cfg.category_extractor = kind;
        cfg.grasp_extractor = kind;
        if (kind == ExtractorKind::smallcnn) {
            cfg.in_height = 8;
            cfg.in_width = 8;
            cfg.conv_channels1 = 2;
            cfg.conv_channels2 = 3;
            cfg.category_extractor_fc = {8};
            cfg.grasp_extractor_fc = {};
        }
        const ModelParams p = init_model(cfg);
        const Tensor x = random_image(cfg, 13);
        const ForwardTrace t = forward_trace(x, cfg, p);
        const ParamNodes nodes = make_param_nodes(p, true, true, true, true);
        const ModelGraph g = forward_graph(x, cfg, nodes);
        CHECK(g.f_o->value == t.f_o);
        CHECK(g.f_g->value == t.f_g);
        CHECK(g.i_category->value == t.i_category);
        CHECK(g.i_grasp->value == t.i_grasp);
    }
}

TEST_CASE("argmax tie-break picks the lowest index") {
    CHECK(argmax_lowest(Tensor({3}, {0.1, 0.7, 0.2})) == 1);
    CHECK(argmax_lowest(Tensor({2}, {0.5, 0.5})) == 0);
    CHECK(argmax_lowest(Tensor({4}, {0.3, 0.3, 0.3, 0.1})) == 0);
}

TEST_CASE("input shape mismatches raise dimension errors") {
    const ArchConfig cfg = tiny_mlp_arch();
    const ModelParams p = init_model(cfg);
    CHECK_THROWS_AS(forward_trace(Tensor({1, 3, 3}), cfg, p), DimensionError);
    CHECK_THROWS_AS(forward_grasp(random_image(cfg, 3), Tensor({99}), cfg, p.theta3, p.theta4),
                    DimensionError);
}

TEST_CASE("checkpoint round-trips arch and parameters exactly") {
    ArchConfig cfg = tiny_mlp_arch();
    cfg.grasp_norm = NormMode::as_written;
    const ModelParams p = init_model(cfg);
    const auto path = std::filesystem::temp_directory_path() / "grasplab_test_ckpt.bin";
    save_checkpoint(path.string(), cfg, p);
    auto [cfg2, p2] = load_checkpoint(path.string());
    std::filesystem::remove(path);

    CHECK(cfg2.num_categories == cfg.num_categories);
    CHECK(cfg2.num_grasps == cfg.num_grasps);
    CHECK(cfg2.grasp_norm == NormMode::as_written);
    CHECK(cfg2.category_extractor_fc == cfg.category_extractor_fc);
    CHECK(extractor_name(cfg2.category_extractor) == "mlp");

    for (const auto& groups : {std::pair{&p.theta1, &p2.theta1}, {&p.theta2, &p2.theta2},
                               {&p.theta3, &p2.theta3}, {&p.theta4, &p2.theta4}}) {
        REQUIRE(groups.first->tensors.size() == groups.second->tensors.size());
        for (std::size_t i = 0; i < groups.first->tensors.size(); ++i) {
            REQUIRE(groups.first->tensors[i] == groups.second->tensors[i]);
            REQUIRE(groups.first->names[i] == groups.second->names[i]);
        }
    }

    const Tensor x = random_image(cfg, 21);
    CHECK(forward_trace(x, cfg, p).f_g == forward_trace(x, cfg2, p2).f_g);
}

TEST_CASE("load_checkpoint rejects foreign files") {
    const auto path = std::filesystem::temp_directory_path() / "grasplab_bad_ckpt.bin";
    { std::FILE* f = std::fopen(path.c_str(), "wb"); std::fputs("not a checkpoint", f); std::fclose(f); }
    CHECK_THROWS_AS(load_checkpoint(path.string()), ConfigError);
    std::filesystem::remove(path);
}
