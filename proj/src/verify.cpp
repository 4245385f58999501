#include "grasplab/verify.hpp"

#include <random>

#include "grasplab/gradcheck.hpp"
#include "grasplab/loss.hpp"

namespace grasplab {

namespace {

std::vector<Tensor*> all_param_ptrs(ModelParams& params) {
    std::vector<Tensor*> ptrs;
    for (auto* g : {&params.theta1, &params.theta2, &params.theta3, &params.theta4}) {
        for (auto& t : g->tensors) ptrs.push_back(&t);
    }
    return ptrs;
}

std::vector<Tensor> autodiff_grads(const ArchConfig& arch, const ModelParams& params,
                                   const Tensor& x, const Tensor& c_o, const Tensor& c_g,
                                   const CondProbMatrix& w, double lambda) {
    ParamNodes nodes = make_param_nodes(params, true, true, true, true);
    ModelGraph g = forward_graph(x, arch, nodes);
    ag::NodePtr w_node = lambda > 0.0 ? ag::constant(w.w_hat) : nullptr;
    SampleLoss sl =
        build_sample_loss(g.logits_o, g.logits_g, g.f_o, g.f_g, c_o, c_g, w_node, w, lambda);
    ag::GradMap grads = ag::backward(sl.total);
    std::vector<Tensor> out;
    for (const auto* group : {&nodes.theta1, &nodes.theta2, &nodes.theta3, &nodes.theta4}) {
        for (const auto& node : *group) {
            auto it = grads.find(node.get());
            // a parameter cut off from the loss (e.g. missing grasp label with
            // zero penalty) legitimately has a zero gradient
            out.push_back(it != grads.end() ? it->second : Tensor(node->value.shape()));
        }
    }
    return out;
}

}  // namespace

JcearGradCheck jcear_gradcheck(std::uint64_t seed, std::size_t n_models, double eps) {
    JcearGradCheck result;
    for (std::size_t k = 0; k < n_models; ++k) {
        std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + k + 1);
        std::uniform_int_distribution<std::size_t> lo_dist(2, 4);
        std::uniform_int_distribution<std::size_t> lg_dist(2, 3);

        ArchConfig arch;
        arch.num_categories = lo_dist(rng);
        arch.num_grasps = lg_dist(rng);
        arch.seed = seed + 31 * k;
        if (k % 3 == 2) {
            arch.category_extractor = ExtractorKind::smallcnn;
            arch.grasp_extractor = ExtractorKind::smallcnn;
            arch.in_channels = 1;
            arch.in_height = 8;
            arch.in_width = 8;
            arch.conv_channels1 = 2;
            arch.conv_channels2 = 3;
            arch.conv_kernel = 3;
            arch.conv_stride = 1;
            arch.pool_window = 2;
            arch.category_extractor_fc = {4};
            arch.grasp_extractor_fc = {};
        } else {
            arch.category_extractor = ExtractorKind::mlp;
            arch.grasp_extractor = ExtractorKind::mlp;
            arch.in_channels = 1;
            arch.in_height = 3;
            arch.in_width = 3;
            arch.category_extractor_fc = {5};
            arch.grasp_extractor_fc = {4};
        }
        arch.category_classifier_fc = {4};
        arch.grasp_classifier_fc = {4};

        ModelParams params = init_model(arch);

        Tensor x({arch.in_channels, arch.in_height, arch.in_width});
        std::uniform_real_distribution<double> pixel(0.0, 255.0);
        for (std::size_t i = 0; i < x.numel(); ++i) x[i] = pixel(rng);

        std::uniform_int_distribution<std::size_t> cat(0, arch.num_categories - 1);
        std::uniform_int_distribution<std::size_t> grasp(0, arch.num_grasps - 1);
        const Tensor c_o = one_hot(cat(rng), arch.num_categories);
        const Tensor c_g =
            (k % 3 == 1) ? zero_label(arch.num_grasps) : one_hot(grasp(rng), arch.num_grasps);

        // random counts keep the W rows non-degenerate
        std::vector<LabelPair> labels;
        std::uniform_int_distribution<int> reps(1, 4);
        for (std::size_t c = 0; c < arch.num_categories; ++c) {
            for (std::size_t g = 0; g < arch.num_grasps; ++g) {
                const int r = reps(rng);
                for (int i = 0; i < r; ++i) labels.emplace_back(c, g);
            }
        }
        const CondProbMatrix w =
            estimate_cond_matrix(labels, arch.num_categories, arch.num_grasps);

        SigmaState sigma = SigmaState::initial(arch.num_categories);
        if (k % 4 != 0) {
            std::uniform_real_distribution<double> sdist(0.5, 2.0);
            for (auto& s : sigma.sigma) s = sdist(rng);
        }
        const double lambda = regularizer_weight(sigma);

        const std::vector<Tensor> ad = autodiff_grads(arch, params, x, c_o, c_g, w, lambda);

        std::vector<Tensor*> ptrs = all_param_ptrs(params);
        const auto f = [&]() {
            const ForwardTrace t = forward_trace(x, arch, params);
            return jcear_loss(c_o, c_g, t.f_o, t.f_g, w, sigma).total;
        };
        const std::vector<Tensor> fd = finite_diff_grad(f, ptrs, eps);

        const GradCheckStats stats = compare_grads(ad, fd);
        result.per_model.push_back(stats.max_rel);
        result.max_rel = std::max(result.max_rel, stats.max_rel);
    }
    return result;
}

}  // namespace grasplab
