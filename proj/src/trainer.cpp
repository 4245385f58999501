#include "grasplab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace grasplab {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::v1: return "v1";
        case Variant::v2: return "v2";
        case Variant::v3: return "v3";
    }
    return "v3";
}

Variant variant_from_name(const std::string& name) {
    if (name == "v1") return Variant::v1;
    if (name == "v2") return Variant::v2;
    if (name == "v3") return Variant::v3;
    throw ConfigError("unknown variant: " + name);
}

void TrainConfig::validate() const {
    if (adam.beta1 <= 0.0 || adam.beta1 >= 1.0 || adam.beta2 <= 0.0 || adam.beta2 >= 1.0) {
        throw ConfigError("train config: betas must lie in (0,1)");
    }
    if (convergence_eps <= 0.0) throw ConfigError("train config: eps must be positive");
    if (batch_size < 1) throw ConfigError("train config: batch size must be >= 1");
    if (max_outer_iterations < 1) {
        throw ConfigError("train config: need at least one outer iteration");
    }
}

std::string history_to_jsonl(const TrainHistory& history) {
    std::ostringstream os;
    for (const auto& rec : history) {
        nlohmann::json j;
        j["t"] = rec.t;
        j["phase_a_loss"] = rec.phase_a_loss;
        j["phase_b_loss"] = rec.phase_b_loss;
        j["sigma"] = rec.sigma;
        j["val_ga_grasp"] = rec.val_ga_grasp;
        j["val_ga_category"] = rec.val_ga_category;
        os << j.dump() << "\n";
    }
    return os.str();
}

AdamStates AdamStates::for_model(const ModelParams& params) {
    AdamStates s;
    s.theta1 = AdamState::for_params(params.theta1.tensors);
    s.theta2 = AdamState::for_params(params.theta2.tensors);
    s.theta3 = AdamState::for_params(params.theta3.tensors);
    s.theta4 = AdamState::for_params(params.theta4.tensors);
    return s;
}

std::vector<LabelPair> dataset_labels(const Dataset& data) {
    std::vector<LabelPair> labels;
    labels.reserve(data.samples.size());
    for (const auto& s : data.samples) labels.emplace_back(s.category, s.grasp);
    return labels;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::mt19937_64& rng) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    return batches;
}

namespace {

Tensor grasp_label_vector(const DualLabelSample& s, std::size_t num_grasps) {
    return s.grasp ? one_hot(*s.grasp, num_grasps) : zero_label(num_grasps);
}

void apply_grads(ParamGroup& group, std::vector<ag::NodePtr>& nodes, const ag::GradMap& grads,
                 AdamState& state, const AdamConfig& cfg) {
    std::vector<const Tensor*> gptrs(group.tensors.size(), nullptr);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        auto it = grads.find(nodes[i].get());
        if (it != grads.end()) gptrs[i] = &it->second;
    }
    adam_step(group.tensors, gptrs, state, cfg);
}

double batch_update(const ArchConfig& arch, ModelParams& params, const Dataset& data,
                    const std::vector<std::size_t>& batch, const CondProbMatrix* w,
                    double lambda, bool use_category_ce, bool t1, bool t2, bool t3, bool t4,
                    AdamStates& adam, const TrainConfig& cfg, Tensor* gamma_out) {
    ParamNodes nodes = make_param_nodes(params, t1, t2, t3, t4);
    ag::NodePtr w_node =
        (w && lambda > 0.0) ? ag::constant(w->w_hat) : nullptr;
    std::vector<ag::NodePtr> totals;
    totals.reserve(batch.size());
    for (std::size_t bi = 0; bi < batch.size(); ++bi) {
        const auto& s = data.samples[batch[bi]];
        ModelGraph g = forward_graph(s.image, arch, nodes);
        const Tensor c_o = use_category_ce ? one_hot(s.category, arch.num_categories)
                                           : zero_label(arch.num_categories);
        const Tensor c_g = grasp_label_vector(s, arch.num_grasps);
        if (w) {
            SampleLoss sl = build_sample_loss(g.logits_o, g.logits_g, g.f_o, g.f_g, c_o, c_g,
                                              w_node, *w, lambda);
            totals.push_back(sl.total);
            if (gamma_out) {
                for (std::size_t i = 0; i < arch.num_categories; ++i) {
                    gamma_out->at2(bi, i) = sl.gamma_values[i];
                }
            }
        } else {
            ag::NodePtr jce = use_category_ce
                                  ? ag::add(ag::ce_with_logits(g.logits_o, c_o),
                                            ag::ce_with_logits(g.logits_g, c_g))
                                  : ag::ce_with_logits(g.logits_g, c_g);
            totals.push_back(jce);
        }
    }
    ag::NodePtr batch_loss =
        ag::scale(ag::add_n(totals), 1.0 / static_cast<double>(batch.size()));
    ag::GradMap grads = ag::backward(batch_loss);
    if (t1) apply_grads(params.theta1, nodes.theta1, grads, adam.theta1, cfg.adam);
    if (t2) apply_grads(params.theta2, nodes.theta2, grads, adam.theta2, cfg.adam);
    if (t3) apply_grads(params.theta3, nodes.theta3, grads, adam.theta3, cfg.adam);
    if (t4) apply_grads(params.theta4, nodes.theta4, grads, adam.theta4, cfg.adam);
    return batch_loss->value[0] * static_cast<double>(batch.size());
}

// Epoch-mean loss of the current parameters without updating them.
double eval_epoch_loss(const ArchConfig& arch, const ModelParams& params, const Dataset& data,
                       const CondProbMatrix* w, const SigmaState* sigma, bool use_category_ce,
                       bool use_grasp_ce, double lambda_max) {
    double total = 0.0;
    for (const auto& s : data.samples) {
        const ForwardTrace t = forward_trace(s.image, arch, params);
        const Tensor c_o = use_category_ce ? one_hot(s.category, arch.num_categories)
                                           : zero_label(arch.num_categories);
        const Tensor c_g = use_grasp_ce ? grasp_label_vector(s, arch.num_grasps)
                                        : zero_label(arch.num_grasps);
        if (w && sigma) {
            total += jcear_loss(c_o, c_g, t.f_o, t.f_g, *w, *sigma, lambda_max).total;
        } else {
            total += jce_loss(c_o, c_g, t.f_o, t.f_g);
        }
    }
    return total / static_cast<double>(data.samples.size());
}

double ga_on(const ArchConfig& arch, const ModelParams& params, const Dataset& data,
             bool grasp_side) {
    if (data.empty()) return 0.0;
    std::size_t hit = 0, n = 0;
    for (const auto& s : data.samples) {
        if (grasp_side && !s.grasp) continue;
        const auto [cat, grasp] = predict(s.image, arch, params);
        if (grasp_side) {
            ++n;
            if (grasp == *s.grasp) ++hit;
        } else {
            ++n;
            if (cat == s.category) ++hit;
        }
    }
    return n ? static_cast<double>(hit) / static_cast<double>(n) : 0.0;
}

}  // namespace

PhaseOutput train_phase(ParamPair which, const ArchConfig& arch, ModelParams& params,
                        const Dataset& train_data,
                        const std::vector<std::vector<std::size_t>>& batches,
                        const CondProbMatrix& w, const SigmaState& sigma, AdamStates& adam,
                        const TrainConfig& cfg) {
    const bool cat_pair = which == ParamPair::category;
    const double lambda = regularizer_weight(sigma, cfg.lambda_max);
    PhaseOutput out;
    out.batch_gammas.reserve(batches.size());
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& batch : batches) {
        Tensor gammas({batch.size(), arch.num_categories});
        total += batch_update(arch, params, train_data, batch, &w, lambda,
                              /*use_category_ce=*/true, cat_pair, cat_pair, !cat_pair,
                              !cat_pair, adam, cfg, &gammas);
        count += batch.size();
        out.batch_gammas.push_back(std::move(gammas));
    }
    out.mean_loss = total / static_cast<double>(count);
    return out;
}

bool check_convergence(double prev_loss, double curr_loss, double eps) {
    if (!std::isfinite(prev_loss) || !std::isfinite(curr_loss)) {
        throw ContractError("training aborted: non-finite loss (prev=" +
                            std::to_string(prev_loss) + ", curr=" + std::to_string(curr_loss) +
                            ")");
    }
    return std::fabs(curr_loss - prev_loss) <= eps;
}

TrainResult train(const ArchConfig& arch, ModelParams& params, const DatasetSplit& split,
                  const TrainConfig& cfg, const IterationCallback& on_iteration) {
    cfg.validate();
    if (split.train.empty()) throw ConfigError("train: empty training set");

    TrainResult res;
    res.w = estimate_cond_matrix(dataset_labels(split.train), arch.num_categories,
                                 arch.num_grasps);
    res.sigma = SigmaState::initial(arch.num_categories, cfg.sigma_floor);
    AdamStates adam = AdamStates::for_model(params);

    const ParamPair first =
        cfg.phase_order == PhaseOrder::category_first ? ParamPair::category : ParamPair::grasp;
    const ParamPair second =
        cfg.phase_order == PhaseOrder::category_first ? ParamPair::grasp : ParamPair::category;

    double prev_loss = eval_epoch_loss(arch, params, split.train, &res.w, &res.sigma, true,
                                       true, cfg.lambda_max);

    for (std::size_t t = 1; t <= cfg.max_outer_iterations; ++t) {
        std::mt19937_64 rng_a(cfg.seed * 0x9e3779b97f4a7c15ULL + t * 2);
        const auto batches_a = make_batches(split.train.size(), cfg.batch_size, rng_a);
        PhaseOutput pa = train_phase(first, arch, params, split.train, batches_a, res.w,
                                     res.sigma, adam, cfg);

        std::vector<std::vector<double>> stats;
        stats.reserve(pa.batch_gammas.size());
        for (const auto& g : pa.batch_gammas) stats.push_back(sigma_batch_stat(g));
        res.sigma = sigma_epoch_update(stats, res.sigma);

        std::mt19937_64 rng_b(cfg.seed * 0x9e3779b97f4a7c15ULL + t * 2 + 1);
        const auto batches_b = make_batches(split.train.size(), cfg.batch_size, rng_b);
        PhaseOutput pb = train_phase(second, arch, params, split.train, batches_b, res.w,
                                     res.sigma, adam, cfg);

        IterationRecord rec;
        rec.t = t;
        rec.phase_a_loss = pa.mean_loss;
        rec.phase_b_loss = pb.mean_loss;
        rec.sigma = res.sigma.sigma;
        rec.val_ga_grasp = ga_on(arch, params, split.validation, true);
        rec.val_ga_category = ga_on(arch, params, split.validation, false);
        res.history.push_back(std::move(rec));
        if (on_iteration) on_iteration(t, params);

        res.final_loss = pb.mean_loss;
        if (check_convergence(prev_loss, pb.mean_loss, cfg.convergence_eps)) {
            res.converged = true;
            break;
        }
        prev_loss = pb.mean_loss;
    }
    return res;
}

namespace {

// Single-phase loops shared by v1 (grasp CE, frozen category branch) and v2
// (joint JCE over all four groups).
TrainResult train_single_phase(bool joint, const ArchConfig& arch, ModelParams& params,
                               const DatasetSplit& split, const TrainConfig& cfg,
                               const IterationCallback& on_iteration) {
    cfg.validate();
    if (split.train.empty()) throw ConfigError("train: empty training set");

    TrainResult res;
    res.w = estimate_cond_matrix(dataset_labels(split.train), arch.num_categories,
                                 arch.num_grasps);
    res.sigma = SigmaState::initial(arch.num_categories, cfg.sigma_floor);
    AdamStates adam = AdamStates::for_model(params);

    double prev_loss =
        eval_epoch_loss(arch, params, split.train, nullptr, nullptr, joint, true, 0.0);

    for (std::size_t t = 1; t <= cfg.max_outer_iterations; ++t) {
        std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ULL + t * 2);
        const auto batches = make_batches(split.train.size(), cfg.batch_size, rng);
        double total = 0.0;
        std::size_t count = 0;
        for (const auto& batch : batches) {
            total += batch_update(arch, params, split.train, batch, nullptr, 0.0,
                                  /*use_category_ce=*/joint, joint, joint, true, true, adam,
                                  cfg, nullptr);
            count += batch.size();
        }
        const double mean_loss = total / static_cast<double>(count);

        IterationRecord rec;
        rec.t = t;
        rec.phase_a_loss = mean_loss;
        rec.phase_b_loss = mean_loss;
        rec.val_ga_grasp = ga_on(arch, params, split.validation, true);
        rec.val_ga_category = ga_on(arch, params, split.validation, false);
        res.history.push_back(std::move(rec));
        if (on_iteration) on_iteration(t, params);

        res.final_loss = mean_loss;
        if (check_convergence(prev_loss, mean_loss, cfg.convergence_eps)) {
            res.converged = true;
            break;
        }
        prev_loss = mean_loss;
    }
    return res;
}

}  // namespace

TrainResult train_variant(Variant variant, const ArchConfig& arch, ModelParams& params,
                          const DatasetSplit& split, const TrainConfig& cfg,
                          const IterationCallback& on_iteration) {
    switch (variant) {
        case Variant::v1:
            return train_single_phase(false, arch, params, split, cfg, on_iteration);
        case Variant::v2:
            return train_single_phase(true, arch, params, split, cfg, on_iteration);
        case Variant::v3:
            return train(arch, params, split, cfg, on_iteration);
    }
    throw ConfigError("train_variant: bad variant");
}

EvalResult evaluate(const ArchConfig& arch, const ModelParams& params, const Dataset& data,
                    const CondProbMatrix* w) {
    if (data.empty()) throw ConfigError("evaluate: empty dataset");
    EvalResult out;
    std::vector<std::size_t> cat_pred, cat_true, grasp_pred, grasp_true;
    double gamma_l1 = 0.0;
    for (const auto& s : data.samples) {
        const ForwardTrace t = forward_trace(s.image, arch, params);
        cat_pred.push_back(argmax_lowest(t.f_o));
        cat_true.push_back(s.category);
        if (s.grasp) {
            grasp_pred.push_back(argmax_lowest(t.f_g));
            grasp_true.push_back(*s.grasp);
        }
        if (w) {
            const Tensor g = gamma(t.f_o, t.f_g, *w);
            for (std::size_t i = 0; i < g.numel(); ++i) gamma_l1 += std::fabs(g[i]);
        }
    }
    out.category = compute_metrics(confusion_matrix(cat_pred, cat_true, arch.num_categories));
    out.grasp_evaluated = grasp_true.size();
    if (!grasp_true.empty()) {
        out.grasp = compute_metrics(confusion_matrix(grasp_pred, grasp_true, arch.num_grasps));
    }
    if (w) out.mean_gamma_l1 = gamma_l1 / static_cast<double>(data.samples.size());
    return out;
}

}  // namespace grasplab
