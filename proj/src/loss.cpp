#include "grasplab/loss.hpp"

#include <cmath>
#include <limits>

#include "grasplab/kernels.hpp"

namespace grasplab {

namespace {

void check_probability_vector(const Tensor& f, const char* what) {
    for (std::size_t i = 0; i < f.numel(); ++i) {
        if (f[i] < -1e-9 || f[i] > 1.0 + 1e-9) {
            throw ContractError(std::string(what) + ": entry " + std::to_string(i) + " = " +
                                std::to_string(f[i]) + " is not a probability");
        }
    }
}

}  // namespace

SigmaState SigmaState::initial(std::size_t num_categories, double floor) {
    SigmaState s;
    s.sigma.assign(num_categories, std::numeric_limits<double>::infinity());
    s.floor = floor;
    s.t = 0;
    return s;
}

CondProbMatrix estimate_cond_matrix(const std::vector<LabelPair>& labels,
                                    std::size_t num_categories, std::size_t num_grasps) {
    if (num_categories == 0 || num_grasps == 0) {
        throw ConfigError("estimate_cond_matrix: class counts must be positive");
    }
    if (labels.empty()) throw ConfigError("estimate_cond_matrix: empty dataset");
    CondProbMatrix w;
    w.num_categories = num_categories;
    w.num_grasps = num_grasps;
    w.counts.assign(num_categories * num_grasps, 0);
    for (const auto& [cat, grasp] : labels) {
        if (cat >= num_categories) {
            throw ContractError("estimate_cond_matrix: category index " + std::to_string(cat) +
                                " out of range");
        }
        if (!grasp.has_value()) continue;  // missing grasp labels are not counted
        if (*grasp >= num_grasps) {
            throw ContractError("estimate_cond_matrix: grasp index " + std::to_string(*grasp) +
                                " out of range");
        }
        ++w.counts[cat * num_grasps + *grasp];
    }
    w.w_hat = Tensor({num_categories, num_grasps});
    for (std::size_t i = 0; i < num_categories; ++i) {
        std::int64_t row_total = 0;
        for (std::size_t j = 0; j < num_grasps; ++j) row_total += w.counts[i * num_grasps + j];
        if (row_total == 0) {
            w.uniform_rows.push_back(i);
            const double u = 1.0 / static_cast<double>(num_grasps);
            for (std::size_t j = 0; j < num_grasps; ++j) w.w_hat.at2(i, j) = u;
        } else {
            for (std::size_t j = 0; j < num_grasps; ++j) {
                w.w_hat.at2(i, j) = static_cast<double>(w.counts[i * num_grasps + j]) /
                                    static_cast<double>(row_total);
            }
        }
    }
    return w;
}

Tensor gamma(const Tensor& f_o, const Tensor& f_g, const CondProbMatrix& w) {
    if (f_o.numel() != w.num_categories || f_g.numel() != w.num_grasps) {
        throw DimensionError("gamma: f_o " + f_o.shape_str() + ", f_g " + f_g.shape_str() +
                             " vs W " + std::to_string(w.num_categories) + "x" +
                             std::to_string(w.num_grasps));
    }
    Tensor mapped({w.num_categories});
    kernels::gemm(w.w_hat.data(), f_g.data(), mapped.data(), w.num_categories, w.num_grasps, 1);
    Tensor out({w.num_categories});
    kernels::sub(f_o.data(), mapped.data(), out.data(), out.numel());
    return out;
}

double jce_loss(const Tensor& c_o, const Tensor& c_g, const Tensor& f_o, const Tensor& f_g) {
    if (!c_o.same_shape(f_o) || !c_g.same_shape(f_g)) {
        throw DimensionError("jce_loss: label/probability shape mismatch");
    }
    check_probability_vector(f_o, "jce_loss f_o");
    check_probability_vector(f_g, "jce_loss f_g");
    double loss = 0.0;
    for (std::size_t i = 0; i < c_o.numel(); ++i) {
        if (c_o[i] != 0.0) loss -= c_o[i] * std::log(std::max(f_o[i], kProbClamp));
    }
    for (std::size_t j = 0; j < c_g.numel(); ++j) {
        if (c_g[j] != 0.0) loss -= c_g[j] * std::log(std::max(f_g[j], kProbClamp));
    }
    return loss;
}

double regularizer_weight(const SigmaState& sigma, double lambda_max) {
    double log_prod = 0.0;
    for (double s : sigma.sigma) {
        if (std::isinf(s)) return 0.0;
        if (s <= 0.0) {
            throw ContractError("regularizer_weight: sigma coordinate " + std::to_string(s) +
                                " not positive");
        }
        log_prod += std::log(s);
    }
    const double log_lambda = -std::log(2.0) - log_prod;
    if (log_lambda > std::log(lambda_max)) return lambda_max;
    const double lambda = std::exp(log_lambda);
    return std::min(lambda, lambda_max);
}

LossBreakdown jcear_loss(const Tensor& c_o, const Tensor& c_g, const Tensor& f_o,
                         const Tensor& f_g, const CondProbMatrix& w, const SigmaState& sigma,
                         double lambda_max) {
    LossBreakdown out;
    out.jce = jce_loss(c_o, c_g, f_o, f_g);
    const Tensor g = gamma(f_o, f_g, w);
    out.penalty = 0.0;
    for (std::size_t i = 0; i < g.numel(); ++i) out.penalty += g[i] * g[i];
    out.lambda = regularizer_weight(sigma, lambda_max);
    out.total = out.jce + out.lambda * out.penalty;
    return out;
}

std::vector<double> sigma_batch_stat(const Tensor& gammas) {
    if (gammas.ndim() != 2) {
        throw DimensionError("sigma_batch_stat: expected (H, l_o), got " + gammas.shape_str());
    }
    const std::size_t H = gammas.dim(0);
    const std::size_t l_o = gammas.dim(1);
    if (H == 0) throw ContractError("sigma_batch_stat: empty batch");
    std::vector<double> out(l_o, 0.0);
    for (std::size_t i = 0; i < l_o; ++i) {
        double mean = 0.0;
        for (std::size_t h = 0; h < H; ++h) mean += gammas.at2(h, i);
        mean /= static_cast<double>(H);
        double var = 0.0;
        for (std::size_t h = 0; h < H; ++h) {
            const double d = gammas.at2(h, i) - mean;
            var += d * d;
        }
        out[i] = std::sqrt(var / static_cast<double>(H));
    }
    return out;
}

SigmaState sigma_epoch_update(const std::vector<std::vector<double>>& batch_stats,
                              const SigmaState& state) {
    if (batch_stats.empty()) throw ContractError("sigma_epoch_update: no batch stats");
    const std::size_t l_o = state.sigma.size();
    for (const auto& v : batch_stats) {
        if (v.size() != l_o) {
            throw DimensionError("sigma_epoch_update: stat length " + std::to_string(v.size()) +
                                 " != " + std::to_string(l_o));
        }
    }
    SigmaState next = state;
    for (std::size_t i = 0; i < l_o; ++i) {
        double acc = 0.0;
        for (const auto& v : batch_stats) acc += v[i];
        next.sigma[i] = std::max(acc / static_cast<double>(batch_stats.size()), state.floor);
    }
    next.t = state.t + 1;
    return next;
}

Tensor one_hot(std::size_t index, std::size_t n) {
    if (index >= n) {
        throw ContractError("one_hot: index " + std::to_string(index) + " out of range " +
                            std::to_string(n));
    }
    Tensor t({n});
    t[index] = 1.0;
    return t;
}

Tensor zero_label(std::size_t n) { return Tensor({n}); }

SampleLoss build_sample_loss(const ag::NodePtr& logits_o, const ag::NodePtr& logits_g,
                             const ag::NodePtr& f_o, const ag::NodePtr& f_g, const Tensor& c_o,
                             const Tensor& c_g, const ag::NodePtr& w_hat_node,
                             const CondProbMatrix& w, double lambda) {
    SampleLoss out;
    out.gamma_values = gamma(f_o->value, f_g->value, w);
    ag::NodePtr jce =
        ag::add(ag::ce_with_logits(logits_o, c_o), ag::ce_with_logits(logits_g, c_g));
    if (lambda > 0.0) {
        ag::NodePtr residual = ag::sub(f_o, ag::matmul(w_hat_node, f_g));
        ag::NodePtr penalty = ag::sum(ag::square(residual));
        out.total = ag::add(jce, ag::scale(penalty, lambda));
    } else {
        out.total = jce;
    }
    return out;
}

void write_w_hat_csv(const CondProbMatrix& w, std::ostream& os,
                     const std::vector<std::string>& grasp_names) {
    for (std::size_t j = 0; j < w.num_grasps; ++j) {
        if (j) os << ",";
        if (j < grasp_names.size()) {
            os << grasp_names[j];
        } else {
            os << "grasp_" << j;
        }
    }
    os << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < w.num_categories; ++i) {
        for (std::size_t j = 0; j < w.num_grasps; ++j) {
            if (j) os << ",";
            os << w.w_hat.at2(i, j);
        }
        os << "\n";
    }
}

}  // namespace grasplab
