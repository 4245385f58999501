#include "grasplab/gradcheck.hpp"

#include <cmath>
#include <string>

namespace grasplab {

std::vector<Tensor> finite_diff_grad(const std::function<double()>& f,
                                     const std::vector<Tensor*>& params, double eps) {
    if (eps <= 0.0) throw ContractError("finite_diff_grad: eps must be positive");
    std::vector<Tensor> grads;
    grads.reserve(params.size());
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor* p = params[pi];
        Tensor g(p->shape());
        for (std::size_t i = 0; i < p->numel(); ++i) {
            const double saved = (*p)[i];
            (*p)[i] = saved + eps;
            const double fp = f();
            (*p)[i] = saved - eps;
            const double fm = f();
            (*p)[i] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm)) {
                throw ContractError("finite_diff_grad: non-finite value at param " +
                                    std::to_string(pi) + " coord " + std::to_string(i));
            }
            g[i] = (fp - fm) / (2.0 * eps);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

double max_rel_error(const Tensor& a, const Tensor& b, double floor) {
    if (!a.same_shape(b)) {
        throw DimensionError("max_rel_error: shapes " + a.shape_str() + " vs " + b.shape_str());
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        const double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), floor});
        worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
    }
    return worst;
}

GradCheckStats compare_grads(const std::vector<Tensor>& autodiff,
                             const std::vector<Tensor>& oracle, double floor) {
    if (autodiff.size() != oracle.size()) {
        throw ContractError("compare_grads: parameter count mismatch");
    }
    GradCheckStats stats;
    for (std::size_t pi = 0; pi < autodiff.size(); ++pi) {
        const Tensor& a = autodiff[pi];
        const Tensor& b = oracle[pi];
        if (!a.same_shape(b)) {
            throw DimensionError("compare_grads: param " + std::to_string(pi) + " shapes " +
                                 a.shape_str() + " vs " + b.shape_str());
        }
        for (std::size_t i = 0; i < a.numel(); ++i) {
            const double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), floor});
            const double rel = std::fabs(a[i] - b[i]) / denom;
            if (rel > stats.max_rel) {
                stats.max_rel = rel;
                stats.worst_param = pi;
                stats.worst_coord = i;
            }
        }
    }
    return stats;
}

}  // namespace grasplab
