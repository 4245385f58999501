#include "grasplab/adam.hpp"

#include <cmath>

namespace grasplab {

AdamState AdamState::for_params(const std::vector<Tensor>& params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const auto& p : params) {
        s.m.emplace_back(p.shape());
        s.v.emplace_back(p.shape());
    }
    return s;
}

void adam_step(std::vector<Tensor>& params, const std::vector<const Tensor*>& grads,
               AdamState& state, const AdamConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw DimensionError("adam_step: parameter/gradient/state count mismatch");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        if (!grads[pi]) continue;
        Tensor& p = params[pi];
        const Tensor& g = *grads[pi];
        if (!p.same_shape(g)) {
            throw DimensionError("adam_step: param " + std::to_string(pi) + " shape " +
                                 p.shape_str() + " vs grad " + g.shape_str());
        }
        Tensor& m = state.m[pi];
        Tensor& v = state.v[pi];
        for (std::size_t i = 0; i < p.numel(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

}  // namespace grasplab
