#pragma once

#include <vector>

#include "grasplab/tensor.hpp"

namespace grasplab {

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Moment accumulators for one parameter group; shapes mirror the parameters.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::size_t step = 0;

    static AdamState for_params(const std::vector<Tensor>& params);
};

// Standard bias-corrected Adam over one group. grads entries may be null:
// parameters without gradients stay untouched (their moments too). The step
// counter advances once per call.
void adam_step(std::vector<Tensor>& params, const std::vector<const Tensor*>& grads,
               AdamState& state, const AdamConfig& cfg);

}  // namespace grasplab
