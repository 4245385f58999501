#pragma once

#include <functional>
#include <vector>

#include "grasplab/tensor.hpp"

namespace grasplab {

// Central-difference gradient oracle: (f(x+eps) - f(x-eps)) / (2 eps) per
// coordinate of every listed tensor. f is re-evaluated after each in-place
// perturbation; parameters are restored on exit. Independent of the autograd
// path by construction.
std::vector<Tensor> finite_diff_grad(const std::function<double()>& f,
                                     const std::vector<Tensor*>& params, double eps);

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor); the floor keeps near-zero
// gradients from inflating the ratio past finite-difference noise.
double max_rel_error(const Tensor& a, const Tensor& b, double floor = 1e-6);

struct GradCheckStats {
    double max_rel = 0.0;
    std::size_t worst_param = 0;
    std::size_t worst_coord = 0;
};

GradCheckStats compare_grads(const std::vector<Tensor>& autodiff,
                             const std::vector<Tensor>& oracle, double floor = 1e-6);

}  // namespace grasplab
