#pragma once

#include <cstdint>
#include <vector>

#include "grasplab/model.hpp"

namespace grasplab {

struct JcearGradCheck {
    double max_rel = 0.0;
    std::vector<double> per_model;
};

// Seeded sweep of tiny dual-branch models (mlp and smallcnn mixes, missing
// grasp labels, zero and positive penalty weights): autodiff gradients of the
// full loss against central finite differences routed through the no-grad
// forward path.
JcearGradCheck jcear_gradcheck(std::uint64_t seed, std::size_t n_models, double eps);

}  // namespace grasplab
