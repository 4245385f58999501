#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "grasplab/autograd.hpp"
#include "grasplab/tensor.hpp"

namespace grasplab {

inline constexpr double kProbClamp = 1e-12;
inline constexpr double kDefaultSigmaFloor = 1e-6;
inline constexpr double kDefaultLambdaMax = 1e3;

// Category x grasp co-occurrence counts and the row-normalized conditional
// estimate; rows with no grasp-labeled samples fall back to uniform and are
// recorded in uniform_rows.
struct CondProbMatrix {
    std::size_t num_categories = 0;
    std::size_t num_grasps = 0;
    std::vector<std::int64_t> counts;  // row-major, num_categories x num_grasps
    Tensor w_hat;                      // (num_categories, num_grasps)
    std::vector<std::size_t> uniform_rows;
};

// Adaptive per-category scale vector; starts at +inf (zero penalty weight)
// and is floored after every refresh.
struct SigmaState {
    std::vector<double> sigma;
    double floor = kDefaultSigmaFloor;
    std::size_t t = 0;

    static SigmaState initial(std::size_t num_categories, double floor = kDefaultSigmaFloor);
};

struct LossBreakdown {
    double jce = 0.0;
    double penalty = 0.0;  // sum of squared residuals
    double lambda = 0.0;
    double total = 0.0;
};

// (category, optional grasp) per sample; only grasp-labeled samples count.
using LabelPair = std::pair<std::size_t, std::optional<std::size_t>>;

CondProbMatrix estimate_cond_matrix(const std::vector<LabelPair>& labels,
                                    std::size_t num_categories, std::size_t num_grasps);

// Residual per category: f_o - W_hat f_g. No clamping.
Tensor gamma(const Tensor& f_o, const Tensor& f_g, const CondProbMatrix& w);

// Joint cross-entropy; an all-zero label vector contributes exactly 0.
// Probabilities are floored at kProbClamp before the log.
double jce_loss(const Tensor& c_o, const Tensor& c_g, const Tensor& f_o, const Tensor& f_g);

// 1 / (2 prod sigma_i), in log space; +inf anywhere gives 0; clamped to
// [0, lambda_max].
double regularizer_weight(const SigmaState& sigma, double lambda_max = kDefaultLambdaMax);

LossBreakdown jcear_loss(const Tensor& c_o, const Tensor& c_g, const Tensor& f_o,
                         const Tensor& f_g, const CondProbMatrix& w, const SigmaState& sigma,
                         double lambda_max = kDefaultLambdaMax);

// Per-coordinate population standard deviation of the per-sample residuals;
// gammas is (H, num_categories), H >= 1. Flooring happens at the epoch update.
std::vector<double> sigma_batch_stat(const Tensor& gammas);

// Coordinate-wise mean of the per-batch stats, floored; t advances.
SigmaState sigma_epoch_update(const std::vector<std::vector<double>>& batch_stats,
                              const SigmaState& state);

Tensor one_hot(std::size_t index, std::size_t n);
Tensor zero_label(std::size_t n);

// Graph construction for one sample's JCEAR total. The penalty subgraph is
// built only when lambda > 0, so a zero weight yields bit-exact pure-JCE
// gradients; the residual values are always reported for the sigma stats.
struct SampleLoss {
    ag::NodePtr total;
    Tensor gamma_values;  // numeric residual, length num_categories
};

SampleLoss build_sample_loss(const ag::NodePtr& logits_o, const ag::NodePtr& logits_g,
                             const ag::NodePtr& f_o, const ag::NodePtr& f_g, const Tensor& c_o,
                             const Tensor& c_g, const ag::NodePtr& w_hat_node,
                             const CondProbMatrix& w, double lambda);

// l_o rows x l_g columns under a header row of grasp-type names.
void write_w_hat_csv(const CondProbMatrix& w, std::ostream& os,
                     const std::vector<std::string>& grasp_names = {});

}  // namespace grasplab
