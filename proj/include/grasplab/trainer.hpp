#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "grasplab/adam.hpp"
#include "grasplab/dataset.hpp"
#include "grasplab/loss.hpp"
#include "grasplab/metrics.hpp"
#include "grasplab/model.hpp"

namespace grasplab {

enum class PhaseOrder { category_first, grasp_first };
enum class Variant { v1, v2, v3 };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct TrainConfig {
    AdamConfig adam;  // lr 0.001, beta1 0.9, beta2 0.999
    std::size_t batch_size = 16;
    std::size_t max_outer_iterations = 20;
    double convergence_eps = 1e-4;
    PhaseOrder phase_order = PhaseOrder::category_first;
    double sigma_floor = kDefaultSigmaFloor;
    double lambda_max = kDefaultLambdaMax;
    std::uint64_t seed = 0;

    void validate() const;
};

struct IterationRecord {
    std::size_t t = 0;
    double phase_a_loss = 0.0;
    double phase_b_loss = 0.0;
    std::vector<double> sigma;
    double val_ga_grasp = 0.0;
    double val_ga_category = 0.0;
};

using TrainHistory = std::vector<IterationRecord>;

std::string history_to_jsonl(const TrainHistory& history);

// Which (theta) pair a phase updates.
enum class ParamPair { category, grasp };

// Moment state per parameter group; persists across phases and iterations.
struct AdamStates {
    AdamState theta1, theta2, theta3, theta4;

    static AdamStates for_model(const ModelParams& params);
};

struct PhaseOutput {
    double mean_loss = 0.0;
    std::vector<Tensor> batch_gammas;  // one (H_b, l_o) matrix per batch
};

// One epoch of JCEAR updates over the given batches, touching only the named
// pair; the other two groups stay bit-identical.
PhaseOutput train_phase(ParamPair which, const ArchConfig& arch, ModelParams& params,
                        const Dataset& train_data,
                        const std::vector<std::vector<std::size_t>>& batches,
                        const CondProbMatrix& w, const SigmaState& sigma, AdamStates& adam,
                        const TrainConfig& cfg);

// true iff |curr - prev| <= eps; non-finite losses abort training.
bool check_convergence(double prev_loss, double curr_loss, double eps);

struct TrainResult {
    TrainHistory history;
    SigmaState sigma;
    CondProbMatrix w;
    double final_loss = 0.0;
    bool converged = false;
};

using IterationCallback = std::function<void(std::size_t, const ModelParams&)>;

// Alternating two-phase training (the v3 strategy): W estimated once from
// grasp-labeled training samples, sigma refreshed between the phases of each
// outer iteration, convergence checked on the second phase's epoch-mean loss
// against the previous iteration's (the initial model's epoch-mean loss seeds
// the comparison).
TrainResult train(const ArchConfig& arch, ModelParams& params, const DatasetSplit& split,
                  const TrainConfig& cfg, const IterationCallback& on_iteration = {});

// Ablation baselines: v1 trains theta3/theta4 with grasp cross-entropy only
// (category branch frozen at init); v2 trains all groups jointly under JCE.
TrainResult train_variant(Variant variant, const ArchConfig& arch, ModelParams& params,
                          const DatasetSplit& split, const TrainConfig& cfg,
                          const IterationCallback& on_iteration = {});

struct EvalResult {
    MetricsReport category;
    MetricsReport grasp;
    std::size_t grasp_evaluated = 0;  // samples carrying a grasp label
    double mean_gamma_l1 = 0.0;       // set when a W matrix is supplied
};

EvalResult evaluate(const ArchConfig& arch, const ModelParams& params, const Dataset& data,
                    const CondProbMatrix* w = nullptr);

std::vector<LabelPair> dataset_labels(const Dataset& data);

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::mt19937_64& rng);

}  // namespace grasplab
