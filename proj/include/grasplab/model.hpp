#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "grasplab/autograd.hpp"
#include "grasplab/dataset.hpp"
#include "grasplab/tensor.hpp"

namespace grasplab {

enum class ExtractorKind { mlp, smallcnn };

std::string extractor_name(ExtractorKind k);
ExtractorKind extractor_from_name(const std::string& name);

// Dual-branch architecture. Classifier dim lists hold the hidden layers; a
// softmax output layer to num_categories / num_grasps is always appended.
struct ArchConfig {
    std::size_t in_channels = 1;
    std::size_t in_height = 16;
    std::size_t in_width = 16;
    ExtractorKind category_extractor = ExtractorKind::smallcnn;
    ExtractorKind grasp_extractor = ExtractorKind::smallcnn;
    std::vector<std::size_t> category_extractor_fc{32};
    std::vector<std::size_t> category_classifier_fc{};
    std::vector<std::size_t> grasp_extractor_fc{};
    std::vector<std::size_t> grasp_classifier_fc{};
    std::size_t conv_channels1 = 4;
    std::size_t conv_channels2 = 8;
    std::size_t conv_kernel = 3;
    std::size_t conv_stride = 1;
    std::size_t pool_window = 2;
    std::size_t num_categories = 0;
    std::size_t num_grasps = 0;
    NormMode grasp_norm = NormMode::standardize;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t category_feature_dim() const;  // |I_category|
    std::size_t grasp_feature_dim() const;     // |I_grasp|
    std::size_t conv_flat_dim() const;         // flattened smallcnn output
};

struct ParamGroup {
    std::vector<std::string> names;
    std::vector<Tensor> tensors;

    std::size_t total_params() const;
};

// The four disjoint learnable groups: category extractor, category
// classifier, grasp extractor, grasp classifier.
struct ModelParams {
    ParamGroup theta1;
    ParamGroup theta2;
    ParamGroup theta3;
    ParamGroup theta4;

    std::size_t total_params() const;
};

struct ForwardTrace {
    Tensor i_category;
    Tensor i_grasp;
    Tensor i_concat;
    Tensor f_o;
    Tensor f_g;
};

// Deterministic given cfg.seed; weights uniform in +-sqrt(6/(fan_in+fan_out)),
// biases zero.
ModelParams init_model(const ArchConfig& cfg);

// No-grad forward passes. x is the raw image; each branch applies its own
// normalization internally.
std::pair<Tensor, Tensor> forward_category(const Tensor& x, const ArchConfig& cfg,
                                           const ParamGroup& theta1, const ParamGroup& theta2);
std::pair<Tensor, Tensor> forward_grasp(const Tensor& x, const Tensor& i_category,
                                        const ArchConfig& cfg, const ParamGroup& theta3,
                                        const ParamGroup& theta4);
ForwardTrace forward_trace(const Tensor& x, const ArchConfig& cfg, const ModelParams& params);

std::pair<std::size_t, std::size_t> predict(const Tensor& x, const ArchConfig& cfg,
                                            const ModelParams& params);

std::size_t argmax_lowest(const Tensor& probs);

// Graph construction for training. Groups built with trainable=false become
// constants: no gradient entries, bit-identical across the phase.
struct ParamNodes {
    std::vector<ag::NodePtr> theta1;
    std::vector<ag::NodePtr> theta2;
    std::vector<ag::NodePtr> theta3;
    std::vector<ag::NodePtr> theta4;
};

ParamNodes make_param_nodes(const ModelParams& params, bool train1, bool train2, bool train3,
                            bool train4);

struct ModelGraph {
    ag::NodePtr i_category;
    ag::NodePtr i_grasp;
    ag::NodePtr logits_o;
    ag::NodePtr logits_g;
    ag::NodePtr f_o;
    ag::NodePtr f_g;
};

ModelGraph forward_graph(const Tensor& x, const ArchConfig& cfg, const ParamNodes& nodes);

// Self-describing checkpoint: JSON header (arch + tensor manifest) followed
// by raw little-endian doubles.
void save_checkpoint(const std::string& path, const ArchConfig& cfg, const ModelParams& params);
std::pair<ArchConfig, ModelParams> load_checkpoint(const std::string& path);

std::string arch_to_json(const ArchConfig& cfg);
ArchConfig arch_from_json(const std::string& json_text);

}  // namespace grasplab
