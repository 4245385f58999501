#pragma once

#include <cstdint>
#include <vector>

#include "grasplab/autograd.hpp"
#include "grasplab/tensor.hpp"

namespace grasplab {

enum class Activation { relu, softmax, identity };

// One fully connected layer: weight (out,in), bias (out), activation.
struct Layer {
    Tensor weight;
    Tensor bias;
    Activation act = Activation::relu;
};

// Ordered fully connected layers; only the final layer may carry softmax.
struct LayerStack {
    std::vector<Layer> layers;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().weight.dim(1); }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().weight.dim(0); }
    void validate() const;  // shape chaining + softmax placement
};

// Evaluates the stack, returning every activation h[0..M] (h[0] is the input).
std::vector<Tensor> eval_layer_stack(const Tensor& x, const LayerStack& stack);

// Same computation through the autograd graph. Weights/biases come as
// pre-built nodes so the caller controls which are parameters vs constants.
ag::NodePtr layer_stack_graph(const ag::NodePtr& x, const std::vector<ag::NodePtr>& weights,
                              const std::vector<ag::NodePtr>& biases, const LayerStack& stack);

struct PoolSpec {
    enum class Kind { none, max, mean } kind = Kind::max;
    std::size_t h = 2;
    std::size_t w = 2;
};

// Valid convolution followed by optional pooling; x (C,H,W), kernels
// (OC,C,KH,KW). The pool window must divide the post-convolution dims.
Tensor conv_feature_map(const Tensor& x, const Tensor& kernels, std::size_t stride,
                        const PoolSpec& pool);

}  // namespace grasplab
