#include "grasplab/layers.hpp"

#include <string>

#include "grasplab/kernels.hpp"

namespace grasplab {

void LayerStack::validate() const {
    for (std::size_t m = 0; m < layers.size(); ++m) {
        const Layer& l = layers[m];
        if (l.weight.ndim() != 2) {
            throw DimensionError("layer " + std::to_string(m) + ": weight must be 2-d, got " +
                                 l.weight.shape_str());
        }
        if (l.bias.ndim() != 1 || l.bias.numel() != l.weight.dim(0)) {
            throw DimensionError("layer " + std::to_string(m) + ": bias " + l.bias.shape_str() +
                                 " does not match weight rows " + std::to_string(l.weight.dim(0)));
        }
        if (m > 0 && l.weight.dim(1) != layers[m - 1].weight.dim(0)) {
            throw DimensionError("layer " + std::to_string(m) + ": input dim " +
                                 std::to_string(l.weight.dim(1)) + " != previous output " +
                                 std::to_string(layers[m - 1].weight.dim(0)));
        }
        if (l.act == Activation::softmax && m + 1 != layers.size()) {
            throw ConfigError("layer " + std::to_string(m) +
                              ": softmax allowed only on the final layer");
        }
    }
}

std::vector<Tensor> eval_layer_stack(const Tensor& x, const LayerStack& stack) {
    stack.validate();
    if (x.ndim() != 1) {
        throw DimensionError("eval_layer_stack: expected vector input, got " + x.shape_str());
    }
    std::vector<Tensor> activations;
    activations.reserve(stack.layers.size() + 1);
    activations.push_back(x);
    for (std::size_t m = 0; m < stack.layers.size(); ++m) {
        const Layer& l = stack.layers[m];
        const Tensor& h = activations.back();
        if (h.numel() != l.weight.dim(1)) {
            throw DimensionError("layer " + std::to_string(m) + ": input length " +
                                 std::to_string(h.numel()) + " != weight cols " +
                                 std::to_string(l.weight.dim(1)));
        }
        Tensor z({l.weight.dim(0)});
        kernels::gemm(l.weight.data(), h.data(), z.data(), l.weight.dim(0), l.weight.dim(1), 1);
        kernels::add(z.data(), l.bias.data(), z.data(), z.numel());
        switch (l.act) {
            case Activation::relu:
                kernels::relu(z.data(), z.data(), z.numel());
                break;
            case Activation::softmax:
                kernels::softmax(z.data(), z.data(), z.numel());
                break;
            case Activation::identity:
                break;
        }
        activations.push_back(std::move(z));
    }
    return activations;
}

ag::NodePtr layer_stack_graph(const ag::NodePtr& x, const std::vector<ag::NodePtr>& weights,
                              const std::vector<ag::NodePtr>& biases, const LayerStack& stack) {
    if (weights.size() != stack.layers.size() || biases.size() != stack.layers.size()) {
        throw ContractError("layer_stack_graph: node count does not match stack depth");
    }
    ag::NodePtr h = x;
    for (std::size_t m = 0; m < stack.layers.size(); ++m) {
        ag::NodePtr z = ag::add_bias(ag::matmul(weights[m], h), biases[m]);
        switch (stack.layers[m].act) {
            case Activation::relu:
                h = ag::relu(z);
                break;
            case Activation::softmax:
                h = ag::softmax(z);
                break;
            case Activation::identity:
                h = z;
                break;
        }
    }
    return h;
}

Tensor conv_feature_map(const Tensor& x, const Tensor& kernels, std::size_t stride,
                        const PoolSpec& pool) {
    if (x.ndim() != 3 || kernels.ndim() != 4) {
        throw DimensionError("conv_feature_map: input " + x.shape_str() + ", kernels " +
                             kernels.shape_str());
    }
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    const std::size_t OC = kernels.dim(0), KH = kernels.dim(2), KW = kernels.dim(3);
    if (kernels.dim(1) != C) {
        throw DimensionError("conv_feature_map: kernel channels " +
                             std::to_string(kernels.dim(1)) + " != input channels " +
                             std::to_string(C));
    }
    if (KH > H || KW > W) {
        throw DimensionError("conv_feature_map: kernel " + kernels.shape_str() +
                             " larger than image " + x.shape_str());
    }
    if (stride == 0) throw ConfigError("conv_feature_map: stride must be positive");
    const std::size_t OH = (H - KH) / stride + 1;
    const std::size_t OW = (W - KW) / stride + 1;
    Tensor conv({OC, OH, OW});
    kernels::conv2d(x.data(), kernels.data(), nullptr, conv.data(), C, H, W, OC, KH, KW, stride);
    if (pool.kind == PoolSpec::Kind::none) return conv;
    if (pool.h == 0 || pool.w == 0 || OH % pool.h != 0 || OW % pool.w != 0) {
        throw DimensionError("conv_feature_map: pool window " + std::to_string(pool.h) + "x" +
                             std::to_string(pool.w) + " does not divide feature map " +
                             conv.shape_str());
    }
    Tensor out({OC, OH / pool.h, OW / pool.w});
    if (pool.kind == PoolSpec::Kind::max) {
        kernels::maxpool2d(conv.data(), out.data(), nullptr, OC, OH, OW, pool.h, pool.w);
    } else {
        kernels::meanpool2d(conv.data(), out.data(), OC, OH, OW, pool.h, pool.w);
    }
    return out;
}

}  // namespace grasplab
