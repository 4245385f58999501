#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "grasplab/tensor.hpp"

namespace grasplab::ag {

enum class OpKind {
    leaf,
    matmul,
    conv2d,
    max_pool,
    mean_pool,
    relu,
    softmax,
    log_op,
    concat,
    add,
    sub,
    mul,
    scale,
    square,
    sum,
    add_n,
    ce_logits,
};

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One vertex of the (acyclic) computation graph. Graph construction and
// backward are single-threaded; values are immutable once set, so finished
// graphs can be read concurrently.
struct Node {
    OpKind op = OpKind::leaf;
    Tensor value;
    Tensor grad;  // allocated on first accumulation, same shape as value
    bool requires_grad = false;
    bool grad_init = false;
    std::uint64_t id = 0;  // creation order; parents always have smaller ids
    std::vector<NodePtr> parents;
    std::function<void(Node&)> backprop;  // reads this->grad, accumulates into parents

    void accumulate(const double* g, std::size_t n);
    Tensor& ensure_grad();
};

// Leaf constructors: a parameter participates in gradients, a constant never.
NodePtr parameter(Tensor v);
NodePtr constant(Tensor v);

// a: (m,k). b: (k,) vector or (k,n) matrix. add_bias is matmul's companion.
NodePtr matmul(const NodePtr& a, const NodePtr& b);
NodePtr add(const NodePtr& a, const NodePtr& b);
inline NodePtr add_bias(const NodePtr& x, const NodePtr& b) { return add(x, b); }
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr mul(const NodePtr& a, const NodePtr& b);
NodePtr scale(const NodePtr& a, double s);
NodePtr square(const NodePtr& a);
NodePtr relu(const NodePtr& x);
NodePtr softmax(const NodePtr& logits);
NodePtr log_op(const NodePtr& x);
NodePtr concat(const NodePtr& a, const NodePtr& b);
NodePtr sum(const NodePtr& a);
NodePtr add_n(const std::vector<NodePtr>& xs);
NodePtr flatten(const NodePtr& x);  // reshape to 1-d, gradient passes through

// x: (C,H,W); kernels: (OC,C,KH,KW); bias: (OC). Valid padding.
NodePtr conv2d(const NodePtr& x, const NodePtr& kernels, const NodePtr& bias, std::size_t stride);
NodePtr max_pool(const NodePtr& x, std::size_t ph, std::size_t pw);
NodePtr mean_pool(const NodePtr& x, std::size_t ph, std::size_t pw);

// Fused log-softmax + cross-entropy against a fixed one-hot (or all-zero)
// label; an all-zero label yields exactly 0 with zero gradient.
NodePtr ce_with_logits(const NodePtr& logits, const Tensor& label);

using GradMap = std::unordered_map<const Node*, Tensor>;

// Populates gradients for exactly the parameters reachable from the scalar
// loss; frozen or detached parameters get no entry.
GradMap backward(const NodePtr& loss);

}  // namespace grasplab::ag
