#include "grasplab/autograd.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "grasplab/kernels.hpp"

namespace grasplab::ag {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

NodePtr make_node(OpKind op, Tensor value, std::vector<NodePtr> parents) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->value = std::move(value);
    n->parents = std::move(parents);
    n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
    for (const auto& p : n->parents) {
        if (p->requires_grad) {
            n->requires_grad = true;
            break;
        }
    }
    return n;
}

void require_same_shape(const NodePtr& a, const NodePtr& b, const char* what) {
    if (!a->value.same_shape(b->value)) {
        throw DimensionError(std::string(what) + ": shape " + a->value.shape_str() + " vs " +
                             b->value.shape_str());
    }
}

}  // namespace

Tensor& Node::ensure_grad() {
    if (!grad_init) {
        grad = Tensor(value.shape());
        grad_init = true;
    }
    return grad;
}

void Node::accumulate(const double* g, std::size_t n) {
    Tensor& dst = ensure_grad();
    kernels::axpy(1.0, g, dst.data(), n);
}

NodePtr parameter(Tensor v) {
    auto n = make_node(OpKind::leaf, std::move(v), {});
    n->requires_grad = true;
    return n;
}

NodePtr constant(Tensor v) { return make_node(OpKind::leaf, std::move(v), {}); }

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
    if (a->value.ndim() != 2) {
        throw DimensionError("matmul: left operand must be 2-d, got " + a->value.shape_str());
    }
    const std::size_t m = a->value.dim(0);
    const std::size_t k = a->value.dim(1);
    const bool vec = b->value.ndim() == 1;
    const std::size_t n = vec ? 1 : b->value.dim(b->value.ndim() - 1);
    const std::size_t bk = b->value.dim(0);
    if (b->value.ndim() > 2 || bk != k) {
        throw DimensionError("matmul: " + a->value.shape_str() + " x " + b->value.shape_str());
    }
    Tensor out(vec ? std::vector<std::size_t>{m} : std::vector<std::size_t>{m, n});
    kernels::gemm(a->value.data(), b->value.data(), out.data(), m, k, n);
    auto node = make_node(OpKind::matmul, std::move(out), {a, b});
    node->backprop = [m, k, n](Node& self) {
        const auto& a_ = self.parents[0];
        const auto& b_ = self.parents[1];
        if (a_->requires_grad) {
            Tensor da({m, k});
            kernels::gemm(self.grad.data(), b_->value.data(), da.data(), m, n, k, false, true);
            a_->accumulate(da.data(), da.numel());
        }
        if (b_->requires_grad) {
            Tensor db(b_->value.shape());
            kernels::gemm(a_->value.data(), self.grad.data(), db.data(), k, m, n, true, false);
            b_->accumulate(db.data(), db.numel());
        }
    };
    return node;
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
    require_same_shape(a, b, "add");
    Tensor out(a->value.shape());
    kernels::add(a->value.data(), b->value.data(), out.data(), out.numel());
    auto node = make_node(OpKind::add, std::move(out), {a, b});
    node->backprop = [](Node& self) {
        for (auto& p : self.parents) {
            if (p->requires_grad) p->accumulate(self.grad.data(), self.grad.numel());
        }
    };
    return node;
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
    require_same_shape(a, b, "sub");
    Tensor out(a->value.shape());
    kernels::sub(a->value.data(), b->value.data(), out.data(), out.numel());
    auto node = make_node(OpKind::sub, std::move(out), {a, b});
    node->backprop = [](Node& self) {
        const auto& a_ = self.parents[0];
        const auto& b_ = self.parents[1];
        if (a_->requires_grad) a_->accumulate(self.grad.data(), self.grad.numel());
        if (b_->requires_grad) {
            Tensor neg(self.grad.shape());
            kernels::scale(self.grad.data(), -1.0, neg.data(), neg.numel());
            b_->accumulate(neg.data(), neg.numel());
        }
    };
    return node;
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
    require_same_shape(a, b, "mul");
    Tensor out(a->value.shape());
    kernels::mul(a->value.data(), b->value.data(), out.data(), out.numel());
    auto node = make_node(OpKind::mul, std::move(out), {a, b});
    node->backprop = [](Node& self) {
        const auto& a_ = self.parents[0];
        const auto& b_ = self.parents[1];
        Tensor tmp(self.grad.shape());
        if (a_->requires_grad) {
            kernels::mul(self.grad.data(), b_->value.data(), tmp.data(), tmp.numel());
            a_->accumulate(tmp.data(), tmp.numel());
        }
        if (b_->requires_grad) {
            kernels::mul(self.grad.data(), a_->value.data(), tmp.data(), tmp.numel());
            b_->accumulate(tmp.data(), tmp.numel());
        }
    };
    return node;
}

NodePtr scale(const NodePtr& a, double s) {
    Tensor out(a->value.shape());
    kernels::scale(a->value.data(), s, out.data(), out.numel());
    auto node = make_node(OpKind::scale, std::move(out), {a});
    node->backprop = [s](Node& self) {
        const auto& a_ = self.parents[0];
        if (!a_->requires_grad) return;
        Tensor tmp(self.grad.shape());
        kernels::scale(self.grad.data(), s, tmp.data(), tmp.numel());
        a_->accumulate(tmp.data(), tmp.numel());
    };
    return node;
}

NodePtr square(const NodePtr& a) {
    Tensor out(a->value.shape());
    kernels::square(a->value.data(), out.data(), out.numel());
    auto node = make_node(OpKind::square, std::move(out), {a});
    node->backprop = [](Node& self) {
        const auto& a_ = self.parents[0];
        if (!a_->requires_grad) return;
        Tensor tmp(self.grad.shape());
        kernels::mul(self.grad.data(), a_->value.data(), tmp.data(), tmp.numel());
        kernels::scale(tmp.data(), 2.0, tmp.data(), tmp.numel());
        a_->accumulate(tmp.data(), tmp.numel());
    };
    return node;
}

NodePtr relu(const NodePtr& x) {
    Tensor out(x->value.shape());
    kernels::relu(x->value.data(), out.data(), out.numel());
    auto node = make_node(OpKind::relu, std::move(out), {x});
    node->backprop = [](Node& self) {
        const auto& x_ = self.parents[0];
        if (!x_->requires_grad) return;
        Tensor tmp(self.grad.shape());
        kernels::relu_grad(self.grad.data(), x_->value.data(), tmp.data(), tmp.numel());
        x_->accumulate(tmp.data(), tmp.numel());
    };
    return node;
}

NodePtr softmax(const NodePtr& logits) {
    if (logits->value.ndim() != 1) {
        throw DimensionError("softmax: expected vector, got " + logits->value.shape_str());
    }
    Tensor out(logits->value.shape());
    kernels::softmax(logits->value.data(), out.data(), out.numel());
    auto node = make_node(OpKind::softmax, std::move(out), {logits});
    node->backprop = [](Node& self) {
        const auto& x_ = self.parents[0];
        if (!x_->requires_grad) return;
        const std::size_t n = self.value.numel();
        const double* p = self.value.data();
        const double* g = self.grad.data();
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += g[i] * p[i];
        Tensor tmp(self.value.shape());
        for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] * (g[i] - dot);
        x_->accumulate(tmp.data(), n);
    };
    return node;
}

NodePtr log_op(const NodePtr& x) {
    Tensor out(x->value.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::log(x->value[i]);
    if (verification_mode()) out.check_finite();
    auto node = make_node(OpKind::log_op, std::move(out), {x});
    node->backprop = [](Node& self) {
        const auto& x_ = self.parents[0];
        if (!x_->requires_grad) return;
        Tensor tmp(self.grad.shape());
        for (std::size_t i = 0; i < tmp.numel(); ++i) tmp[i] = self.grad[i] / x_->value[i];
        x_->accumulate(tmp.data(), tmp.numel());
    };
    return node;
}

NodePtr concat(const NodePtr& a, const NodePtr& b) {
    if (a->value.ndim() != 1 || b->value.ndim() != 1) {
        throw DimensionError("concat: expected vectors, got " + a->value.shape_str() + " and " +
                             b->value.shape_str());
    }
    const std::size_t na = a->value.numel();
    const std::size_t nb = b->value.numel();
    Tensor out({na + nb});
    std::copy(a->value.data(), a->value.data() + na, out.data());
    std::copy(b->value.data(), b->value.data() + nb, out.data() + na);
    auto node = make_node(OpKind::concat, std::move(out), {a, b});
    node->backprop = [na, nb](Node& self) {
        const auto& a_ = self.parents[0];
        const auto& b_ = self.parents[1];
        if (a_->requires_grad) a_->accumulate(self.grad.data(), na);
        if (b_->requires_grad) b_->accumulate(self.grad.data() + na, nb);
    };
    return node;
}

NodePtr sum(const NodePtr& a) {
    Tensor out = Tensor::scalar(kernels::sum(a->value.data(), a->value.numel()));
    auto node = make_node(OpKind::sum, std::move(out), {a});
    node->backprop = [](Node& self) {
        const auto& a_ = self.parents[0];
        if (!a_->requires_grad) return;
        Tensor tmp = Tensor::full(a_->value.shape(), self.grad[0]);
        a_->accumulate(tmp.data(), tmp.numel());
    };
    return node;
}

NodePtr add_n(const std::vector<NodePtr>& xs) {
    if (xs.empty()) throw ContractError("add_n: empty operand list");
    Tensor out = xs[0]->value;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        require_same_shape(xs[0], xs[i], "add_n");
        kernels::add(out.data(), xs[i]->value.data(), out.data(), out.numel());
    }
    auto node = make_node(OpKind::add_n, std::move(out), xs);
    node->backprop = [](Node& self) {
        for (auto& p : self.parents) {
            if (p->requires_grad) p->accumulate(self.grad.data(), self.grad.numel());
        }
    };
    return node;
}

NodePtr flatten(const NodePtr& x) {
    Tensor out({x->value.numel()}, x->value.values());
    auto node = make_node(OpKind::concat, std::move(out), {x});
    node->backprop = [](Node& self) {
        const auto& x_ = self.parents[0];
        if (!x_->requires_grad) return;
        x_->accumulate(self.grad.data(), self.grad.numel());
    };
    return node;
}

NodePtr conv2d(const NodePtr& x, const NodePtr& kernels_n, const NodePtr& bias,
               std::size_t stride) {
    const Tensor& in = x->value;
    const Tensor& k = kernels_n->value;
    if (in.ndim() != 3 || k.ndim() != 4) {
        throw DimensionError("conv2d: input " + in.shape_str() + ", kernels " + k.shape_str());
    }
    const std::size_t C = in.dim(0), H = in.dim(1), W = in.dim(2);
    const std::size_t OC = k.dim(0), KH = k.dim(2), KW = k.dim(3);
    if (k.dim(1) != C) {
        throw DimensionError("conv2d: kernel channels " + std::to_string(k.dim(1)) +
                             " != input channels " + std::to_string(C));
    }
    if (KH > H || KW > W) {
        throw DimensionError("conv2d: kernel " + k.shape_str() + " larger than image " +
                             in.shape_str());
    }
    if (bias && bias->value.numel() != OC) {
        throw DimensionError("conv2d: bias length " + std::to_string(bias->value.numel()) +
                             " != out channels " + std::to_string(OC));
    }
    const std::size_t OH = (H - KH) / stride + 1;
    const std::size_t OW = (W - KW) / stride + 1;
    Tensor out({OC, OH, OW});
    kernels::conv2d(in.data(), k.data(), bias ? bias->value.data() : nullptr, out.data(), C, H,
                    W, OC, KH, KW, stride);
    std::vector<NodePtr> parents{x, kernels_n};
    if (bias) parents.push_back(bias);
    auto node = make_node(OpKind::conv2d, std::move(out), std::move(parents));
    node->backprop = [C, H, W, OC, KH, KW, stride, OH, OW](Node& self) {
        const auto& x_ = self.parents[0];
        const auto& k_ = self.parents[1];
        if (x_->requires_grad) {
            Tensor din({C, H, W});
            kernels::conv2d_grad_input(self.grad.data(), k_->value.data(), din.data(), C, H, W,
                                       OC, KH, KW, stride);
            x_->accumulate(din.data(), din.numel());
        }
        if (k_->requires_grad) {
            Tensor dk({OC, C, KH, KW});
            kernels::conv2d_grad_kernels(self.grad.data(), x_->value.data(), dk.data(), C, H, W,
                                         OC, KH, KW, stride);
            k_->accumulate(dk.data(), dk.numel());
        }
        if (self.parents.size() > 2 && self.parents[2]->requires_grad) {
            Tensor db({OC});
            kernels::conv2d_grad_bias(self.grad.data(), db.data(), OC, OH, OW);
            self.parents[2]->accumulate(db.data(), db.numel());
        }
    };
    return node;
}

namespace {

void check_pool(const Tensor& in, std::size_t ph, std::size_t pw, const char* what) {
    if (in.ndim() != 3) throw DimensionError(std::string(what) + ": input " + in.shape_str());
    if (ph == 0 || pw == 0 || in.dim(1) % ph != 0 || in.dim(2) % pw != 0) {
        throw DimensionError(std::string(what) + ": window " + std::to_string(ph) + "x" +
                             std::to_string(pw) + " does not divide " + in.shape_str());
    }
}

}  // namespace

NodePtr max_pool(const NodePtr& x, std::size_t ph, std::size_t pw) {
    const Tensor& in = x->value;
    check_pool(in, ph, pw, "max_pool");
    const std::size_t C = in.dim(0), H = in.dim(1), W = in.dim(2);
    Tensor out({C, H / ph, W / pw});
    auto argmax = std::make_shared<std::vector<std::size_t>>(out.numel());
    kernels::maxpool2d(in.data(), out.data(), argmax->data(), C, H, W, ph, pw);
    auto node = make_node(OpKind::max_pool, std::move(out), {x});
    node->backprop = [argmax, C, H, W, ph, pw](Node& self) {
        const auto& x_ = self.parents[0];
        if (!x_->requires_grad) return;
        Tensor din({C, H, W});
        kernels::maxpool2d_grad(self.grad.data(), argmax->data(), din.data(), C, H, W, ph, pw);
        x_->accumulate(din.data(), din.numel());
    };
    return node;
}

NodePtr mean_pool(const NodePtr& x, std::size_t ph, std::size_t pw) {
    const Tensor& in = x->value;
    check_pool(in, ph, pw, "mean_pool");
    const std::size_t C = in.dim(0), H = in.dim(1), W = in.dim(2);
    Tensor out({C, H / ph, W / pw});
    kernels::meanpool2d(in.data(), out.data(), C, H, W, ph, pw);
    auto node = make_node(OpKind::mean_pool, std::move(out), {x});
    node->backprop = [C, H, W, ph, pw](Node& self) {
        const auto& x_ = self.parents[0];
        if (!x_->requires_grad) return;
        Tensor din({C, H, W});
        kernels::meanpool2d_grad(self.grad.data(), din.data(), C, H, W, ph, pw);
        x_->accumulate(din.data(), din.numel());
    };
    return node;
}

NodePtr ce_with_logits(const NodePtr& logits, const Tensor& label) {
    if (!logits->value.same_shape(label)) {
        throw DimensionError("ce_with_logits: logits " + logits->value.shape_str() +
                             " vs label " + label.shape_str());
    }
    const std::size_t n = label.numel();
    const double* z = logits->value.data();
    double mx = z[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, z[i]);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::exp(z[i] - mx);
    const double lse = mx + std::log(acc);
    double mass = 0.0, dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mass += label[i];
        dot += label[i] * z[i];
    }
    Tensor out = Tensor::scalar(mass * lse - dot);
    auto node = make_node(OpKind::ce_logits, std::move(out), {logits});
    Tensor lab = label;
    node->backprop = [lab, lse, mass](Node& self) {
        const auto& z_ = self.parents[0];
        if (!z_->requires_grad) return;
        if (mass == 0.0) return;  // all-zero label: constant zero loss
        const double g = self.grad[0];
        const std::size_t n = z_->value.numel();
        Tensor tmp({n});
        for (std::size_t i = 0; i < n; ++i) {
            const double p = std::exp(z_->value[i] - lse);
            tmp[i] = g * (mass * p - lab[i]);
        }
        z_->accumulate(tmp.data(), n);
    };
    return node;
}

GradMap backward(const NodePtr& loss) {
    if (!loss) throw ContractError("backward: null loss node");
    if (!loss->value.is_scalar()) {
        throw ContractError("backward: loss must be scalar, got " + loss->value.shape_str());
    }
    // Gather the reachable subgraph; creation ids give a topological order.
    std::vector<Node*> order;
    std::unordered_map<const Node*, bool> seen;
    std::vector<Node*> stack{loss.get()};
    seen[loss.get()] = true;
    while (!stack.empty()) {
        Node* n = stack.back();
        stack.pop_back();
        order.push_back(n);
        for (const auto& p : n->parents) {
            if (!seen[p.get()]) {
                seen[p.get()] = true;
                stack.push_back(p.get());
            }
        }
    }
    std::sort(order.begin(), order.end(), [](Node* a, Node* b) { return a->id > b->id; });

    Tensor seed = Tensor::scalar(1.0);
    loss->accumulate(seed.data(), 1);

    GradMap grads;
    for (Node* n : order) {
        if (!n->requires_grad || !n->grad_init) continue;
        if (n->op == OpKind::leaf) {
            grads.emplace(n, n->grad);
        } else if (n->backprop) {
            n->backprop(*n);
        }
    }
    return grads;
}

}  // namespace grasplab::ag
