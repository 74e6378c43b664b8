#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "comets/nn/tensor.hpp"

namespace comets::nn {

/// One value in a recorded computation. Interior nodes own a closure that
/// pushes their gradient into their parents; leaves accumulate gradients.
struct Node {
    Tensor value;
    std::vector<double> grad;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;
    bool requires_grad = false;
    bool consumed = false;

    std::vector<double>& grad_buffer() {
        if (grad.empty()) grad.assign(value.size(), 0.0);
        return grad;
    }
    bool is_leaf() const noexcept { return !backward_fn && parents.empty(); }
};

/// Handle to a node. Copies share the node.
class Var {
public:
    Var() = default;
    explicit Var(Tensor value, bool requires_grad = false);

    const Tensor& value() const { return node_->value; }
    Tensor& mutable_value() { return node_->value; }
    const Shape& shape() const { return node_->value.shape(); }
    std::size_t size() const { return node_->value.size(); }
    double item() const { return node_->value[0]; }

    bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
    void set_requires_grad(bool on) { node_->requires_grad = on; }

    /// Accumulated gradient; empty when nothing reached this node.
    const std::vector<double>& grad() const { return node_->grad; }
    void zero_grad() { node_->grad.clear(); }

    Node* node() const noexcept { return node_.get(); }
    const std::shared_ptr<Node>& ptr() const noexcept { return node_; }
    bool defined() const noexcept { return static_cast<bool>(node_); }

private:
    std::shared_ptr<Node> node_;
    friend Var make_op(Tensor, std::vector<Var>, std::function<void(Node&)>);
};

/// Creates an interior node. When no parent requires a gradient the result is
/// a constant and the closure is dropped.
Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward);

/// While alive, operations record nothing and return constants.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

/// Reverse pass from a scalar root (seed 1). The recording is released
/// afterwards; a second call on the same root throws std::logic_error.
void backward(const Var& root);
void backward(const Var& root, const Tensor& seed);

}  // namespace comets::nn
