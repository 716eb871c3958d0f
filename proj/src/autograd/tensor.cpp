// SPDX-License-Identifier: Apache-2.0
#include "simcse/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "simcse/error.hpp"

namespace simcse {

namespace {
thread_local int no_grad_depth = 0;
}

bool grad_enabled() { return no_grad_depth == 0; }
NoGradGuard::NoGradGuard() { ++no_grad_depth; }
NoGradGuard::~NoGradGuard() { --no_grad_depth; }

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_to_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    for (auto d : shape) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_to_string(shape));
    }
    if (shape_numel(shape) != values.size()) {
        throw ShapeError("shape " + shape_to_string(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
    }
    Tensor t;
    t.impl_ = std::make_shared<detail::TensorImpl>();
    t.impl_->shape = std::move(shape);
    t.impl_->data = std::move(values);
    t.impl_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    const auto n = shape_numel(shape);
    return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({}, {value}, requires_grad); }

const Shape& Tensor::shape() const { return impl_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= rank()) throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_to_string(shape()));
    return impl_->shape[axis];
}

std::size_t Tensor::numel() const { return impl_->data.size(); }
std::span<const double> Tensor::data() const { return impl_->data; }
std::span<double> Tensor::mutable_data() { return impl_->data; }

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_to_string(shape()));
    return impl_->data[0];
}

bool Tensor::requires_grad() const { return impl_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool value) {
    impl_->requires_grad = value;
    return *this;
}

bool Tensor::is_leaf() const { return impl_->node == nullptr; }
bool Tensor::has_grad() const { return !impl_->grad.empty(); }
std::span<const double> Tensor::grad() const { return impl_->grad; }

std::span<double> Tensor::mutable_grad() {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
    return impl_->grad;
}

void Tensor::zero_grad() {
    impl_->grad.clear();
    impl_->grad.shrink_to_fit();
}

Tensor Tensor::detach() const { return from(shape(), impl_->data, false); }

Tensor Tensor::clone() const { return from(shape(), impl_->data, impl_->requires_grad); }

Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                   detail::BackwardFn backward_fn) {
    Tensor out = Tensor::from(std::move(shape), std::move(values));
    if (!grad_enabled()) return out;
    const bool any = std::any_of(inputs.begin(), inputs.end(),
                                 [](const Tensor& t) { return t.defined() && t.requires_grad(); });
    if (!any) return out;
    out.impl_->requires_grad = true;
    out.impl_->node = std::make_unique<detail::Node>(detail::Node{std::move(inputs), std::move(backward_fn)});
    return out;
}

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw ShapeError("backward() requires a scalar loss, got shape " +
                         (loss.defined() ? shape_to_string(loss.shape()) : std::string("<undefined>")));
    }
    if (!loss.requires_grad()) return;

    // Iterative post-order DFS gives a topological order (inputs before outputs).
    std::vector<detail::TensorImpl*> order;
    std::unordered_set<detail::TensorImpl*> visited;
    std::vector<std::pair<detail::TensorImpl*, std::size_t>> stack;
    stack.emplace_back(loss.impl_.get(), 0);
    visited.insert(loss.impl_.get());
    while (!stack.empty()) {
        auto& [impl, next] = stack.back();
        if (impl->node && next < impl->node->inputs.size()) {
            auto* child = const_cast<detail::TensorImpl*>(impl->node->inputs[next++].impl());
            if (child && child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
            continue;
        }
        order.push_back(impl);
        stack.pop_back();
    }

    // Interior gradients start fresh on every sweep; leaves accumulate.
    for (auto* impl : order) {
        if (impl->node) impl->grad.assign(impl->data.size(), 0.0);
    }
    if (loss.impl_->grad.empty()) loss.impl_->grad.assign(1, 0.0);
    loss.impl_->grad[0] += 1.0;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        auto* impl = *it;
        if (impl->node && impl->node->backward) impl->node->backward(impl->grad);
    }
}

}  // namespace simcse
