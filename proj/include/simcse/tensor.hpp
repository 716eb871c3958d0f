// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace simcse {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

class Tensor;

namespace detail {

// Receives the gradient flowing into a node's output and accumulates
// contributions into the node's inputs.
using BackwardFn = std::function<void(std::span<const double> grad_out)>;

struct Node {
    std::vector<Tensor> inputs;
    BackwardFn backward;
};

struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty when absent
    bool requires_grad = false;
    std::unique_ptr<Node> node;
};

}  // namespace detail

/// Dense row-major tensor of doubles with an optional reverse-mode graph node.
///
/// Tensor is a shared handle: copies alias the same storage and gradient, like a
/// framework variable. Use clone() for an independent deep copy. A scalar has
/// the empty shape {}.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }

    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t numel() const;

    std::span<const double> data() const;
    std::span<double> mutable_data();
    double item() const;
    double operator[](std::size_t i) const { return data()[i]; }

    bool requires_grad() const;
    Tensor& set_requires_grad(bool value);
    bool is_leaf() const;

    bool has_grad() const;
    std::span<const double> grad() const;
    /// Gradient buffer, allocated as zeros on first access.
    std::span<double> mutable_grad();
    /// Releases the gradient; parameters without a gradient are skipped by optimizers.
    void zero_grad();

    /// Same values, detached from the graph and not requiring grad.
    Tensor detach() const;
    /// Deep copy of values; keeps requires_grad, drops graph and gradient.
    Tensor clone() const;

    const detail::TensorImpl* impl() const { return impl_.get(); }

    friend bool same_storage(const Tensor& a, const Tensor& b) { return a.impl_ == b.impl_; }

private:
    friend Tensor make_result(Shape, std::vector<double>, std::vector<Tensor>, detail::BackwardFn);
    friend void backward(const Tensor& loss);

    std::shared_ptr<detail::TensorImpl> impl_;
};

/// Builds an op output. When gradient recording is enabled and any input requires
/// grad, the output records a node whose `backward` receives d(loss)/d(output)
/// and must accumulate into the inputs via Tensor::mutable_grad().
Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                   detail::BackwardFn backward);

/// Reverse-mode sweep from a scalar loss. Gradients accumulate additively into
/// every reachable tensor that requires grad.
void backward(const Tensor& loss);

bool grad_enabled();

// Disables graph recording for the guard's lifetime (evaluation passes).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;
};

}  // namespace simcse
