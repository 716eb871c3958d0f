// SPDX-License-Identifier: Apache-2.0
#include "simcse/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "simcse/error.hpp"

namespace simcse {

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x, double h) {
    if (!(h > 0.0)) throw ConfigError("finite_diff_grad: step h must be positive");
    NoGradGuard no_grad;
    Tensor probe = x.detach();
    std::vector<double> grad(x.numel());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double orig = probe[i];
        probe.mutable_data()[i] = orig + h;
        const double up = f(probe);
        probe.mutable_data()[i] = orig - h;
        const double down = f(probe);
        probe.mutable_data()[i] = orig;
        grad[i] = (up - down) / (2.0 * h);
    }
    return Tensor::from(x.shape(), std::move(grad));
}

std::vector<double> finite_diff_grad_inplace(const std::function<double()>& f, Tensor& param, double h) {
    if (!(h > 0.0)) throw ConfigError("finite_diff_grad: step h must be positive");
    NoGradGuard no_grad;
    auto values = param.mutable_data();
    std::vector<double> grad(values.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double orig = values[i];
        values[i] = orig + h;
        const double up = f();
        values[i] = orig - h;
        const double down = f();
        values[i] = orig;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

double finite_diff_at(const std::function<double()>& f, Tensor& param, std::size_t index, double h) {
    if (!(h > 0.0)) throw ConfigError("finite_diff_at: step h must be positive");
    if (index >= param.numel()) throw ShapeError("finite_diff_at: index out of range");
    NoGradGuard no_grad;
    auto values = param.mutable_data();
    const double orig = values[index];
    values[index] = orig + h;
    const double up = f();
    values[index] = orig - h;
    const double down = f();
    values[index] = orig;
    return (up - down) / (2.0 * h);
}

double relative_error(double analytic, double numeric, double floor) {
    return std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), floor});
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric, double floor) {
    if (analytic.size() != numeric.size()) throw ShapeError("max_relative_error: length mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) worst = std::max(worst, relative_error(analytic[i], numeric[i], floor));
    return worst;
}

}  // namespace simcse
