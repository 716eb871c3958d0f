// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "simcse/tensor.hpp"

namespace simcse {

/// Central-difference gradient (f(x+h e_i) - f(x-h e_i)) / 2h of a scalar
/// function, evaluated on a detached copy of `x`.
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x, double h = 1e-5);

/// Same estimate for a tensor captured inside `f` (e.g. a model parameter):
/// perturbs `param` in place one coordinate at a time and restores it.
std::vector<double> finite_diff_grad_inplace(const std::function<double()>& f, Tensor& param, double h = 1e-5);

/// Central difference for a single coordinate of `param`.
double finite_diff_at(const std::function<double()>& f, Tensor& param, std::size_t index, double h = 1e-5);

/// |analytic - numeric| / max(|analytic|, |numeric|, floor). The floor keeps
/// near-zero gradients from turning finite-difference noise into large ratios.
double relative_error(double analytic, double numeric, double floor = 1e-5);
/// Largest per-coordinate relative_error.
double max_relative_error(std::span<const double> analytic, std::span<const double> numeric, double floor = 1e-5);

}  // namespace simcse
