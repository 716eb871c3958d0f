// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "simcse/tensor.hpp"

/// Differentiable tensor operations. Every function records a backward rule when
/// any input requires grad. Broadcasting is limited to bias-add over the last
/// axis and scalar ops.
namespace simcse::ops {

// Elementwise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& x);

// Constant scalar factors and offsets.
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double offset);

// Differentiable scalar tensors (shape {} or {1}) applied to every element.
Tensor scale_by(const Tensor& x, const Tensor& factor);
Tensor shift_by(const Tensor& x, const Tensor& offset);

/// x[..., n] + bias[n]
Tensor add_bias(const Tensor& x, const Tensor& bias);

/// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);
/// Batched: [b,m,k] x [b,k,n] -> [b,m,n]
Tensor bmm(const Tensor& a, const Tensor& b);
/// Swaps the last two axes of a rank-2 or rank-3 tensor.
Tensor transpose_last(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);
/// General axis permutation; out.shape[i] = x.shape[perm[i]].
Tensor permute(const Tensor& x, const std::vector<std::size_t>& perm);

Tensor softmax(const Tensor& x);      // last axis, max-subtracted
Tensor log_softmax(const Tensor& x);  // last axis
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);

Tensor gelu(const Tensor& x);  // tanh approximation
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor square(const Tensor& x);

Tensor sum(const Tensor& x);   // -> scalar
Tensor mean(const Tensor& x);  // -> scalar
Tensor sum_last(const Tensor& x);  // [..., n] -> [...]

/// [V,d] table, ids in [0,V) -> [ids.size(), d]
Tensor gather_rows(const Tensor& table, std::span<const std::int32_t> ids);
/// [B,T,d] -> [B,d] at sequence position `t`.
Tensor select_position(const Tensor& x, std::size_t t);
/// [N,M] -> [N], picking column index[i] from row i.
Tensor pick(const Tensor& x, std::span<const std::size_t> index);
/// Concatenation along the last axis; leading dimensions must agree.
Tensor concat_last(const std::vector<Tensor>& parts);
/// Mask-weighted mean over positions: [B,T,d] with mask [B*T] in {0,1} -> [B,d].
Tensor masked_mean(const Tensor& x, std::span<const double> mask);
/// Row-wise unit normalization of [N,d]; throws NumericError on a zero row.
Tensor l2_normalize_rows(const Tensor& x);

/// Forward value of `sample`, gradient routed to `probs` unchanged.
Tensor straight_through(const Tensor& sample, const Tensor& probs);

}  // namespace simcse::ops
