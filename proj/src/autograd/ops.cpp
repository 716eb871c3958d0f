// SPDX-License-Identifier: Apache-2.0
#include "simcse/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "simcse/error.hpp"

namespace simcse::ops {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
    }
}

void require_scalar(const Tensor& s, const char* op) {
    if (s.numel() != 1) throw ShapeError(std::string(op) + ": expected scalar, got " + shape_to_string(s.shape()));
}

// Runs `fn(grad_buffer)` only when `t` participates in differentiation.
template <typename Fn>
void accumulate(Tensor t, Fn&& fn) {
    if (t.defined() && t.requires_grad()) fn(t.mutable_grad());
}

std::size_t last_dim(const Tensor& x) {
    if (x.rank() == 0) throw ShapeError("operation needs at least one axis, got a scalar");
    return x.shape().back();
}

template <typename F, typename D>
Tensor unary(const Tensor& x, F f, D dfdx) {
    auto in = x.data();
    std::vector<double> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
    return make_result(x.shape(), std::move(out), {x}, [x, dfdx](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) {
            auto xv = x.data();
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * dfdx(xv[i]);
        });
    });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    return make_result(a.shape(), std::move(out), {a, b}, [a, b](std::span<const double> g) {
        accumulate(a, [&](std::span<double> ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i]; });
        accumulate(b, [&](std::span<double> gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i]; });
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
    return make_result(a.shape(), std::move(out), {a, b}, [a, b](std::span<const double> g) {
        accumulate(a, [&](std::span<double> ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i]; });
        accumulate(b, [&](std::span<double> gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i]; });
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
    return make_result(a.shape(), std::move(out), {a, b}, [a, b](std::span<const double> g) {
        accumulate(a, [&](std::span<double> ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i]; });
        accumulate(b, [&](std::span<double> gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i]; });
    });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor scale(const Tensor& x, double factor) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * factor;
    return make_result(x.shape(), std::move(out), {x}, [x, factor](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) { for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor; });
    });
}

Tensor add_scalar(const Tensor& x, double offset) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + offset;
    return make_result(x.shape(), std::move(out), {x}, [x](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) { for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i]; });
    });
}

Tensor scale_by(const Tensor& x, const Tensor& factor) {
    require_scalar(factor, "scale_by");
    const double s = factor[0];
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * s;
    return make_result(x.shape(), std::move(out), {x, factor}, [x, factor, s](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) { for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * s; });
        accumulate(factor, [&](std::span<double> gf) {
            double acc = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * x[i];
            gf[0] += acc;
        });
    });
}

Tensor shift_by(const Tensor& x, const Tensor& offset) {
    require_scalar(offset, "shift_by");
    const double s = offset[0];
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + s;
    return make_result(x.shape(), std::move(out), {x, offset}, [x, offset](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) { for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i]; });
        accumulate(offset, [&](std::span<double> go) {
            double acc = 0.0;
            for (double v : g) acc += v;
            go[0] += acc;
        });
    });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
    const std::size_t n = last_dim(x);
    if (bias.rank() != 1 || bias.dim(0) != n) {
        throw ShapeError("add_bias: bias " + shape_to_string(bias.shape()) + " does not match last axis of " +
                         shape_to_string(x.shape()));
    }
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + bias[i % n];
    return make_result(x.shape(), std::move(out), {x, bias}, [x, bias, n](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) { for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i]; });
        accumulate(bias, [&](std::span<double> gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i % n] += g[i]; });
    });
}

namespace {

// c[m,n] += a[m,k] * b[k,n], with optional transposes expressed by strides.
void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n,
              bool trans_a, bool trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = trans_a ? a[p * m + i] : a[i * k + p];
            if (av == 0.0) continue;
            double* crow = c + i * n;
            if (trans_b) {
                for (std::size_t j = 0; j < n; ++j) crow[j] += av * b[j * k + p];
            } else {
                const double* brow = b + p * n;
                for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw ShapeError("matmul: incompatible shapes " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<double> out(m * n, 0.0);
    gemm_acc(a.data().data(), b.data().data(), out.data(), m, k, n, false, false);
    return make_result({m, n}, std::move(out), {a, b}, [a, b, m, k, n](std::span<const double> g) {
        // dA = dC * B^T, dB = A^T * dC
        accumulate(a, [&](std::span<double> ga) { gemm_acc(g.data(), b.data().data(), ga.data(), m, n, k, false, true); });
        accumulate(b, [&](std::span<double> gb) { gemm_acc(a.data().data(), g.data(), gb.data(), k, m, n, true, false); });
    });
}

Tensor bmm(const Tensor& a, const Tensor& b) {
    if (a.rank() != 3 || b.rank() != 3 || a.dim(0) != b.dim(0) || a.dim(2) != b.dim(1)) {
        throw ShapeError("bmm: incompatible shapes " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
    }
    const std::size_t batch = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
    std::vector<double> out(batch * m * n, 0.0);
    for (std::size_t s = 0; s < batch; ++s) {
        gemm_acc(a.data().data() + s * m * k, b.data().data() + s * k * n, out.data() + s * m * n, m, k, n, false,
                 false);
    }
    return make_result({batch, m, n}, std::move(out), {a, b}, [a, b, batch, m, k, n](std::span<const double> g) {
        accumulate(a, [&](std::span<double> ga) {
            for (std::size_t s = 0; s < batch; ++s)
                gemm_acc(g.data() + s * m * n, b.data().data() + s * k * n, ga.data() + s * m * k, m, n, k, false, true);
        });
        accumulate(b, [&](std::span<double> gb) {
            for (std::size_t s = 0; s < batch; ++s)
                gemm_acc(a.data().data() + s * m * k, g.data() + s * m * n, gb.data() + s * k * n, k, m, n, true, false);
        });
    });
}

Tensor transpose_last(const Tensor& x) {
    if (x.rank() == 2) return permute(x, {1, 0});
    if (x.rank() == 3) return permute(x, {0, 2, 1});
    throw ShapeError("transpose_last: expected rank 2 or 3, got " + shape_to_string(x.shape()));
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) {
        throw ShapeError("reshape: cannot view " + shape_to_string(x.shape()) + " as " + shape_to_string(shape));
    }
    std::vector<double> out(x.data().begin(), x.data().end());
    return make_result(std::move(shape), std::move(out), {x}, [x](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) { for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i]; });
    });
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& perm) {
    const std::size_t r = x.rank();
    if (perm.size() != r) throw ShapeError("permute: permutation rank does not match " + shape_to_string(x.shape()));
    std::vector<bool> seen(r, false);
    for (auto p : perm) {
        if (p >= r || seen[p]) throw ShapeError("permute: invalid permutation");
        seen[p] = true;
    }
    Shape out_shape(r);
    for (std::size_t i = 0; i < r; ++i) out_shape[i] = x.dim(perm[i]);
    std::vector<std::size_t> in_strides(r, 1);
    for (std::size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * x.dim(i);

    // Source offset of each output element, shared by forward and backward.
    const std::size_t n = x.numel();
    std::vector<std::size_t> source(n);
    std::vector<std::size_t> idx(r, 0);
    for (std::size_t o = 0; o < n; ++o) {
        std::size_t off = 0;
        for (std::size_t i = 0; i < r; ++i) off += idx[i] * in_strides[perm[i]];
        source[o] = off;
        for (std::size_t i = r; i-- > 0;) {
            if (++idx[i] < out_shape[i]) break;
            idx[i] = 0;
        }
    }
    std::vector<double> out(n);
    for (std::size_t o = 0; o < n; ++o) out[o] = x[source[o]];
    return make_result(std::move(out_shape), std::move(out), {x}, [x, source = std::move(source)](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) { for (std::size_t o = 0; o < g.size(); ++o) gx[source[o]] += g[o]; });
    });
}

Tensor softmax(const Tensor& x) {
    const std::size_t n = last_dim(x);
    const std::size_t rows = x.numel() / n;
    std::vector<double> y(x.numel());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = x.data().data() + r * n;
        double* out = y.data() + r * n;
        const double mx = *std::max_element(in, in + n);
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) total += (out[j] = std::exp(in[j] - mx));
        for (std::size_t j = 0; j < n; ++j) out[j] /= total;
    }
    auto saved = y;
    return make_result(x.shape(), std::move(y), {x}, [x, y = std::move(saved), n, rows](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) {
            for (std::size_t r = 0; r < rows; ++r) {
                const std::size_t base = r * n;
                double dot = 0.0;
                for (std::size_t j = 0; j < n; ++j) dot += g[base + j] * y[base + j];
                for (std::size_t j = 0; j < n; ++j) gx[base + j] += y[base + j] * (g[base + j] - dot);
            }
        });
    });
}

Tensor log_softmax(const Tensor& x) {
    const std::size_t n = last_dim(x);
    const std::size_t rows = x.numel() / n;
    std::vector<double> y(x.numel());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = x.data().data() + r * n;
        const double mx = *std::max_element(in, in + n);
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) total += std::exp(in[j] - mx);
        const double lse = mx + std::log(total);
        for (std::size_t j = 0; j < n; ++j) y[r * n + j] = in[j] - lse;
    }
    auto saved = y;
    return make_result(x.shape(), std::move(y), {x}, [x, y = std::move(saved), n, rows](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) {
            for (std::size_t r = 0; r < rows; ++r) {
                const std::size_t base = r * n;
                double gsum = 0.0;
                for (std::size_t j = 0; j < n; ++j) gsum += g[base + j];
                for (std::size_t j = 0; j < n; ++j) gx[base + j] += g[base + j] - std::exp(y[base + j]) * gsum;
            }
        });
    });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    const std::size_t d = last_dim(x);
    if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
        throw ShapeError("layer_norm: gamma/beta must be [" + std::to_string(d) + "], got " +
                         shape_to_string(gamma.shape()) + " and " + shape_to_string(beta.shape()));
    }
    if (!(eps > 0.0)) throw ConfigError("layer_norm: eps must be positive");
    const std::size_t rows = x.numel() / d;
    std::vector<double> xhat(x.numel()), rstd(rows), y(x.numel());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = x.data().data() + r * d;
        double mu = 0.0;
        for (std::size_t j = 0; j < d; ++j) mu += in[j];
        mu /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += (in[j] - mu) * (in[j] - mu);
        var /= static_cast<double>(d);
        rstd[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < d; ++j) {
            xhat[r * d + j] = (in[j] - mu) * rstd[r];
            y[r * d + j] = gamma[j] * xhat[r * d + j] + beta[j];
        }
    }
    return make_result(x.shape(), std::move(y), {x, gamma, beta},
                       [x, gamma, beta, xhat = std::move(xhat), rstd = std::move(rstd), d, rows](std::span<const double> g) {
        accumulate(gamma, [&](std::span<double> gg) {
            for (std::size_t i = 0; i < g.size(); ++i) gg[i % d] += g[i] * xhat[i];
        });
        accumulate(beta, [&](std::span<double> gb) {
            for (std::size_t i = 0; i < g.size(); ++i) gb[i % d] += g[i];
        });
        accumulate(x, [&](std::span<double> gx) {
            std::vector<double> dxhat(d);
            for (std::size_t r = 0; r < rows; ++r) {
                const std::size_t base = r * d;
                double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    dxhat[j] = g[base + j] * gamma[j];
                    mean_dxhat += dxhat[j];
                    mean_dxhat_xhat += dxhat[j] * xhat[base + j];
                }
                mean_dxhat /= static_cast<double>(d);
                mean_dxhat_xhat /= static_cast<double>(d);
                for (std::size_t j = 0; j < d; ++j) {
                    gx[base + j] += rstd[r] * (dxhat[j] - mean_dxhat - xhat[base + j] * mean_dxhat_xhat);
                }
            }
        });
    });
}

Tensor gelu(const Tensor& x) {
    static const double c = std::sqrt(2.0 / std::numbers::pi);
    constexpr double k = 0.044715;
    return unary(
        x, [](double v) { return 0.5 * v * (1.0 + std::tanh(c * (v + k * v * v * v))); },
        [](double v) {
            const double t = std::tanh(c * (v + k * v * v * v));
            return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * c * (1.0 + 3.0 * k * v * v);
        });
}

Tensor tanh(const Tensor& x) {
    return unary(
        x, [](double v) { return std::tanh(v); },
        [](double v) {
            const double t = std::tanh(v);
            return 1.0 - t * t;
        });
}

namespace {
double stable_sigmoid(double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}
}  // namespace

Tensor sigmoid(const Tensor& x) {
    return unary(
        x, stable_sigmoid,
        [](double v) {
            const double s = stable_sigmoid(v);
            return s * (1.0 - s);
        });
}

Tensor exp(const Tensor& x) {
    return unary(x, [](double v) { return std::exp(v); }, [](double v) { return std::exp(v); });
}

Tensor log(const Tensor& x) {
    return unary(x, [](double v) { return std::log(v); }, [](double v) { return 1.0 / v; });
}

Tensor abs(const Tensor& x) {
    return unary(
        x, [](double v) { return std::fabs(v); }, [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& x) {
    return unary(x, [](double v) { return v * v; }, [](double v) { return 2.0 * v; });
}

Tensor sum(const Tensor& x) {
    double total = 0.0;
    for (double v : x.data()) total += v;
    return make_result({}, {total}, {x}, [x](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) { for (auto& v : gx) v += g[0]; });
    });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor sum_last(const Tensor& x) {
    const std::size_t n = last_dim(x);
    const std::size_t rows = x.numel() / n;
    Shape out_shape(x.shape().begin(), x.shape().end() - 1);
    std::vector<double> out(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < n; ++j) out[r] += x[r * n + j];
    return make_result(std::move(out_shape), std::move(out), {x}, [x, n](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) { for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i / n]; });
    });
}

Tensor gather_rows(const Tensor& table, std::span<const std::int32_t> ids) {
    if (table.rank() != 2) throw ShapeError("gather_rows: table must be rank 2, got " + shape_to_string(table.shape()));
    const std::size_t vocab = table.dim(0), d = table.dim(1);
    std::vector<std::int32_t> rows(ids.begin(), ids.end());
    std::vector<double> out(rows.size() * d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= vocab) {
            throw DataError("token id " + std::to_string(rows[i]) + " out of range for vocabulary of size " +
                            std::to_string(vocab));
        }
        std::copy_n(table.data().begin() + static_cast<std::ptrdiff_t>(rows[i] * d), d, out.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    const std::size_t n = rows.size();
    return make_result({n, d}, std::move(out), {table}, [table, rows = std::move(rows), d](std::span<const double> g) {
        accumulate(table, [&](std::span<double> gt) {
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = 0; j < d; ++j) gt[static_cast<std::size_t>(rows[i]) * d + j] += g[i * d + j];
        });
    });
}

Tensor select_position(const Tensor& x, std::size_t t) {
    if (x.rank() != 3 || t >= x.dim(1)) {
        throw ShapeError("select_position: position " + std::to_string(t) + " invalid for " + shape_to_string(x.shape()));
    }
    const std::size_t b = x.dim(0), len = x.dim(1), d = x.dim(2);
    std::vector<double> out(b * d);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < d; ++j) out[i * d + j] = x[(i * len + t) * d + j];
    return make_result({b, d}, std::move(out), {x}, [x, b, len, d, t](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) {
            for (std::size_t i = 0; i < b; ++i)
                for (std::size_t j = 0; j < d; ++j) gx[(i * len + t) * d + j] += g[i * d + j];
        });
    });
}

Tensor pick(const Tensor& x, std::span<const std::size_t> index) {
    if (x.rank() != 2 || index.size() != x.dim(0)) {
        throw ShapeError("pick: need one index per row of " + shape_to_string(x.shape()));
    }
    const std::size_t rows = x.dim(0), cols = x.dim(1);
    std::vector<std::size_t> idx(index.begin(), index.end());
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        if (idx[r] >= cols) throw ShapeError("pick: column index out of range");
        out[r] = x[r * cols + idx[r]];
    }
    return make_result({rows}, std::move(out), {x}, [x, idx = std::move(idx), cols](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) {
            for (std::size_t r = 0; r < idx.size(); ++r) gx[r * cols + idx[r]] += g[r];
        });
    });
}

Tensor concat_last(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat_last: no inputs");
    const Shape lead(parts[0].shape().begin(), parts[0].shape().end() - 1);
    std::vector<std::size_t> widths;
    std::size_t total = 0;
    for (const auto& p : parts) {
        if (Shape(p.shape().begin(), p.shape().end() - 1) != lead) {
            throw ShapeError("concat_last: leading dimensions differ: " + shape_to_string(parts[0].shape()) + " vs " +
                             shape_to_string(p.shape()));
        }
        widths.push_back(last_dim(p));
        total += widths.back();
    }
    const std::size_t rows = shape_numel(lead);
    std::vector<double> out(rows * total);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < widths[k]; ++j) out[r * total + offset + j] = parts[k][r * widths[k] + j];
        offset += widths[k];
    }
    Shape out_shape = lead;
    out_shape.push_back(total);
    return make_result(std::move(out_shape), std::move(out), parts, [parts, widths, rows, total](std::span<const double> g) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < parts.size(); ++k) {
            accumulate(parts[k], [&](std::span<double> gp) {
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t j = 0; j < widths[k]; ++j) gp[r * widths[k] + j] += g[r * total + off + j];
            });
            off += widths[k];
        }
    });
}

Tensor masked_mean(const Tensor& x, std::span<const double> mask) {
    if (x.rank() != 3 || mask.size() != x.dim(0) * x.dim(1)) {
        throw ShapeError("masked_mean: mask of " + std::to_string(mask.size()) + " entries does not fit " +
                         shape_to_string(x.shape()));
    }
    const std::size_t b = x.dim(0), len = x.dim(1), d = x.dim(2);
    std::vector<double> weights(b * len);
    for (std::size_t i = 0; i < b; ++i) {
        double count = 0.0;
        for (std::size_t t = 0; t < len; ++t) count += mask[i * len + t];
        if (count <= 0.0) throw DataError("masked_mean: row " + std::to_string(i) + " has no unmasked positions");
        for (std::size_t t = 0; t < len; ++t) weights[i * len + t] = mask[i * len + t] / count;
    }
    std::vector<double> out(b * d, 0.0);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t t = 0; t < len; ++t) {
            const double w = weights[i * len + t];
            if (w == 0.0) continue;
            for (std::size_t j = 0; j < d; ++j) out[i * d + j] += w * x[(i * len + t) * d + j];
        }
    return make_result({b, d}, std::move(out), {x}, [x, weights = std::move(weights), b, len, d](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) {
            for (std::size_t i = 0; i < b; ++i)
                for (std::size_t t = 0; t < len; ++t)
                    for (std::size_t j = 0; j < d; ++j) gx[(i * len + t) * d + j] += weights[i * len + t] * g[i * d + j];
        });
    });
}

Tensor l2_normalize_rows(const Tensor& x) {
    if (x.rank() != 2) throw ShapeError("l2_normalize_rows: expected [N,d], got " + shape_to_string(x.shape()));
    const std::size_t rows = x.dim(0), d = x.dim(1);
    std::vector<double> norms(rows), y(x.numel());
    for (std::size_t r = 0; r < rows; ++r) {
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) sq += x[r * d + j] * x[r * d + j];
        norms[r] = std::sqrt(sq);
        if (!(norms[r] > 0.0)) throw NumericError("cosine similarity of a zero-norm embedding (row " + std::to_string(r) + ")");
        for (std::size_t j = 0; j < d; ++j) y[r * d + j] = x[r * d + j] / norms[r];
    }
    auto saved = y;
    // Projection form: dx = (g - y (y.g)) / |x|, finite even when two inputs coincide.
    return make_result({rows, d}, std::move(y), {x}, [x, y = std::move(saved), norms = std::move(norms), d](std::span<const double> g) {
        accumulate(x, [&](std::span<double> gx) {
            for (std::size_t r = 0; r < norms.size(); ++r) {
                double dot = 0.0;
                for (std::size_t j = 0; j < d; ++j) dot += y[r * d + j] * g[r * d + j];
                for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += (g[r * d + j] - y[r * d + j] * dot) / norms[r];
            }
        });
    });
}

Tensor straight_through(const Tensor& sample, const Tensor& probs) {
    require_same_shape(sample, probs, "straight_through");
    std::vector<double> out(sample.data().begin(), sample.data().end());
    return make_result(sample.shape(), std::move(out), {probs}, [probs](std::span<const double> g) {
        accumulate(probs, [&](std::span<double> gp) { for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i]; });
    });
}

}  // namespace simcse::ops
