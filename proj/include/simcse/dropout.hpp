// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simcse/rng.hpp"
#include "simcse/tensor.hpp"

namespace simcse {

enum class Mode { train, eval };

enum class DropoutKind { standard, curriculum, adaptive };

std::string to_string(DropoutKind kind);
DropoutKind parse_dropout_kind(std::string_view name);

struct CurriculumSchedule {
    double gamma = 5.0;            // saturation speed, > 0
    std::int64_t total_steps = 1;  // steps over which gamma applies, > 0
};

// Initial values of the learnable standout gate pi = sigmoid(alpha * a + beta).
struct StandoutInit {
    double alpha = 1.0;
    double beta = 0.0;
};

/// Which dropout regime runs at every dropout site of the encoder. `p` is the
/// rate for standard dropout and the target rate of the curriculum schedule.
struct DropoutPolicy {
    DropoutKind kind = DropoutKind::standard;
    double p = 0.3;
    std::optional<CurriculumSchedule> curriculum;
    std::optional<StandoutInit> adaptive;

    static DropoutPolicy standard(double p);
    static DropoutPolicy curriculum_policy(double p_target, double gamma, std::int64_t total_steps);
    static DropoutPolicy adaptive_policy(double alpha, double beta);

    /// Throws ConfigError unless p is in [0,1) and the kind's parameters are
    /// present (and only those).
    void validate() const;
};

// Mask drawn by one dropout call, kept for inspection and tests.
struct MaskRecord {
    std::vector<std::uint8_t> mask;
    std::vector<double> keep_prob;
    std::int64_t step = 0;
};

/// Inverted dropout: train mode zeroes each unit with probability p and scales
/// survivors by 1/(1-p); eval mode and p == 0 are the identity.
Tensor standard_dropout(const Tensor& x, double p, Mode mode, Rng& rng, MaskRecord* record = nullptr);

/// p(step) = p_target * (1 - exp(-gamma * step / total_steps)).
double curriculum_rate(std::int64_t step, const DropoutPolicy& policy);

Tensor curriculum_dropout(const Tensor& x, std::int64_t step, const DropoutPolicy& policy, Mode mode, Rng& rng,
                          MaskRecord* record = nullptr);

/// Standout dropout. Keep probability pi_j = sigmoid(alpha * a_j + beta) from the
/// unit's pre-dropout activation a_j. Train mode multiplies by a Bernoulli(pi)
/// mask without rescaling (gradient reaches alpha, beta and `activations` through
/// a straight-through estimate of the mask); eval mode multiplies by pi.
Tensor adaptive_dropout(const Tensor& x, const Tensor& activations, const Tensor& alpha, const Tensor& beta, Mode mode,
                        Rng& rng, MaskRecord* record = nullptr);

// Learnable standout parameters for one dropout site.
struct StandoutGate {
    Tensor alpha;
    Tensor beta;
};

/// Dispatches to the policy's regime. `gate` is required for adaptive policies.
Tensor apply_dropout(const Tensor& x, const DropoutPolicy& policy, const StandoutGate* gate, Mode mode,
                     std::int64_t step, Rng& rng, MaskRecord* record = nullptr);

}  // namespace simcse
