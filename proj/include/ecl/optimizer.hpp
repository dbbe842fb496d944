#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecl/matrix.hpp"
#include "ecl/nn.hpp"

namespace ecl {

enum class OptimizerKind { Sgd, Adam };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_kind_from_string(const std::string& s);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
    friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

/// Optimizer hyperparameters plus per-parameter moment buffers. Buffers are
/// sized lazily on the first update so one state can be built before the
/// network it is paired with.
struct OptimizerState {
    explicit OptimizerState(OptimizerConfig cfg = {});

    OptimizerConfig config;
    std::vector<Matrix> first_w, second_w;
    std::vector<std::vector<double>> first_b, second_b;
    std::uint64_t step = 0;
};

/// One optimizer step. SGD: p -= lr * g. Adam: bias-corrected moments,
/// p -= lr * m_hat / (sqrt(v_hat) + eps).
void apply_update(Network& net, const Gradients& grads, OptimizerState& opt);

}  // namespace ecl
