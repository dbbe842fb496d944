#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecl/matrix.hpp"

namespace ecl {

class Rng;

enum class Activation { Identity, Relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct LayerGradients {
    Matrix weights;
    std::vector<double> bias;
};

/// Parameter gradients for a whole network plus dL/d(input), which lets a
/// head network backpropagate into the network feeding it.
struct Gradients {
    std::vector<LayerGradients> layers;
    Matrix input;
};

class DenseLayer {
public:
    DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act);

    std::size_t in_dim() const noexcept { return weights_.cols(); }
    std::size_t out_dim() const noexcept { return weights_.rows(); }
    Activation activation() const noexcept { return activation_; }

    Matrix& weights() noexcept { return weights_; }
    const Matrix& weights() const noexcept { return weights_; }
    std::vector<double>& bias() noexcept { return bias_; }
    const std::vector<double>& bias() const noexcept { return bias_; }

    /// Glorot-uniform weights, zero bias.
    void initialize(Rng& rng);

    /// Caches input and pre-activation for backward().
    const Matrix& forward(const Matrix& x);
    /// Stateless evaluation; safe to call concurrently on a shared layer.
    Matrix evaluate(const Matrix& x) const;

    /// grad_out is dL/d(activation output). Returns dL/d(input).
    Matrix backward(const Matrix& grad_out, LayerGradients& grads) const;

    void clear_cache() noexcept;

private:
    Matrix weights_;  // out x in
    std::vector<double> bias_;
    Activation activation_;
    Matrix cached_input_;
    Matrix cached_pre_;
    Matrix output_;
    bool has_cache_ = false;
};

/// Feedforward stack of dense layers. Hidden layers use ReLU, the last layer
/// is affine unless configured otherwise.
class Network {
public:
    Network() = default;
    explicit Network(std::vector<DenseLayer> layers);

    /// Builds in -> hidden[0] -> ... -> out with ReLU hidden layers and the
    /// given output activation, Glorot-initialized from rng.
    static Network mlp(std::size_t in_dim, const std::vector<std::size_t>& hidden,
                       std::size_t out_dim, Activation output_activation, Rng& rng);

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::size_t parameter_count() const noexcept;
    std::span<DenseLayer> layers() noexcept { return layers_; }
    std::span<const DenseLayer> layers() const noexcept { return layers_; }

    /// Training forward pass: validates input, caches activations.
    Matrix forward(const Matrix& batch);
    /// Inference forward pass without caching.
    Matrix predict(const Matrix& batch) const;
    /// Requires a preceding forward(); upstream is dL/d(output).
    Gradients backward(const Matrix& upstream);

    /// Gradient buffers of matching shapes, zero-filled.
    Gradients zero_gradients() const;

    friend bool operator==(const Network& a, const Network& b);

private:
    void check_input(const Matrix& batch) const;

    std::vector<DenseLayer> layers_;
    std::size_t cached_rows_ = 0;
    bool has_forward_ = false;
};

/// Max-subtracted softmax. Throws ValidationError on empty or non-finite input.
std::vector<double> softmax(std::span<const double> logits);

/// Row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

inline constexpr double kProbabilityFloor = 1e-12;

/// -log(max(predicted[label], 1e-12)). Throws IndexError if label is out of range.
double cross_entropy(std::span<const double> predicted, std::size_t label);

struct LossAndGradient {
    double mean_loss = 0.0;
    Matrix grad_logits;  // (softmax - onehot) / B
};

/// Fused softmax + cross-entropy over a batch of logits. labels.size() must
/// equal logits.rows().
LossAndGradient softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

/// Row index of the maximum; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);

}  // namespace ecl
