#include "ecl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ecl/error.hpp"
#include "ecl/rng.hpp"

namespace ecl {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
    }
    return "identity";
}

Activation activation_from_string(const std::string& s) {
    if (s == "identity") return Activation::Identity;
    if (s == "relu") return Activation::Relu;
    throw ValidationError("unknown activation '" + s + "'");
}

// ---------------------------------------------------------------------------

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act)
    : weights_(out_dim, in_dim), bias_(out_dim, 0.0), activation_(act) {
    if (in_dim == 0 || out_dim == 0) throw ShapeError("dense layer dimensions must be positive");
}

void DenseLayer::initialize(Rng& rng) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(weights_.rows() + weights_.cols()));
    for (double& w : weights_.data()) w = rng.uniform(-limit, limit);
    std::fill(bias_.begin(), bias_.end(), 0.0);
}

namespace {

void apply_activation(Activation act, Matrix& m) {
    if (act == Activation::Relu) {
        for (double& v : m.data()) v = v > 0.0 ? v : 0.0;
    }
}

}  // namespace

const Matrix& DenseLayer::forward(const Matrix& x) {
    cached_input_ = x;
    affine(x, weights_, bias_, cached_pre_);
    output_ = cached_pre_;
    apply_activation(activation_, output_);
    has_cache_ = true;
    return output_;
}

Matrix DenseLayer::evaluate(const Matrix& x) const {
    Matrix out;
    affine(x, weights_, bias_, out);
    apply_activation(activation_, out);
    return out;
}

Matrix DenseLayer::backward(const Matrix& grad_out, LayerGradients& grads) const {
    if (!has_cache_) throw StateError("backward called before forward");
    if (grad_out.rows() != cached_pre_.rows() || grad_out.cols() != cached_pre_.cols()) {
        throw ShapeError("upstream gradient shape does not match layer output");
    }
    const std::size_t batch = grad_out.rows();
    const std::size_t in = in_dim();
    const std::size_t out = out_dim();

    Matrix g_pre = grad_out;
    if (activation_ == Activation::Relu) {
        auto g = g_pre.data();
        auto pre = cached_pre_.data();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (pre[i] <= 0.0) g[i] = 0.0;
        }
    }

    if (grads.weights.rows() != out || grads.weights.cols() != in) grads.weights = Matrix(out, in);
    else grads.weights.fill(0.0);
    grads.bias.assign(out, 0.0);

    Matrix grad_in(batch, in);
    for (std::size_t b = 0; b < batch; ++b) {
        const double* xr = cached_input_.row(b).data();
        const double* gr = g_pre.row(b).data();
        double* gin = grad_in.row(b).data();
        for (std::size_t o = 0; o < out; ++o) {
            const double g = gr[o];
            if (g == 0.0) continue;
            grads.bias[o] += g;
            double* gw = grads.weights.row(o).data();
            const double* wr = weights_.row(o).data();
            for (std::size_t i = 0; i < in; ++i) {
                gw[i] += g * xr[i];
                gin[i] += g * wr[i];
            }
        }
    }
    return grad_in;
}

void DenseLayer::clear_cache() noexcept {
    cached_input_ = Matrix();
    cached_pre_ = Matrix();
    output_ = Matrix();
    has_cache_ = false;
}

// ---------------------------------------------------------------------------

Network::Network(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ShapeError("network needs at least one layer");
    for (std::size_t k = 1; k < layers_.size(); ++k) {
        if (layers_[k - 1].out_dim() != layers_[k].in_dim()) {
            throw ShapeError("layer " + std::to_string(k - 1) + " output dim " +
                             std::to_string(layers_[k - 1].out_dim()) + " != layer " +
                             std::to_string(k) + " input dim " +
                             std::to_string(layers_[k].in_dim()));
        }
    }
}

Network Network::mlp(std::size_t in_dim, const std::vector<std::size_t>& hidden,
                     std::size_t out_dim, Activation output_activation, Rng& rng) {
    std::vector<DenseLayer> layers;
    std::size_t prev = in_dim;
    for (std::size_t h : hidden) {
        layers.emplace_back(prev, h, Activation::Relu);
        prev = h;
    }
    layers.emplace_back(prev, out_dim, output_activation);
    for (auto& l : layers) l.initialize(rng);
    return Network(std::move(layers));
}

std::size_t Network::input_dim() const {
    if (layers_.empty()) throw StateError("empty network");
    return layers_.front().in_dim();
}

std::size_t Network::output_dim() const {
    if (layers_.empty()) throw StateError("empty network");
    return layers_.back().out_dim();
}

std::size_t Network::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights().size() + l.bias().size();
    return n;
}

void Network::check_input(const Matrix& batch) const {
    if (batch.cols() != input_dim()) {
        throw ShapeError("batch has " + std::to_string(batch.cols()) +
                         " columns, network expects " + std::to_string(input_dim()));
    }
    if (!batch.all_finite()) throw ValidationError("batch contains non-finite values");
}

Matrix Network::forward(const Matrix& batch) {
    check_input(batch);
    const Matrix* x = &batch;
    for (auto& l : layers_) x = &l.forward(*x);
    cached_rows_ = batch.rows();
    has_forward_ = true;
    return *x;
}

Matrix Network::predict(const Matrix& batch) const {
    check_input(batch);
    Matrix x = layers_.front().evaluate(batch);
    for (std::size_t k = 1; k < layers_.size(); ++k) x = layers_[k].evaluate(x);
    return x;
}

Gradients Network::backward(const Matrix& upstream) {
    if (!has_forward_) throw StateError("backward called before forward");
    if (upstream.rows() != cached_rows_ || upstream.cols() != output_dim()) {
        throw ShapeError("upstream gradient must be " + std::to_string(cached_rows_) + "x" +
                         std::to_string(output_dim()));
    }
    Gradients g;
    g.layers.resize(layers_.size());
    Matrix grad = upstream;
    for (std::size_t k = layers_.size(); k-- > 0;) grad = layers_[k].backward(grad, g.layers[k]);
    g.input = std::move(grad);
    return g;
}

Gradients Network::zero_gradients() const {
    Gradients g;
    for (const auto& l : layers_) {
        g.layers.push_back({Matrix(l.out_dim(), l.in_dim()), std::vector<double>(l.out_dim(), 0.0)});
    }
    return g;
}

bool operator==(const Network& a, const Network& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t k = 0; k < a.layers_.size(); ++k) {
        const auto& la = a.layers_[k];
        const auto& lb = b.layers_[k];
        if (la.activation() != lb.activation() || la.weights() != lb.weights() ||
            la.bias() != lb.bias()) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw ValidationError("softmax of an empty vector");
    double mx = -std::numeric_limits<double>::infinity();
    for (double z : logits) {
        if (!std::isfinite(z)) throw ValidationError("softmax input is not finite");
        mx = std::max(mx, z);
    }
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        const auto p = softmax(logits.row(r));
        std::copy(p.begin(), p.end(), out.row(r).begin());
    }
    return out;
}

double cross_entropy(std::span<const double> predicted, std::size_t label) {
    if (label >= predicted.size()) {
        throw IndexError("label " + std::to_string(label) + " out of range for " +
                         std::to_string(predicted.size()) + " classes");
    }
    return -std::log(std::max(predicted[label], kProbabilityFloor));
}

LossAndGradient softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
    if (labels.size() != logits.rows()) {
        throw ShapeError("label count " + std::to_string(labels.size()) + " != batch size " +
                         std::to_string(logits.rows()));
    }
    LossAndGradient out;
    out.grad_logits = softmax_rows(logits);
    const double inv_b = logits.rows() > 0 ? 1.0 / static_cast<double>(logits.rows()) : 0.0;
    double total = 0.0;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        auto row = out.grad_logits.row(r);
        const int y = labels[r];
        if (y < 0) throw IndexError("negative label");
        total += cross_entropy(row, static_cast<std::size_t>(y));
        row[static_cast<std::size_t>(y)] -= 1.0;
        for (double& v : row) v *= inv_b;
    }
    out.mean_loss = total * inv_b;
    return out;
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

}  // namespace ecl
