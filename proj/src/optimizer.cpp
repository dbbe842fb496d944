#include "ecl/optimizer.hpp"

#include <cmath>

#include "ecl/error.hpp"

namespace ecl {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_kind_from_string(const std::string& s) {
    if (s == "sgd") return OptimizerKind::Sgd;
    if (s == "adam") return OptimizerKind::Adam;
    throw ValidationError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("learning_rate must be positive");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ValidationError("Adam betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
}

OptimizerState::OptimizerState(OptimizerConfig cfg) : config(cfg) { config.validate(); }

namespace {

void check_congruent(const Network& net, const Gradients& grads) {
    const auto layers = net.layers();
    if (grads.layers.size() != layers.size()) {
        throw ShapeError("gradient layer count does not match network");
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& g = grads.layers[k];
        if (g.weights.rows() != layers[k].out_dim() || g.weights.cols() != layers[k].in_dim() ||
            g.bias.size() != layers[k].out_dim()) {
            throw ShapeError("gradient shape mismatch at layer " + std::to_string(k));
        }
    }
}

void ensure_moments(const Network& net, OptimizerState& opt) {
    const auto layers = net.layers();
    if (opt.first_w.size() == layers.size()) {
        for (std::size_t k = 0; k < layers.size(); ++k) {
            if (opt.first_w[k].rows() != layers[k].out_dim() ||
                opt.first_w[k].cols() != layers[k].in_dim()) {
                throw ShapeError("optimizer moments do not match network at layer " +
                                 std::to_string(k));
            }
        }
        return;
    }
    if (!opt.first_w.empty()) throw ShapeError("optimizer state belongs to a different network");
    for (const auto& l : layers) {
        opt.first_w.emplace_back(l.out_dim(), l.in_dim());
        opt.second_w.emplace_back(l.out_dim(), l.in_dim());
        opt.first_b.emplace_back(l.out_dim(), 0.0);
        opt.second_b.emplace_back(l.out_dim(), 0.0);
    }
}

struct AdamStep {
    double lr, b1, b2, eps, c1, c2;

    void operator()(double& p, double g, double& m, double& v) const {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        const double m_hat = m / c1;
        const double v_hat = v / c2;
        p -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
};

}  // namespace

void apply_update(Network& net, const Gradients& grads, OptimizerState& opt) {
    check_congruent(net, grads);
    auto layers = net.layers();
    const auto& cfg = opt.config;
    ++opt.step;

    if (cfg.kind == OptimizerKind::Sgd) {
        for (std::size_t k = 0; k < layers.size(); ++k) {
            auto w = layers[k].weights().data();
            auto gw = grads.layers[k].weights.data();
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.learning_rate * gw[i];
            auto& b = layers[k].bias();
            for (std::size_t i = 0; i < b.size(); ++i) {
                b[i] -= cfg.learning_rate * grads.layers[k].bias[i];
            }
        }
        return;
    }

    ensure_moments(net, opt);
    const double t = static_cast<double>(opt.step);
    const AdamStep adam{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon,
                        1.0 - std::pow(cfg.beta1, t), 1.0 - std::pow(cfg.beta2, t)};
    for (std::size_t k = 0; k < layers.size(); ++k) {
        auto w = layers[k].weights().data();
        auto gw = grads.layers[k].weights.data();
        auto m = opt.first_w[k].data();
        auto v = opt.second_w[k].data();
        for (std::size_t i = 0; i < w.size(); ++i) adam(w[i], gw[i], m[i], v[i]);
        auto& b = layers[k].bias();
        for (std::size_t i = 0; i < b.size(); ++i) {
            adam(b[i], grads.layers[k].bias[i], opt.first_b[k][i], opt.second_b[k][i]);
        }
    }
}

}  // namespace ecl
