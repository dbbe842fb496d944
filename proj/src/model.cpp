#include "ecl/model.hpp"

#include <algorithm>

#include "ecl/error.hpp"
#include "ecl/rng.hpp"

namespace ecl {

SceneModel make_scene_model(const ModelConfig& cfg, std::size_t input_dim, int num_scenes,
                            std::uint64_t init_seed) {
    if (num_scenes < 2) throw ValidationError("scene model needs at least 2 classes");
    if (cfg.feature_dim == 0) throw ValidationError("feature_dim must be positive");
    Rng rng(init_seed);
    SceneModel m;
    m.feature = Network::mlp(input_dim, cfg.hidden, cfg.feature_dim, Activation::Relu, rng);
    m.classifier = Network::mlp(cfg.feature_dim, {}, static_cast<std::size_t>(num_scenes),
                                Activation::Identity, rng);
    return m;
}

namespace {

std::vector<int> gather_labels(const Dataset& data, std::span<const std::size_t> indices) {
    std::vector<int> y;
    y.reserve(indices.size());
    for (std::size_t i : indices) y.push_back(data.samples[i].scene);
    return y;
}

std::vector<std::size_t> to_vector(std::span<const std::size_t> s) { return {s.begin(), s.end()}; }

}  // namespace

double train_step(SceneModel& model, SceneOptimizers& opt, const Dataset& data,
                  std::span<const std::size_t> indices) {
    if (indices.empty()) throw ValidationError("train_step on an empty batch");
    const Matrix x = data.feature_matrix(to_vector(indices));
    const auto y = gather_labels(data, indices);
    const Matrix h = model.feature.forward(x);
    const Matrix logits = model.classifier.forward(h);
    const auto lg = softmax_cross_entropy(logits, y);
    const Gradients g_cls = model.classifier.backward(lg.grad_logits);
    const Gradients g_feat = model.feature.backward(g_cls.input);
    apply_update(model.classifier, g_cls, opt.classifier);
    apply_update(model.feature, g_feat, opt.feature);
    return lg.mean_loss;
}

double mean_loss(const SceneModel& model, const Dataset& data,
                 std::span<const std::size_t> indices) {
    if (indices.empty()) throw ValidationError("mean_loss over an empty set");
    const Matrix x = data.feature_matrix(to_vector(indices));
    const Matrix probs = softmax_rows(model.classifier.predict(model.feature.predict(x)));
    double total = 0.0;
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        total += cross_entropy(probs.row(r), static_cast<std::size_t>(data.samples[indices[r]].scene));
    }
    return total / static_cast<double>(indices.size());
}

std::vector<int> predict_scenes(const SceneModel& model, const Dataset& data) {
    if (data.feature_dim != model.feature.input_dim()) {
        throw ShapeError("model expects " + std::to_string(model.feature.input_dim()) +
                         " features, dataset has " + std::to_string(data.feature_dim));
    }
    if (static_cast<std::size_t>(data.num_scenes) != model.classifier.output_dim()) {
        throw ShapeError("model predicts " + std::to_string(model.classifier.output_dim()) +
                         " scenes, dataset has " + std::to_string(data.num_scenes));
    }
    std::vector<int> pred;
    pred.reserve(data.size());
    constexpr std::size_t kChunk = 512;
    for (std::size_t start = 0; start < data.size(); start += kChunk) {
        std::vector<std::size_t> idx;
        for (std::size_t i = start; i < std::min(data.size(), start + kChunk); ++i) idx.push_back(i);
        const Matrix logits = model.classifier.predict(model.feature.predict(data.feature_matrix(idx)));
        for (std::size_t r = 0; r < logits.rows(); ++r) {
            pred.push_back(static_cast<int>(argmax(logits.row(r))));
        }
    }
    return pred;
}

}  // namespace ecl
