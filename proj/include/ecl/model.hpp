#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ecl/dataset.hpp"
#include "ecl/nn.hpp"
#include "ecl/optimizer.hpp"

namespace ecl {

struct ModelConfig {
    std::vector<std::size_t> hidden = {64};
    std::size_t feature_dim = 32;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Scene model split into a feature extractor (all-ReLU MLP) and a linear
/// scene classifier on top of it.
struct SceneModel {
    Network feature;
    Network classifier;

    friend bool operator==(const SceneModel&, const SceneModel&) = default;
};

SceneModel make_scene_model(const ModelConfig& cfg, std::size_t input_dim, int num_scenes,
                            std::uint64_t init_seed);

struct SceneOptimizers {
    OptimizerState feature;
    OptimizerState classifier;

    explicit SceneOptimizers(const OptimizerConfig& cfg) : feature(cfg), classifier(cfg) {}
};

/// One gradient step of cross-entropy over the given sample indices.
/// Returns the batch mean loss before the update.
double train_step(SceneModel& model, SceneOptimizers& opt, const Dataset& data,
                  std::span<const std::size_t> indices);

/// Mean cross-entropy over the given indices (no parameter change).
double mean_loss(const SceneModel& model, const Dataset& data,
                 std::span<const std::size_t> indices);

/// Argmax scene prediction per sample (ties go to the lowest class).
std::vector<int> predict_scenes(const SceneModel& model, const Dataset& data);

}  // namespace ecl
