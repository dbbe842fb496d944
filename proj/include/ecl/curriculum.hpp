#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecl/dataset.hpp"
#include "ecl/domain_probe.hpp"
#include "ecl/model.hpp"
#include "ecl/optimizer.hpp"
#include "ecl/plateau.hpp"
#include "ecl/rng.hpp"

namespace ecl {

/// Composition of one mixed Stage 2 batch.
struct BatchPlan {
    std::size_t batch_size = 0;
    std::size_t n_inv = 0;
    std::size_t n_spec = 0;

    /// floor(0.8 * B) == 0, i.e. B == 1: Stage 2 batches hold no X_inv sample.
    bool degenerate() const noexcept { return n_inv == 0; }
};

inline constexpr double kInvRatio = 0.8;

/// n_inv = floor(inv_ratio * B), n_spec = B - n_inv. The default ratio is
/// evaluated in exact integer arithmetic (4B / 5). Throws on B == 0.
BatchPlan plan_batch(std::size_t batch_size, double inv_ratio = kInvRatio);

struct TrainConfig {
    std::size_t batch_size = 32;
    OptimizerConfig optimizer{OptimizerKind::Adam, 1e-3};
    double inv_ratio = kInvRatio;
    std::size_t stage1_max_epochs = 60;
    std::size_t stage2_epochs = 40;
    bool stage2_early_stop = true;
    PlateauSettings plateau{};
    double validation_fraction = 0.1;
    bool reset_optimizer_at_transition = false;
    /// Record the sample ids of every gradient step.
    bool audit = false;

    void validate() const;
    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

enum class Stage { Stage1, Stage2, Done, Baseline };

std::string to_string(Stage s);

/// One line of the metrics log: an epoch summary or the stage transition.
struct MetricsRecord {
    enum class Kind { Epoch, Transition };
    Kind kind = Kind::Epoch;
    std::string run_id;
    Stage stage = Stage::Stage1;
    std::size_t epoch = 0;
    std::size_t steps = 0;  // cumulative gradient steps at the end of the epoch
    double train_loss = 0.0;
    std::optional<double> val_loss;
    std::uint64_t rng_hash = 0;
};

std::string to_json_line(const MetricsRecord& r);
void write_metrics_log(const std::vector<MetricsRecord>& log, const std::filesystem::path& path);
std::vector<MetricsRecord> read_metrics_log(const std::filesystem::path& path);

struct StepAudit {
    std::size_t step = 0;
    Stage stage = Stage::Stage1;
    std::vector<SampleId> ids;
    std::size_t n_inv = 0;
    std::size_t n_spec = 0;
};

struct TrainState {
    TrainState(SceneModel m, const OptimizerConfig& opt_cfg, std::uint64_t seed_, std::string id);

    Stage stage = Stage::Stage1;
    std::size_t epoch = 0;  // epochs completed in the current stage
    SceneModel model;
    SceneOptimizers optimizers;
    std::uint64_t seed = 0;
    std::string run_id;
    std::size_t total_steps = 0;
    std::size_t stage1_steps = 0;
    std::optional<std::size_t> transition_step;
    std::vector<MetricsRecord> log;
    std::vector<StepAudit> audit;

    /// Held-out validation indices (into the training dataset) used by the stages.
    std::vector<std::size_t> inv_validation;
    std::vector<std::size_t> spec_validation;
};

/// Dataset indices of the given ids; throws ValidationError naming the first
/// id missing from the dataset.
std::vector<std::size_t> indices_of(const Dataset& data, const std::vector<SampleId>& ids);

/// Seeded scene-stratified hold-out: per scene, round(fraction * n) members
/// (at least one when the scene has two or more). Returns {train, held_out}.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_validation(
    const Dataset& data, const std::vector<std::size_t>& indices, double fraction,
    std::uint64_t seed);

/// Endless without-replacement sampler: walks a shuffled copy of the pool and
/// reshuffles whenever it is exhausted.
class CyclicSampler {
public:
    CyclicSampler(std::vector<std::size_t> pool, std::uint64_t seed);

    void draw(std::size_t k, std::vector<std::size_t>& out);
    std::size_t pool_size() const noexcept { return pool_.size(); }
    const Rng& rng() const noexcept { return rng_; }

private:
    std::vector<std::size_t> pool_;
    Rng rng_;
    std::size_t pos_ = 0;
};

/// Stage 1: epochs of shuffled X_inv-only batches; switches to Stage 2 when
/// the held-out X_inv loss plateaus or the epoch cap is hit.
TrainState run_stage1(TrainState state, const CurriculumPartition& partition,
                      const Dataset& train, const TrainConfig& cfg);

/// Stage 2: every batch takes plan_batch(B).n_inv samples from X_inv and the
/// rest from X_spec via independent cyclic streams. Optimizer state carries
/// over unless cfg.reset_optimizer_at_transition.
TrainState run_stage2(TrainState state, const CurriculumPartition& partition,
                      const Dataset& train, const TrainConfig& cfg);

/// Stage 1 followed by Stage 2.
TrainState run_curriculum(TrainState state, const CurriculumPartition& partition,
                          const Dataset& train, const TrainConfig& cfg);

/// Non-curriculum reference: uniform cyclic shuffles of the whole training
/// subset for exactly step_budget gradient steps of size B.
TrainState run_baseline(TrainState state, const Dataset& train, const TrainConfig& cfg,
                        std::size_t step_budget);

}  // namespace ecl
