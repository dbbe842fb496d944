#include "ecl/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "ecl/error.hpp"
#include "ecl/text_io.hpp"

namespace ecl {

BatchPlan plan_batch(std::size_t batch_size, double inv_ratio) {
    if (batch_size == 0) throw ValidationError("batch size must be at least 1");
    if (!(inv_ratio >= 0.0 && inv_ratio <= 1.0)) throw ValidationError("inv_ratio must lie in [0, 1]");
    BatchPlan p;
    p.batch_size = batch_size;
    if (inv_ratio == kInvRatio) {
        p.n_inv = (4 * batch_size) / 5;
    } else {
        p.n_inv = static_cast<std::size_t>(std::floor(inv_ratio * static_cast<double>(batch_size)));
    }
    p.n_spec = batch_size - p.n_inv;
    return p;
}

void TrainConfig::validate() const {
    if (batch_size == 0) throw ValidationError("training batch_size must be at least 1");
    optimizer.validate();
    plateau.validate();
    if (!(inv_ratio >= 0.0 && inv_ratio <= 1.0)) throw ValidationError("inv_ratio must lie in [0, 1]");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw ValidationError("validation_fraction must lie in (0, 1)");
    }
}

std::string to_string(Stage s) {
    switch (s) {
        case Stage::Stage1: return "stage1";
        case Stage::Stage2: return "stage2";
        case Stage::Done: return "done";
        case Stage::Baseline: return "baseline";
    }
    return "done";
}

namespace {

Stage stage_from_string(const std::string& s) {
    if (s == "stage1") return Stage::Stage1;
    if (s == "stage2") return Stage::Stage2;
    if (s == "done") return Stage::Done;
    if (s == "baseline") return Stage::Baseline;
    throw ValidationError("unknown stage '" + s + "'");
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string to_json_line(const MetricsRecord& r) {
    nlohmann::ordered_json j;
    j["run"] = r.run_id;
    j["kind"] = r.kind == MetricsRecord::Kind::Epoch ? "epoch" : "transition";
    j["stage"] = to_string(r.stage);
    j["epoch"] = r.epoch;
    j["steps"] = r.steps;
    j["train_loss"] = r.train_loss;
    if (r.val_loss) j["val_loss"] = *r.val_loss;
    else j["val_loss"] = nullptr;
    j["rng"] = hex64(r.rng_hash);
    return j.dump();
}

void write_metrics_log(const std::vector<MetricsRecord>& log, const std::filesystem::path& path) {
    std::string text;
    for (const auto& r : log) text += to_json_line(r) + "\n";
    write_text_file(path, text);
}

std::vector<MetricsRecord> read_metrics_log(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::vector<MetricsRecord> out;
    std::size_t line = 0, pos = 0;
    while (pos < text.size()) {
        const auto end = text.find('\n', pos);
        const std::string ln = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        pos = end == std::string::npos ? text.size() : end + 1;
        ++line;
        if (ln.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(ln);
            MetricsRecord r;
            r.run_id = j.at("run").get<std::string>();
            r.kind = j.at("kind") == "epoch" ? MetricsRecord::Kind::Epoch : MetricsRecord::Kind::Transition;
            r.stage = stage_from_string(j.at("stage").get<std::string>());
            r.epoch = j.at("epoch").get<std::size_t>();
            r.steps = j.at("steps").get<std::size_t>();
            r.train_loss = j.at("train_loss").get<double>();
            if (!j.at("val_loss").is_null()) r.val_loss = j.at("val_loss").get<double>();
            r.rng_hash = std::stoull(j.at("rng").get<std::string>(), nullptr, 16);
            out.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw ParseError(std::string("metrics log: ") + e.what(), line);
        }
    }
    return out;
}

TrainState::TrainState(SceneModel m, const OptimizerConfig& opt_cfg, std::uint64_t seed_,
                       std::string id)
    : model(std::move(m)), optimizers(opt_cfg), seed(seed_), run_id(std::move(id)) {}

std::vector<std::size_t> indices_of(const Dataset& data, const std::vector<SampleId>& ids) {
    std::unordered_map<SampleId, std::size_t> where;
    where.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) where.emplace(data.samples[i].id, i);
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (SampleId id : ids) {
        const auto it = where.find(id);
        if (it == where.end()) {
            throw ValidationError("sample " + std::to_string(id) + " is not in the training set");
        }
        out.push_back(it->second);
    }
    return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_validation(
    const Dataset& data, const std::vector<std::size_t>& indices, double fraction,
    std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> by_scene;
    for (std::size_t i : indices) by_scene[data.samples[i].scene].push_back(i);
    std::vector<std::size_t> held;
    for (auto& [scene, members] : by_scene) {
        std::sort(members.begin(), members.end());
        Rng rng(derive_seed(seed, SeedPurpose::ValidationSplit, static_cast<std::uint64_t>(scene)));
        rng.shuffle(members);
        auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
        if (k == 0 && members.size() >= 2) k = 1;
        if (k >= members.size()) k = members.size() - 1;
        held.insert(held.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(k));
    }
    std::unordered_set<std::size_t> held_set(held.begin(), held.end());
    std::vector<std::size_t> keep;
    for (std::size_t i : indices) {
        if (!held_set.count(i)) keep.push_back(i);
    }
    std::sort(held.begin(), held.end());
    return {keep, held};
}

CyclicSampler::CyclicSampler(std::vector<std::size_t> pool, std::uint64_t seed)
    : pool_(std::move(pool)), rng_(seed) {
    if (pool_.empty()) throw ValidationError("cannot sample from an empty pool");
    rng_.shuffle(pool_);
}

void CyclicSampler::draw(std::size_t k, std::vector<std::size_t>& out) {
    for (std::size_t i = 0; i < k; ++i) {
        if (pos_ == pool_.size()) {
            rng_.shuffle(pool_);
            pos_ = 0;
        }
        out.push_back(pool_[pos_++]);
    }
}

namespace {

void audit_step(TrainState& s, const Dataset& train, const std::vector<std::size_t>& batch,
                std::size_t n_inv, std::size_t n_spec) {
    StepAudit a;
    a.step = s.total_steps;
    a.stage = s.stage;
    a.n_inv = n_inv;
    a.n_spec = n_spec;
    a.ids.reserve(batch.size());
    for (std::size_t i : batch) a.ids.push_back(train.samples[i].id);
    s.audit.push_back(std::move(a));
}

void check_partition_covers(const CurriculumPartition& p, const Dataset& train) {
    if (p.inv_ids.size() + p.spec_ids.size() != train.size()) {
        throw ValidationError("partition covers " + std::to_string(p.inv_ids.size() + p.spec_ids.size()) +
                              " ids but the training set has " + std::to_string(train.size()));
    }
}

void log_transition(TrainState& s, std::uint64_t hash) {
    MetricsRecord r;
    r.kind = MetricsRecord::Kind::Transition;
    r.run_id = s.run_id;
    r.stage = Stage::Stage2;
    r.epoch = s.epoch;
    r.steps = s.total_steps;
    r.train_loss = s.log.empty() ? 0.0 : s.log.back().train_loss;
    r.val_loss = s.log.empty() ? std::nullopt : s.log.back().val_loss;
    r.rng_hash = hash;
    s.log.push_back(r);
}

}  // namespace

TrainState run_stage1(TrainState state, const CurriculumPartition& partition,
                      const Dataset& train, const TrainConfig& cfg) {
    cfg.validate();
    if (state.stage != Stage::Stage1) throw StateError("run_stage1 requires a Stage 1 state");
    check_partition_covers(partition, train);
    const auto inv = indices_of(train, partition.inv_ids);
    indices_of(train, partition.spec_ids);

    auto [inv_train, inv_val] = split_validation(
        train, inv, cfg.validation_fraction, derive_seed(state.seed, SeedPurpose::ValidationSplit, 0));
    if (inv_train.size() < cfg.batch_size) {
        throw ValidationError("X_inv training part has " + std::to_string(inv_train.size()) +
                              " samples, fewer than one batch of " + std::to_string(cfg.batch_size) +
                              "; use a smaller batch size");
    }
    if (inv_val.empty()) throw ValidationError("X_inv is too small to hold out a validation set");
    state.inv_validation = inv_val;

    Rng rng(derive_seed(state.seed, SeedPurpose::Stage1Shuffle));
    PlateauDetector plateau(cfg.plateau);
    std::vector<std::size_t> order = inv_train;
    std::vector<std::size_t> batch;
    for (std::size_t epoch = 0; epoch < cfg.stage1_max_epochs; ++epoch) {
        rng.shuffle(order);
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
            if (cfg.audit) audit_step(state, train, batch, batch.size(), 0);
            total += train_step(state.model, state.optimizers, train, batch) *
                     static_cast<double>(batch.size());
            ++state.total_steps;
        }
        ++state.epoch;
        MetricsRecord r;
        r.run_id = state.run_id;
        r.stage = Stage::Stage1;
        r.epoch = state.epoch;
        r.steps = state.total_steps;
        r.train_loss = total / static_cast<double>(order.size());
        r.val_loss = mean_loss(state.model, train, inv_val);
        r.rng_hash = rng.state_hash();
        state.log.push_back(r);
        if (plateau.step(*r.val_loss) == PlateauDecision::Transition) break;
    }
    state.stage1_steps = state.total_steps;
    state.transition_step = state.total_steps;
    log_transition(state, rng.state_hash());
    state.stage = Stage::Stage2;
    state.epoch = 0;
    return state;
}

TrainState run_stage2(TrainState state, const CurriculumPartition& partition,
                      const Dataset& train, const TrainConfig& cfg) {
    cfg.validate();
    if (state.stage != Stage::Stage2) throw StateError("run_stage2 requires a Stage 2 state");
    if (partition.spec_ids.empty()) throw ValidationError("X_spec is empty");
    check_partition_covers(partition, train);
    if (cfg.stage2_epochs == 0) {
        state.stage = Stage::Done;
        return state;
    }

    const auto inv = indices_of(train, partition.inv_ids);
    const auto spec = indices_of(train, partition.spec_ids);
    // Reuse the Stage 1 hold-out so validation samples never receive gradients.
    auto [inv_train, inv_val] = split_validation(
        train, inv, cfg.validation_fraction, derive_seed(state.seed, SeedPurpose::ValidationSplit, 0));
    auto [spec_train, spec_val] = split_validation(
        train, spec, cfg.validation_fraction, derive_seed(state.seed, SeedPurpose::ValidationSplit, 1));
    if (spec_train.empty()) throw ValidationError("X_spec has no training samples");
    state.inv_validation = inv_val;
    state.spec_validation = spec_val;
    std::vector<std::size_t> val = inv_val;
    val.insert(val.end(), spec_val.begin(), spec_val.end());

    const BatchPlan plan = plan_batch(cfg.batch_size, cfg.inv_ratio);
    if (cfg.reset_optimizer_at_transition) state.optimizers = SceneOptimizers(cfg.optimizer);

    CyclicSampler inv_stream(inv_train, derive_seed(state.seed, SeedPurpose::Stage2Inv));
    CyclicSampler spec_stream(spec_train, derive_seed(state.seed, SeedPurpose::Stage2Spec));
    // One epoch lets each stream walk its whole pool at least once.
    const auto passes = [](std::size_t pool, std::size_t per_batch) {
        return per_batch == 0 ? std::size_t{0} : (pool + per_batch - 1) / per_batch;
    };
    const std::size_t steps_per_epoch =
        std::max(passes(inv_train.size(), plan.n_inv), passes(spec_train.size(), plan.n_spec));
    PlateauDetector plateau(cfg.plateau);
    std::vector<std::size_t> batch;
    for (std::size_t epoch = 0; epoch < cfg.stage2_epochs; ++epoch) {
        double total = 0.0;
        for (std::size_t k = 0; k < steps_per_epoch; ++k) {
            batch.clear();
            inv_stream.draw(plan.n_inv, batch);
            spec_stream.draw(plan.n_spec, batch);
            if (cfg.audit) audit_step(state, train, batch, plan.n_inv, plan.n_spec);
            total += train_step(state.model, state.optimizers, train, batch);
            ++state.total_steps;
        }
        ++state.epoch;
        MetricsRecord r;
        r.run_id = state.run_id;
        r.stage = Stage::Stage2;
        r.epoch = state.epoch;
        r.steps = state.total_steps;
        r.train_loss = total / static_cast<double>(steps_per_epoch);
        if (!val.empty()) r.val_loss = mean_loss(state.model, train, val);
        r.rng_hash = fnv1a64(hex64(inv_stream.rng().state_hash()) + hex64(spec_stream.rng().state_hash()));
        state.log.push_back(r);
        if (cfg.stage2_early_stop && r.val_loss &&
            plateau.step(*r.val_loss) == PlateauDecision::Transition) {
            break;
        }
    }
    state.stage = Stage::Done;
    return state;
}

TrainState run_curriculum(TrainState state, const CurriculumPartition& partition,
                          const Dataset& train, const TrainConfig& cfg) {
    return run_stage2(run_stage1(std::move(state), partition, train, cfg), partition, train, cfg);
}

TrainState run_baseline(TrainState state, const Dataset& train, const TrainConfig& cfg,
                        std::size_t step_budget) {
    cfg.validate();
    std::vector<std::size_t> pool(train.size());
    std::iota(pool.begin(), pool.end(), 0);
    if (pool.size() < cfg.batch_size) {
        throw ValidationError("training set has fewer samples than one batch; use a smaller batch size");
    }
    state.stage = Stage::Baseline;
    const std::size_t steps_per_epoch = (pool.size() + cfg.batch_size - 1) / cfg.batch_size;
    CyclicSampler stream(std::move(pool), derive_seed(state.seed, SeedPurpose::BaselineShuffle));

    std::vector<std::size_t> batch;
    double total = 0.0;
    std::size_t in_epoch = 0;
    for (std::size_t step = 0; step < step_budget; ++step) {
        batch.clear();
        stream.draw(cfg.batch_size, batch);
        if (cfg.audit) audit_step(state, train, batch, 0, 0);
        total += train_step(state.model, state.optimizers, train, batch);
        ++state.total_steps;
        ++in_epoch;
        if (in_epoch == steps_per_epoch || step + 1 == step_budget) {
            ++state.epoch;
            MetricsRecord r;
            r.run_id = state.run_id;
            r.stage = Stage::Baseline;
            r.epoch = state.epoch;
            r.steps = state.total_steps;
            r.train_loss = total / static_cast<double>(in_epoch);
            r.rng_hash = stream.rng().state_hash();
            state.log.push_back(r);
            total = 0.0;
            in_epoch = 0;
        }
    }
    state.stage = Stage::Done;
    return state;
}

}  // namespace ecl
