#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ecl/config.hpp"
#include "ecl/curriculum.hpp"
#include "ecl/domain_probe.hpp"
#include "ecl/evalkit.hpp"

namespace ecl {

enum class TrainMode { Curriculum, Baseline };

std::string to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);

/// Derived seeds of one (fraction, seed index) sub-run. Baseline and
/// curriculum share all of them, in particular the model initialization.
struct RunSeeds {
    std::uint64_t run = 0;     // derive_seed(master, Run, seed_index)
    std::uint64_t subset = 0;  // same for every fraction -> nested subsets
    std::uint64_t init = 0;
    std::uint64_t probe = 0;
    std::uint64_t train = 0;
};

RunSeeds run_seeds(std::uint64_t master, std::size_t seed_index, int percent);

/// File layout under the output directory.
struct RunPaths {
    std::filesystem::path dir;
    std::filesystem::path partition;
    std::filesystem::path metrics(TrainMode m) const;
    std::filesystem::path checkpoint(TrainMode m) const;
    std::filesystem::path eval(TrainMode m) const;
    std::filesystem::path audit(TrainMode m) const;
};

std::filesystem::path train_data_path(const RunConfig& cfg);
std::filesystem::path test_data_path(const RunConfig& cfg);
RunPaths run_paths(const RunConfig& cfg, int percent, std::size_t seed_index);
std::string run_id(int percent, std::size_t seed_index, TrainMode mode);

struct ScoreSummary {
    double min_entropy = 0.0;
    double median_entropy = 0.0;
    double max_entropy = 0.0;
    std::size_t n_inv = 0;
    std::size_t n_spec = 0;
    double domain_train_accuracy = 0.0;
    std::size_t domain_epochs = 0;
};

/// Phase 1 on a training subset: warm-up (or random) extractor, frozen
/// features, device classifier, entropy scores, median split.
CurriculumPartition score_subset(const RunConfig& cfg, const Dataset& subset, const RunSeeds& seeds,
                                 ScoreSummary* summary = nullptr);

/// Trains a scene model in the given mode. Baseline needs the curriculum
/// run's total step count.
TrainState train_subset(const RunConfig& cfg, const Dataset& subset,
                        const CurriculumPartition* partition, TrainMode mode, const RunSeeds& seeds,
                        std::size_t baseline_steps, const std::string& id);

struct PairedResult {
    int percent = 0;
    std::size_t seed_index = 0;
    EvalReport baseline;
    EvalReport curriculum;
    std::size_t steps = 0;
    std::size_t stage1_steps = 0;
};

/// In-memory paired run (score, curriculum, step-matched baseline, evaluate)
/// without touching the filesystem.
PairedResult run_pair(const RunConfig& cfg, const Dataset& train, const Dataset& test, int percent,
                      std::size_t seed_index);

// CLI commands. Progress goes to `log`; data goes to files under the output dir.
struct CommandOptions {
    bool force = false;
    std::optional<double> fraction;  // default: first configured fraction
    std::size_t seed_index = 0;
};

void cmd_gen_data(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log);
void cmd_score(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log);
void cmd_train(const RunConfig& cfg, const CommandOptions& opt, TrainMode mode, std::ostream& log);
void cmd_evaluate(const RunConfig& cfg, const CommandOptions& opt, TrainMode mode, std::ostream& log);
/// Full grid. Returns the aggregated table; writes results, curve, manifest.
ResultsTable cmd_compare(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log);

/// Per-device sample counts and shares of a dataset, as a text table.
std::string dataset_summary(const Dataset& d);

}  // namespace ecl
