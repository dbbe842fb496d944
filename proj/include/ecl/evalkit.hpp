#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecl/dataset.hpp"
#include "ecl/model.hpp"

namespace ecl {

struct ClassWiseAccuracy {
    double mean = 0.0;
    std::vector<double> per_class;
};

/// Mean of per-class accuracies N_c^correct / N_c. Every class in [0, C)
/// must occur in labels, otherwise ValidationError naming the class.
ClassWiseAccuracy class_wise_accuracy(std::span<const int> predictions, std::span<const int> labels,
                                      int num_classes);

struct EvalReport {
    int num_scenes = 0;
    int num_devices = 0;
    double overall_classwise_acc = 0.0;
    std::vector<double> per_class_acc;
    /// Plain accuracy per device; empty optional for devices without test samples.
    std::vector<std::optional<double>> per_device_acc;
    /// Class-wise accuracy on seen / unseen device samples; absent when the
    /// test split has no such samples.
    std::optional<double> seen_acc;
    std::optional<double> unseen_acc;
    std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
    std::size_t n_evaluated = 0;
};

EvalReport evaluate_predictions(const Dataset& test, std::span<const int> predictions);
EvalReport evaluate(const SceneModel& model, const Dataset& test);

std::string report_to_json(const EvalReport& r);

enum class System { Baseline, Curriculum };

std::string to_string(System s);
System system_from_string(const std::string& s);

/// Reports per (system, subset percent), one per seed.
using ResultGrid = std::map<std::pair<System, int>, std::vector<EvalReport>>;

struct CellStats {
    double mean = 0.0;  // percent
    double std = 0.0;   // sample standard deviation, 0 for a single seed
    std::size_t n = 0;

    friend bool operator==(const CellStats&, const CellStats&) = default;
};

CellStats cell_stats(std::span<const double> values_percent);

struct ResultsRow {
    System system = System::Baseline;
    std::map<int, CellStats> overall;  // by subset percent
    std::optional<CellStats> seen_5;
    std::optional<CellStats> unseen_5;

    friend bool operator==(const ResultsRow&, const ResultsRow&) = default;
};

struct ResultsTable {
    std::vector<ResultsRow> rows;  // baseline first, then curriculum

    friend bool operator==(const ResultsTable&, const ResultsTable&) = default;
};

ResultsTable summarize(const ResultGrid& grid);

// results.csv (version 1):
//   # ecl-results 1
//   system,p5_mean,p5_std,p10_mean,...,p100_std,seen5_mean,seen5_std,unseen5_mean,unseen5_std
//   baseline,<values or empty>...
// Percent values at full precision; empty cells where no run exists.
//
// curve.csv (version 1):
//   # ecl-curve 1
//   fraction,system,mean,std
std::string results_csv(const ResultsTable& t);
std::string results_text(const ResultsTable& t);
std::string curve_csv(const ResultsTable& t);
ResultsTable parse_results_csv(const std::string& text);

struct ResultFiles {
    std::filesystem::path csv, text, curve;
};

/// Writes results.csv, results.txt and curve.csv under dir. Throws
/// ValidationError if reports disagree on C or D or the grid is empty.
ResultFiles emit_results_table(const ResultGrid& grid, const std::filesystem::path& dir);

}  // namespace ecl
